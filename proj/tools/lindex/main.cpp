#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lindex/parallel.hpp"
#include "lindex_app/commands.hpp"
#include "lindex_app/config.hpp"

namespace fs = std::filesystem;
using namespace lindex::app;

namespace {

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Sampled bounded-index checks for analytic functions in the unit ball"};
    std::string command, config_path, out_dir = ".";
    std::vector<std::string> overrides;
    int jobs = 1;
    std::string seed;
    cli.add_option("command", command, "index | dominate | criterion | growth | lclass | pde")
        ->required()
        ->check(CLI::IsMember(command_names()));
    cli.add_option("config", config_path, "INI configuration file")->required();
    cli.add_option("--set", overrides, "Override a key, section.key=value (repeatable)");
    cli.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 256));
    cli.add_option("--seed", seed, "Overrides run.seed");
    cli.add_option("--out", out_dir, "Directory for the report and CSV files");
    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        RunConfig cfg = RunConfig::from_file(config_path);
        for (const auto& o : overrides) cfg.set(o);
        if (!seed.empty()) cfg.set("run.seed=" + seed);
        lindex::set_worker_count(jobs);

        const RunResult result = run_command(command, cfg);
        const fs::path dir(out_dir);
        fs::create_directories(dir);
        const fs::path report = dir / (command + "_report.json");
        write_file(report, dump(result.report));
        for (const auto& [name, text] : result.files) write_file(dir / name, text);
        std::cout << command << ": " << result.report["verdict"].get<std::string>() << " (exit " << result.exit_code
                  << ") -> " << report.string() << "\n";
        if (!result.report["error"].is_null()) std::cerr << result.report["error"].get<std::string>() << "\n";
        return result.exit_code;
    } catch (const ConfigError& e) {
        std::cerr << "lindex: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "lindex: " << e.what() << "\n";
        return exit_usage;
    }
}
