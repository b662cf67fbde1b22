#include "lindex_app/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <openssl/evp.h>

#include "lindex/errors.hpp"
#include "lindex/sampling.hpp"

namespace lindex::app {

namespace pt = boost::property_tree;

namespace {

void flatten(const pt::ptree& t, const std::string& prefix, std::map<std::string, std::string>& out) {
    for (const auto& [k, v] : t) {
        const std::string key = prefix.empty() ? k : prefix + "." + k;
        if (v.empty()) out[key] = v.data();
        else flatten(v, key, out);
    }
}

double to_real(const std::string& key, const std::string& text) {
    std::string s = boost::trim_copy(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + text + "' is not a number");
    }
}

std::string caret_line(const std::string& text, int line, int column) {
    std::vector<std::string> lines;
    boost::split(lines, text, boost::is_any_of("\n"));
    if (line < 1 || line > static_cast<int>(lines.size())) return {};
    return "\n  " + lines[static_cast<std::size_t>(line - 1)] + "\n  " +
           std::string(static_cast<std::size_t>(std::max(0, column - 1)), ' ') + "^";
}

cplx parse_coordinate(const std::string& raw) {
    std::string s = boost::trim_copy(raw);
    if (s.empty()) throw ConfigError("empty coordinate in a point list");
    if (s.front() == '(') {
        if (s.back() != ')') throw ConfigError("coordinate '" + raw + "' is missing ')'");
        std::vector<std::string> parts;
        const std::string inner = s.substr(1, s.size() - 2);
        boost::split(parts, inner, boost::is_any_of(","));
        if (parts.size() != 2) throw ConfigError("coordinate '" + raw + "' needs (re,im)");
        return {to_real("point", parts[0]), to_real("point", parts[1])};
    }
    return {to_real("point", s), 0.0};
}

}  // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
}

RunConfig RunConfig::from_string(const std::string& text) {
    RunConfig c;
    std::istringstream is(text);
    try {
        pt::read_ini(is, c.tree_);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
    }
    c.validate();
    return c;
}

void RunConfig::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key = boost::trim_copy(assignment.substr(0, eq));
    const std::string value = boost::trim_copy(assignment.substr(eq + 1));
    if (std::count(key.begin(), key.end(), '.') != 1)
        throw ConfigError("--set key '" + key + "' must look like section.key");
    tree_.put(key, value);
    validate();
}

bool RunConfig::has(const std::string& key) const { return static_cast<bool>(tree_.get_optional<std::string>(key)); }

std::string RunConfig::str(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(key);
    if (!v) throw ConfigError("missing required key " + key);
    return boost::trim_copy(*v);
}

std::string RunConfig::str(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
}

double RunConfig::real(const std::string& key) const { return to_real(key, str(key)); }

double RunConfig::real(const std::string& key, double fallback) const { return has(key) ? real(key) : fallback; }

int RunConfig::integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const double v = real(key);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + " must be an integer");
    return static_cast<int>(v);
}

std::uint64_t RunConfig::seed() const {
    if (!has("run.seed")) return kDefaultMonteCarloSeed;
    const std::string s = str("run.seed");
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used, 0);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("run.seed: '" + s + "' is not an unsigned integer");
    }
}

std::vector<double> RunConfig::reals(const std::string& key) const {
    std::vector<std::string> parts;
    const std::string text = str(key);
    boost::split(parts, text, boost::is_any_of(", \t"), boost::token_compress_on);
    std::vector<double> out;
    for (const auto& p : parts)
        if (!p.empty()) out.push_back(to_real(key, p));
    if (out.empty()) throw ConfigError(key + " is empty");
    return out;
}

std::vector<double> RunConfig::reals(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? reals(key) : fallback;
}

int RunConfig::n() const { return integer("problem.n", 0); }

double RunConfig::beta() const { return real("problem.beta"); }

Expr RunConfig::expression(const std::string& key, Grammar g) const { return parse_labeled(key, str(key), n(), g); }

Expr parse_labeled(const std::string& label, const std::string& text, int n, Grammar g) {
    try {
        return parse_expression(text, n, g);
    } catch (const SyntaxError& e) {
        throw ConfigError(label + ": " + e.what() + caret_line(text, e.line(), e.column()));
    } catch (const Error& e) {
        throw ConfigError(label + ": " + e.what());
    }
}

LField RunConfig::weights(const std::string& prefix) const {
    std::vector<Expr> comps;
    for (int j = 1; j <= n(); ++j) comps.push_back(expression(prefix + std::to_string(j), Grammar::weight));
    try {
        return LField(beta(), comps);
    } catch (const Error& e) {
        throw ConfigError(prefix + ": " + e.what());
    }
}

void RunConfig::validate() {
    if (!has("problem.n")) throw ConfigError("missing required key problem.n");
    const int dim = n();
    if (dim < 1 || dim > 4) throw ConfigError("problem.n must lie in [1, 4]");
    if (has("problem.beta") && !(beta() > std::sqrt(static_cast<double>(dim))))
        throw ConfigError("problem.beta must exceed sqrt(n)");
    std::map<std::string, std::string> flat;
    flatten(tree_, "", flat);
    for (const auto& [k, v] : flat) {
        const auto leaf = k.substr(k.find('.') + 1);
        if (leaf.find("tol") != std::string::npos && !(to_real(k, v) > 0.0))
            throw ConfigError(k + " must be positive");
    }
    (void)seed();
}

std::string RunConfig::canonical() const {
    std::map<std::string, std::string> flat;
    flatten(tree_, "", flat);
    std::ostringstream os;
    for (const auto& [k, v] : flat) os << k << " = " << boost::trim_copy(v) << "\n";
    return os.str();
}

std::string RunConfig::sha256() const { return sha256_hex(canonical()); }

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

std::vector<Point> parse_points(const std::string& text, int n) {
    std::vector<std::string> rows;
    boost::split(rows, text, boost::is_any_of(";"));
    std::vector<Point> out;
    for (const auto& row : rows) {
        const std::string r = boost::trim_copy(row);
        if (r.empty()) continue;
        // Split on whitespace outside parentheses.
        std::vector<std::string> coords;
        std::string cur;
        int depth = 0;
        for (char c : r) {
            if (c == '(') ++depth;
            if (c == ')') --depth;
            if (std::isspace(static_cast<unsigned char>(c)) && depth == 0) {
                if (!cur.empty()) coords.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) coords.push_back(cur);
        if (static_cast<int>(coords.size()) != n)
            throw ConfigError("point '" + r + "' has " + std::to_string(coords.size()) + " coordinates, expected " +
                              std::to_string(n));
        Point p;
        for (const auto& c : coords) p.push_back(parse_coordinate(c));
        if (!(euclid_norm(p) < 1.0)) throw ConfigError("point '" + r + "' is not inside the unit ball");
        out.push_back(p);
    }
    if (out.empty()) throw ConfigError("empty point list");
    return out;
}

std::vector<Point> anchors_from(const RunConfig& cfg, const std::string& section) {
    if (cfg.has(section + ".points")) return parse_points(cfg.str(section + ".points"), cfg.n());
    const int count = cfg.integer(section + ".count", 20);
    const double radius = cfg.real(section + ".radius", 0.6);
    if (count < 1) throw ConfigError(section + ".count must be positive");
    if (!(radius > 0.0 && radius < 1.0)) throw ConfigError(section + ".radius must lie in (0, 1)");
    return halton_ball(cfg.n(), static_cast<std::size_t>(count), radius, cfg.seed());
}

}  // namespace lindex::app
