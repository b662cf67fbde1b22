#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "lindex/expr.hpp"
#include "lindex/lfield.hpp"
#include "lindex/parser.hpp"

namespace lindex::app {

// Usage or configuration problem; maps to exit code 3.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// INI file with --set overrides. Keys are addressed as "section.key".
class RunConfig {
public:
    static RunConfig from_file(const std::string& path);
    static RunConfig from_string(const std::string& text);

    // "section.key=value"; creates the key when missing.
    void set(const std::string& assignment);

    bool has(const std::string& key) const;
    std::string str(const std::string& key) const;
    std::string str(const std::string& key, const std::string& fallback) const;
    double real(const std::string& key) const;
    double real(const std::string& key, double fallback) const;
    int integer(const std::string& key, int fallback) const;
    std::uint64_t seed() const;
    std::vector<double> reals(const std::string& key) const;                 // whitespace or comma separated
    std::vector<double> reals(const std::string& key, std::vector<double> fallback) const;

    int n() const;
    double beta() const;
    // Parses an expression key; syntax errors carry the key and a caret line.
    Expr expression(const std::string& key, Grammar g) const;
    Expr function() const { return expression("problem.F", Grammar::analytic); }
    LField weights(const std::string& prefix = "problem.L") const;   // prefix1 .. prefixn

    // Sorted key = value lines; the hash covers exactly this text.
    std::string canonical() const;
    std::string sha256() const;
    const boost::property_tree::ptree& tree() const { return tree_; }

private:
    void validate();
    boost::property_tree::ptree tree_;
};

// Points written as "(re,im) re ; ..." with ';' between points.
std::vector<Point> parse_points(const std::string& text, int n);

// Anchors from [anchors]: either explicit `points` or `count` Halton points
// of the ball of radius `radius` (seeded by run.seed).
std::vector<Point> anchors_from(const RunConfig& cfg, const std::string& section = "anchors");

// parse_expression with errors rewritten as ConfigError naming `label`; syntax
// errors add the offending line and a caret under the column.
Expr parse_labeled(const std::string& label, const std::string& text, int n, Grammar g);

std::string sha256_hex(const std::string& data);

}  // namespace lindex::app
