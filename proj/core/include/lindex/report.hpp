#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lindex/expr.hpp"
#include "lindex/multiindex.hpp"

namespace lindex {

enum class Verdict { pass, fail, indeterminate };

const char* to_string(Verdict v);

struct Witness {
    Point point;
    MultiIndex index;
    std::string detail;
};

// Uniform result of every sampled check. Constants are sampled suprema or
// the closed-form values they are compared against; the report never claims
// more than the samples support.
struct CriterionReport {
    std::string check;
    Verdict verdict = Verdict::indeterminate;
    std::map<std::string, double> constants;
    double worst_margin = 0.0;
    std::optional<Witness> witness;
    std::size_t samples_used = 0;
    std::size_t samples_skipped = 0;
    std::vector<std::string> notes;

    bool passed() const { return verdict == Verdict::pass; }
};

// pass/fail from a margin, with the >10% skipped-sample rule for indeterminate.
Verdict verdict_from(bool ok, std::size_t used, std::size_t skipped);

inline constexpr double kDefaultThreshold = 1e6;
inline constexpr double kSkipFraction = 0.10;

}  // namespace lindex
