#pragma once

#include <optional>
#include <vector>

#include "lindex/jet.hpp"
#include "lindex/lfield.hpp"
#include "lindex/report.hpp"

namespace lindex {

struct IndexOptions {
    // Orders within `guard` of the truncation are not trusted.
    int guard = 4;
    // Relative tolerance when deciding that two normalized derivatives tie.
    double tie_tolerance = 1e-12;
};

struct IndexReport {
    Point anchor;
    std::optional<int> local_index;  // empty when the argmax shell is too close to the cut
    bool exceeds_validity = false;
    bool is_zero = false;
    MultiIndex argmax;               // maximiser of |F^(K)|/(K! L^K) among ||K|| <= local_index
    double log_max = 0.0;            // ln of that maximum
    // Relative slack 1 - (largest ratio above the index) / (max ratio up to the index).
    double margin = 0.0;
    int valid_order = 0;             // D_valid
    int nu_norm = 0;                 // ||nu(1/L(anchor))||, an upper bound for the index
};

// ln(|F^(J)(z0)| / (J! L^J(z0))) for every entry of the jet table; -inf for zero coefficients.
std::vector<double> log_normalized_derivatives(const Jet& F, const std::vector<double>& l);

IndexReport local_index(const Jet& F, const LField& L, const IndexOptions& opt = {});

struct GlobalIndexReport {
    int sup_index = 0;               // over anchors where the index is defined
    std::size_t witness = 0;         // position of the anchor attaining it
    std::size_t exceeded = 0;        // anchors reported as exceeds-validity
    std::vector<IndexReport> anchors;
};

// Sampled lower bound for N(F, L) restricted to the region spanned by `anchors`.
GlobalIndexReport global_index_estimate(const Expr& F, const LField& L, const std::vector<Point>& anchors,
                                        int order = 16, const IndexOptions& opt = {});

struct MaximalTerm {
    double mu = 0.0;
    double log_mu = -std::numeric_limits<double>::infinity();
    MultiIndex nu;
    std::vector<double> R;
};

// mu = max |b_K| R^K over the jet table (up to its valid order); ties go to the
// largest ||K||, then to the lexicographically largest K.
MaximalTerm maximal_term(const Jet& F, const std::vector<double>& R, double tie_tolerance = 1e-12);

struct DominationStep {
    int m = 0;
    double r = 0.0;
    double mu = 0.0;
    int s = 0;
    double mu_star = 0.0;
    int s_star = -1;
};

struct DominationCertificate {
    int N = 0;                       // index cap used by the procedure
    double c = 0.0;
    double d = 0.0;
    int m0 = -1;
    int k0 = 0;
    double r = 0.0;
    double eta = 0.0;                // theorem-level eta(d) = d/((d+1) c^{2(N+1)})
    int p = 0;                       // theorem-level p = N
    double lhs = 0.0;                // sampled max of |sum_{||J|| != k0} b_J (z - z0)^J|
    double rhs = 0.0;                // 1/2 max{|b_J| (r/L)^J : ||J|| = k0}
    double coefficient_sum = 0.0;    // sum_{||J|| != k0} |b_J| (r/L)^J over the valid table
    double truncation_tail = 0.0;    // majorant for orders beyond the valid table
    std::vector<DominationStep> steps;
    CriterionReport report;
};

// The dominating-polynomial procedure: a_k = max_{||J||=k} |b_J|/L^J,
// c = 2{(N+n+1)!(n+1)! + (N+1) C(n+N-1, N)}, r_m = d/((d+1) c^m); stops at the
// first m with mu*_m / mu_m <= 1/c and verifies domination of p_{s_m} on the
// skeleton T^n(z0, r/L(z0)). N defaults to the local index at the anchor.
DominationCertificate dominating_polynomial(const Jet& F, const LField& L, double d,
                                            std::optional<int> N = std::nullopt, std::size_t skeleton_samples = 128,
                                            const IndexOptions& opt = {});

// |sum_{||J|| != k0} b_J (z - z0)^J| <= 1/2 max{|b_J| R^J : ||J|| = k0} on sampled skeleton points.
CriterionReport verify_dominance(const Jet& F, int k0, const std::vector<double>& R, const std::vector<Point>& skeleton);

// Scalar helpers exposed for tests.
double domination_constant(int N, int n);

}  // namespace lindex
