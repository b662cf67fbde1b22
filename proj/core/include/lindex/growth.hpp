#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "lindex/criteria.hpp"
#include "lindex/expr.hpp"
#include "lindex/lfield.hpp"
#include "lindex/multiindex.hpp"
#include "lindex/report.hpp"

namespace lindex {

struct QuadratureOptions {
    double tol = 1e-9;                       // absolute
    std::size_t max_panels = std::size_t{1} << 20;
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t panels = 0;
    bool converged = true;
};

// Adaptive Simpson with Richardson correction. Panels that would exceed the
// budget are accepted as they are and the result is flagged unconverged.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& opt = {});

using Radii = std::vector<double>;

// Angles on a uniform grid with m points per coordinate.
std::vector<std::vector<double>> theta_grid(int n, int m);
// 32 per coordinate, reduced so that the grid has at most 4096 points.
std::vector<std::vector<double>> default_theta_grid(int n);

// Sum over j of the integral of l_j(R(j, sigma, t) e^{i Theta}) for t from
// `lower_j` to r_j, where coordinate k of R(j, sigma, t) is r0_k when
// sigma(k) < sigma(j), t when k = j and r_k when sigma(k) > sigma(j).
// sigma is a permutation of {0, ..., n-1}; lower defaults to zero.
struct GrowthIntegral {
    double value = 0.0;
    std::vector<double> per_coordinate;
    bool converged = true;
};

GrowthIntegral growth_integral(const LField& L, const Radii& R, const std::vector<double>& theta, const Radii& R0,
                               const std::vector<int>& sigma, const std::optional<Radii>& lower = std::nullopt,
                               const QuadratureOptions& quad = {});

struct GrowthIntegralMin {
    double value = 0.0;
    std::vector<double> theta;
    std::vector<int> sigma;
    std::size_t evaluations = 0;
};

// Minimum over the supplied angle grid and every permutation (n <= 4).
// R0 defaults to R/2.
GrowthIntegralMin growth_integral_min(const LField& L, const Radii& R, const std::optional<Radii>& R0 = std::nullopt,
                                      const std::vector<std::vector<double>>& thetas = {},
                                      const QuadratureOptions& quad = {});

// max over Theta of the integral from 0 to r* of sum_j (r_j/r*) l_j(tau R/r* e^{i Theta}).
struct RayIntegral {
    double value = 0.0;
    std::vector<double> theta;
};
RayIntegral ray_integral_max(const LField& L, const Radii& R, const std::vector<std::vector<double>>& thetas = {},
                             const QuadratureOptions& quad = {});

struct GrowthCurve {
    std::vector<Radii> radii;
    std::vector<double> lhs;
    std::vector<double> rhs;
    std::vector<double> ratio;
    double limsup = 0.0;                    // max of the ratio over the last quarter
    double cap = 0.0;                       // bound the limsup is compared against, if any
    CriterionReport report;

    // Columns |R|, lhs, rhs, ratio with %.17g values.
    void write_csv(std::ostream& os) const;
};

// Radii (r, ..., r) for r on an even grid from r_first to r_last.
std::vector<Radii> diagonal_radii(int n, double r_first, double r_last, std::size_t count);

// Along the sequence: lhs = ray integral, rhs = -sum (r_j beta/|R|) ln(1-|R|).
// The cone condition is checked on every integration node that the
// quadrature visits; a violation raises InadmissibleL.
GrowthCurve lemma4_divergence(const LField& L, const std::vector<Radii>& sequence,
                              const std::vector<std::vector<double>>& thetas = {},
                              const QuadratureOptions& quad = {});

// Derivative of u_j(t) = l_j(t R/r* e^{i Theta}) by central differences with
// step 1e-6 r*, one-sided within 1e-6 r* of 0 or r*.
double u_derivative(const LField& L, int j, const Radii& R, const std::vector<double>& theta, double t);

// ln max_{||S||<=N} |F^(S)|/(S! L^S) at R e^{i Theta} against its value at 0
// plus the integral of the two maxima in the bound.
CriterionReport thm15_derivative_bound(const Expr& F, const LField& L, const Radii& R,
                                       const std::vector<double>& theta, int N, const QuadratureOptions& quad = {});

struct WConditionOptions {
    int t_points = 64;                      // t samples per ray, endpoints included
    double vanish_tol = 1e-3;               // shell sup treated as vanished
    double threshold = kDefaultThreshold;
};

// C = sampled sup of (-u_j')^+ / ((r_j/r*) l_j^2). Reports the finite-C
// verdict and, separately, whether the per-shell sups vanish toward |R| = 1.
CriterionReport check_W_condition(const LField& L, const std::vector<Radii>& radii,
                                  const std::vector<std::vector<double>>& thetas = {},
                                  const WConditionOptions& opt = {});

enum class GrowthCapKind { none, thm15_C, thm15_W, lemma5, lemma6 };

struct GrowthCap {
    GrowthCapKind kind = GrowthCapKind::none;
    int N = 0;                              // index for the two index-based caps
    double C = 0.0;                         // constant of the derivative condition
    double c = 0.0;                         // Hayman constant for the two lemma caps
    int p = 0;
};

// (C+1)N + 1, N + 1, c or c(p+1); +inf for none.
double growth_cap_value(const GrowthCap& cap);

struct GrowthRatioOptions {
    SkeletonOptions skeleton;
    std::vector<std::vector<double>> thetas;   // default_theta_grid when empty
    QuadratureOptions quad;
};

// ln M(F, R_t) / ray_integral_max(L, R_t) along the sequence; the limsup is
// estimated by the maximum over the last quarter of the trace.
GrowthCurve growth_ratio_limsup(const Expr& F, const LField& L, const std::vector<Radii>& sequence,
                                const GrowthCap& cap = {}, const GrowthRatioOptions& opt = {});

struct LagrangeResult {
    std::vector<double> x;
    double H = 1.0;
    double kkt_residual = 0.0;
    int iterations = 0;
};

// max prod x_j^{1/(2 x_j)} subject to sum 1/x_j = 1, x_j > 1. Solved as
// projected gradient ascent over y = 1/x on the simplex, where ln H is half
// the entropy of y. `start` is a feasible x; the uniform point by default.
LagrangeResult lagrange_H_max(int n, const std::optional<std::vector<double>>& start = std::nullopt);

double lagrange_H(const std::vector<double>& x);

// ln of (n+||S||-1)! prod Gamma(s_j/2+1) / ((K+S)! Gamma(n+||S||/2) r^||S||).
double log_gamma_ratio_bound(const MultiIndex& S, const MultiIndex& K, int n, double r);
double gamma_ratio_bound(const MultiIndex& S, const MultiIndex& K, int n, double r);

// Smallest m such that the bound at S = m * direction is <= 1 for every
// m' in [m, max_m]; nullopt when it exceeds 1 at max_m.
std::optional<int> gamma_ratio_threshold(const MultiIndex& direction, const MultiIndex& K, int n, double r,
                                         int max_m);

}  // namespace lindex
