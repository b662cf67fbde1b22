#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "lindex/expr.hpp"
#include "lindex/jet.hpp"
#include "lindex/lfield.hpp"
#include "lindex/report.hpp"

namespace lindex {

// ---------------------------------------------------------------------------
// Maximum modulus on a torus T^n(z0, R)

struct SkeletonOptions {
    int angles = 0;                       // per coordinate; 0 picks the default for n
    double tol = 1e-6;                    // relative change that stops the doubling
    int max_doublings = 4;
    std::size_t max_points = 1u << 18;    // a level with more grid points is not run
    bool polish = true;                   // compass search from the best grid point
    bool require_inside_ball = true;
};

struct SkeletonMax {
    double value = 0.0;                   // sampled maximum, a lower bound for the true one
    Point argmax;
    std::vector<double> trace;            // value after each level
    int angles = 0;                       // angles per coordinate of the last level
    bool converged = false;
    std::size_t evaluations = 0;
};

// 64 angles per coordinate for n <= 2, 16 for n = 3, 8 for n = 4.
int default_angles(int n);

using ModulusFn = std::function<double(const Point&)>;
// Several moduli sharing the same evaluation (e.g. all derivatives from one jet).
using ModulusVecFn = std::function<std::vector<double>(const Point&)>;

SkeletonMax skeleton_max(const ModulusFn& modulus, const Point& z0, const std::vector<double>& R,
                         const SkeletonOptions& opt = {});
std::vector<SkeletonMax> skeleton_max(const ModulusVecFn& moduli, std::size_t count, const Point& z0,
                                      const std::vector<double>& R, const SkeletonOptions& opt = {});
SkeletonMax skeleton_max(const Expr& F, const Point& z0, const std::vector<double>& R,
                         const SkeletonOptions& opt = {});
// Evaluates the truncated series around its own anchor.
SkeletonMax skeleton_max(const Jet& F, const std::vector<double>& R, const SkeletonOptions& opt = {});

// ---------------------------------------------------------------------------
// Theorem-level checks

struct CriteriaOptions {
    double threshold = kDefaultThreshold;
    LocalSampling local;                  // polydisc samples for normalized-derivative maxima
    SkeletonOptions skeleton;
    std::size_t mc_interior = 4096;       // ball variants
    std::size_t mc_sphere = 4096;
    std::uint64_t seed = kDefaultMonteCarloSeed;
    int index_order = 16;                 // jet order used to synthesize n0 / N
};

// ln p0 for p0 = (2 prod l1^-N l2^N)^q, q = [2(N+1) ||R|| prod l1^-N l2^(N+1)] + 1.
double thm1_log_p0(int N, double R_sum, const std::vector<double>& lambda1, const std::vector<double>& lambda2);
// Ball form: q = [2(N+1) sqrt(n) C r prod l1^-N l2^(N+1)] + 1, C = 1 for the L-ball.
double ball_log_p0(int N, double r, double C, const std::vector<double>& lambda1, const std::vector<double>& lambda2);

// max over the polydisc of normalized derivatives of order <= n0, against
// p0 times the value at the anchor for the best K0. n0 defaults to the sampled
// global index, p0 to the formula above with sampled lambda bounds.
CriterionReport check_thm1(const Expr& F, const LField& L, const std::vector<double>& R,
                           const std::vector<Point>& anchors, std::optional<int> n0 = std::nullopt,
                           std::optional<double> p0 = std::nullopt, const CriteriaOptions& opt = {});

enum class Thm2Mode { necessary, axis_sufficient };

// Modulus growth of a single derivative: min over K0 of
// max_{polydisc} |F^(K0)| / |F^(K0)(z0)|. In the axis mode the minimum runs over
// K0 = k e_j, k <= n0, separately for each j. p defaults to p0 prod l2^n0.
CriterionReport check_thm2(const Expr& F, const LField& L, const std::vector<double>& R,
                           const std::vector<Point>& anchors, Thm2Mode mode, std::optional<int> n0 = std::nullopt,
                           std::optional<double> p = std::nullopt, const CriteriaOptions& opt = {});

// p1* = sup over anchors of M(R''/L(z0)) / M(R'/L(z0)). When R' < 1 < R''
// componentwise, both readings of the resulting index bound are reported.
CriterionReport check_thm5(const Expr& F, const LField& L, const std::vector<double>& Rp,
                           const std::vector<double>& Rpp, const std::vector<Point>& anchors,
                           const CriteriaOptions& opt = {});

// Circle maxima in z_j alone (other coordinates frozen at the anchor) at radii
// r2/l_j(z0) and r1/l_j(z0); reports the sampled sup of their ratio.
CriterionReport check_directional(const Expr& F, const LField& L, int j, double r1, double r2,
                                  const std::vector<Point>& anchors, const CriteriaOptions& opt = {});

// c* = sup max_{||J||=p+1} |F^(J)|/L^J / max_{||K||<=p} |F^(K)|/L^K. With c
// given the verdict compares against it, otherwise against the threshold.
CriterionReport check_hayman(const Expr& F, const LField& L, int p, const std::vector<Point>& anchors,
                             std::optional<double> c = std::nullopt, const CriteriaOptions& opt = {});

// 2 beta (2 beta^2 + 1) sqrt(n) / (2 beta^2 - 1)
double hayman_reference_S(double beta, int n);

struct TailOptions {
    std::vector<double> theta;            // in (0,1); default 1/2 per coordinate
    int tail_cap = 24;
};

// sum_{||K||<=N} q_K >= c (sum_{N<||K||<=cap} q_K + majorant), q_K = |F^(K)|/(K! L^K).
// The majorant for ||K|| > cap is max_{||K||<=M} q~_K * sum_{||J||>cap} Theta^J,
// with q~ taken for Theta L and M its certified local index at the sample.
CriterionReport check_tail(const Expr& F, const LField& L, int N, std::optional<double> c,
                           const std::vector<Point>& anchors, const TailOptions& tail = {},
                           const CriteriaOptions& opt = {});

// Verifies theta1 l~_j <= l_j <= theta2 l~_j on the anchors (SandwichViolated
// otherwise), then runs the Hayman check for both fields at the same p.
CriterionReport check_thm3_equiv(const Expr& F, const LField& L, const LField& Ltilde,
                                 const std::vector<double>& theta1, const std::vector<double>& theta2,
                                 const std::vector<Point>& anchors, int p, const CriteriaOptions& opt = {});

enum class BallMode { necessary, sufficient, modmax, modmax_axis };

// Ball analogues: the local maximum runs over Monte Carlo samples of the
// closed ball B^n[z0, r/Ell(z0)] (necessary, modmax) or B^n[z0, r/ell(z0)]
// (sufficient, modmax_axis).
CriterionReport check_ball_variant(const Expr& F, const LField& L, double r, const std::vector<Point>& anchors,
                                   BallMode mode, std::optional<int> n0 = std::nullopt,
                                   std::optional<double> p = std::nullopt, const CriteriaOptions& opt = {});

// The bounded-index inequality with a fixed n0 at each anchor: every normalized derivative
// in the certified table is dominated by the maximum over ||K|| <= n0.
CriterionReport check_index_cap(const Expr& F, const LField& L, int n0, const std::vector<Point>& anchors,
                                int order = 16);

}  // namespace lindex
