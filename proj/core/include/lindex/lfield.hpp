#pragma once

#include <cstdint>
#include <vector>

#include "lindex/expr.hpp"
#include "lindex/report.hpp"
#include "lindex/sampling.hpp"

namespace lindex {

// The weight L = (l_1, ..., l_n) together with the cone constant beta.
class LField {
public:
    // Throws InvalidBeta unless beta > sqrt(n).
    LField(double beta, std::vector<Expr> components);

    int dim() const { return static_cast<int>(comps_.size()); }
    double beta() const { return beta_; }
    const std::vector<Expr>& components() const { return comps_; }

    double operator()(int j, std::span<const cplx> z) const { return comps_[static_cast<std::size_t>(j)].eval_real(z); }
    std::vector<double> eval(std::span<const cplx> z) const;
    double ell(std::span<const cplx> z) const;   // min_j l_j
    double Ell(std::span<const cplx> z) const;   // max_j l_j

    LField scaled(double factor) const;
    LField with_beta(double beta) const { return LField(beta, comps_); }

private:
    double beta_;
    std::vector<Expr> comps_;
};

// L^K(z) in log form: sum_j k_j ln l_j(z).
double log_weight_power(const std::vector<double>& l, std::span<const int> k);

CriterionReport check_cone_condition(const LField& L, const std::vector<Point>& grid);

enum class LocalShape { polydisc, ball };

struct LocalSampling {
    LocalShape shape = LocalShape::polydisc;
    std::size_t interior = 256;   // Halton points inside the local region
    int skeleton_angles = 8;      // per-coordinate angles on the distinguished boundary (polydisc)
    std::size_t sphere = 256;     // boundary points (ball)
    std::uint64_t seed = kDefaultMonteCarloSeed;
    bool skip_escaping = false;   // count anchors whose region leaves the ball instead of throwing
    // When non-empty, the local set is the union of the sets for s*R, s in scales;
    // this makes the samples for a larger R a superset of those for a smaller one.
    std::vector<double> scales;
};

// Points of D^n[z0, R/L(z0)] (polydisc) or B^n[z0, r/ell(z0)] (ball, r = R[0]),
// always including z0 itself.
std::vector<Point> local_points(const LField& L, const Point& z0, const std::vector<double>& R,
                                const LocalSampling& spec);

// Radii of the local region around z0 (polydisc) or its Euclidean radius (ball).
std::vector<double> local_radii(const LField& L, const Point& z0, const std::vector<double>& R, LocalShape shape);

struct LambdaBounds {
    std::vector<double> R;
    std::vector<double> lambda1;
    std::vector<double> lambda2;
    std::size_t anchors_used = 0;
    std::size_t anchors_skipped = 0;
    std::size_t points_used = 0;
    std::vector<Point> witness_min;  // per component
    std::vector<Point> witness_max;
};

// Inner estimates of lambda_{1,j}, lambda_{2,j}: sampled lambda1 >= true,
// sampled lambda2 <= true.
LambdaBounds estimate_lambda(const LField& L, const std::vector<double>& R, const std::vector<Point>& anchors,
                             const LocalSampling& local = {});

CriterionReport check_Q_membership(const LField& L, const std::vector<std::vector<double>>& R_grid,
                                   const std::vector<Point>& anchors, const LocalSampling& local = {},
                                   double threshold = kDefaultThreshold);

// Sampled constant of the rotation class: sup over |R| < 1, angles and j of
// l_j(R e^{i Theta2}) / l_j(R e^{i Theta1}).
CriterionReport check_K_membership(const LField& L, const std::vector<std::vector<double>>& radial_grid,
                                   int angles_per_dim, double threshold = kDefaultThreshold);

// Differential test for L* = (c + |l_1|, ..., c + |l_n|) built from complex
// components: P = sup |d l_j / d z_m| / (c + |l_j|) and the brackets
// exp(+-(P/c) sum r_j), cross-checked against estimate_lambda on L*.
CriterionReport check_theorem13(const std::vector<Expr>& raw, double c, const std::vector<Point>& grid,
                                const std::vector<double>& R, const std::vector<Point>& anchors,
                                const LocalSampling& local = {});

LField theorem13_field(const std::vector<Expr>& raw, double c, double beta);

}  // namespace lindex
