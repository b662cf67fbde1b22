#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "lindex/criteria.hpp"
#include "lindex/expr.hpp"
#include "lindex/growth.hpp"
#include "lindex/lfield.hpp"
#include "lindex/multiindex.hpp"
#include "lindex/report.hpp"

namespace lindex {

// Equation j of the system:
//   G_lead F^(p e_j) + sum_S G_S F^(S) = H,   ||S|| <= p - 1.
struct PDEEquation {
    int p = 1;
    Expr lead;
    std::vector<std::pair<MultiIndex, Expr>> lower;
    std::optional<Expr> rhs;   // empty means H = 0

    bool homogeneous() const;
};

struct PDESystem {
    int n = 1;
    std::vector<PDEEquation> equations;   // one per coordinate

    // Throws DomainError when the index sets are malformed.
    void validate() const;
    bool homogeneous() const;
    int order_sum() const;                // sum_j p_j
};

// The I-shell the derivative bounds are estimated for:
// inhomogeneous ||I|| = 1 - p_j + sum p_k, homogeneous ||I|| = sum p_k - p_j.
enum class ShellKind { inhomogeneous, homogeneous };

int shell_norm(const PDESystem& sys, int j, ShellKind kind);

struct EquationBounds {
    int shell = 0;
    std::map<std::pair<MultiIndex, MultiIndex>, double> B;   // (S, M)
    std::map<MultiIndex, double> B_lead;                     // M != 0
    std::map<MultiIndex, double> D;                          // I on the shell
    bool rhs_zero = false;
};

struct CoeffBounds {
    int n = 1;
    ShellKind shell = ShellKind::inhomogeneous;
    std::vector<EquationBounds> equations;
    std::size_t samples_used = 0;
    std::size_t samples_excluded = 0;     // points inside the polydisc D(0, R')
};

// Halton points of the ball |z| <= radius that lie outside D^n(0, R').
std::vector<Point> pde_region(int n, std::size_t count, double radius = 0.9, double r_prime = 0.1,
                              std::uint64_t seed = 0);

// Sampled suprema of
//   |G_S^(M)| / (L^{p e_j - S + M} |G_lead|),   |G_lead^(M)| / (L^M |G_lead|),
//   |H^(I)| / (L^I |H|)
// over the region points outside D^n(0, R'), for 0 <= M <= I on the shell.
// D is identically zero for an equation with H = 0. Throws LeadVanishes when
// the lead coefficient vanishes at a sample and ZeroH when a nonzero H does.
CoeffBounds estimate_coeff_bounds(const PDESystem& sys, const LField& L, const std::vector<Point>& region,
                                  ShellKind shell, double r_prime = 0.1);

enum class CVariant { thm22, thm23, thm24, thm25, cor5 };

const char* to_string(CVariant v);
ShellKind shell_of(CVariant v);
// Order of the Hayman inequality the constant belongs to.
int hayman_order(const PDESystem& sys, CVariant v);

struct CFormOptions {
    // The factorial form's D term weights lower coefficients by (p e_j - S)!
    // as printed; the derivation gives S!. The printed weight is used when set.
    bool printed_lower_factorial = false;
};

// Closed-form constants. Missing entries for a required (S, M), M or I raise
// MissingBound; lower coefficients absent from the system contribute nothing.
double compute_c(const PDESystem& sys, const CoeffBounds& bounds, CVariant v, const CFormOptions& opt = {});

// The sum form of the inhomogeneous constant on an arbitrary shell, with or
// without the D term. compute_c(thm22) and compute_c(thm23) are instances.
double c_sum_form(const PDESystem& sys, const CoeffBounds& bounds, ShellKind shell, bool with_D);

struct VerifyOptions {
    std::optional<CVariant> variant;      // thm23 for homogeneous systems, thm22 otherwise
    std::optional<double> c;              // overrides the computed constant
    double r_prime = 0.1;
    double residual_tol = 1e-8;
    bool run_growth = true;
    std::vector<Radii> growth_sequence;   // diagonal toward |R| = 0.95 when empty
    CriteriaOptions criteria;
    GrowthRatioOptions growth;
    CFormOptions form;
};

struct PDEVerification {
    CriterionReport report;               // combined verdict
    CoeffBounds bounds;
    double c = 0.0;
    CVariant variant = CVariant::thm22;
    double residual_max = 0.0;
    CriterionReport hayman;
    std::optional<GrowthCurve> growth;
};

// Residual of every equation at the samples (ResidualFailure above the
// tolerance), then the Hayman inequality with the constant c, then the growth
// ratio against c (sum form) or c(p+1) (factorial form).
PDEVerification verify_solution(const Expr& F, const PDESystem& sys, const LField& L,
                                const std::vector<Point>& region, const VerifyOptions& opt = {});

// Largest relative residual over the samples; independent of any weight.
double max_residual(const Expr& F, const PDESystem& sys, const std::vector<Point>& region,
                    Point* worst = nullptr);

}  // namespace lindex
