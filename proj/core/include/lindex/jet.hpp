#pragma once

#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "lindex/expr.hpp"
#include "lindex/multiindex.hpp"

namespace lindex {

struct JetConfig {
    int default_order = 16;
    int max_order = 64;
    // Largest certified absolute coefficient error accepted by recentering.
    double recenter_tolerance = 1e-10;
};

// Truncated Taylor expansion sum_{||K|| <= D} b_K (z - anchor)^K.
class Jet {
public:
    Jet(Point anchor, int order);

    static Jet constant(Point anchor, int order, cplx c);
    // The coordinate function z_j expanded at the anchor.
    static Jet coordinate(Point anchor, int order, int j);

    int dim() const { return table_->dim(); }
    int order() const { return table_->order(); }
    // Orders above valid_order() are present but not certified (recentering).
    int valid_order() const { return valid_order_; }
    void set_valid_order(int v) { valid_order_ = v; }

    const Point& anchor() const { return anchor_; }
    const IndexTable& table() const { return *table_; }
    std::shared_ptr<const IndexTable> table_ptr() const { return table_; }

    std::span<const cplx> coeffs() const { return coeffs_; }
    std::span<cplx> coeffs() { return coeffs_; }
    cplx coeff(std::span<const int> k) const;
    cplx& operator[](std::size_t pos) { return coeffs_[pos]; }
    const cplx& operator[](std::size_t pos) const { return coeffs_[pos]; }

    bool is_zero() const;

private:
    Point anchor_;
    std::shared_ptr<const IndexTable> table_;
    std::vector<cplx> coeffs_;
    int valid_order_;
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet scale(const Jet& a, cplx s);
Jet recip(const Jet& a);
Jet exp(const Jet& a);
Jet ipow(const Jet& a, int m);
// d/dz_j of the truncated series; the result has order D - 1.
Jet partial(const Jet& a, int j);
Jet truncate(const Jet& a, int order);

Jet jet_from_expr(const Expr& expr, const Point& anchor, int order, const JetConfig& cfg = {});

// F^{(K)}(anchor) = K! b_K.
cplx derivative_at(const Jet& jet, std::span<const int> k);

cplx jet_eval(const Jet& jet, std::span<const cplx> z);

// Radius rho of the geometric Cauchy model |b_K| <= A rho^{-||K||} used by the
// recentering tail bound: +inf when the expression has no reciprocal node,
// otherwise a root-test estimate from the top shells of a jet at the anchor.
double singularity_radius(const Expr& expr, const Point& anchor, int order = 16);

struct RecenterResult {
    Jet jet;
    int valid_order;          // D_valid
    double tail_bound_top;    // certified error bound at order D_valid
};

RecenterResult jet_recenter(const Jet& jet, const Point& new_anchor,
                            double rho = std::numeric_limits<double>::infinity(),
                            const JetConfig& cfg = {});

}  // namespace lindex
