#include "lindex/jet.hpp"

#include <algorithm>
#include <cmath>

#include "lindex/errors.hpp"

namespace lindex {

namespace {

void require_compatible(const Jet& a, const Jet& b) {
    if (a.dim() != b.dim() || a.order() != b.order())
        throw Error("jet operands differ in dimension or order");
}

// Calls f(J) for every J with 0 <= J <= K componentwise, J in lexicographic order.
template <class F>
void for_each_sub(std::span<const int> k, MultiIndex& j, F&& f) {
    const int n = static_cast<int>(k.size());
    std::fill(j.begin(), j.end(), 0);
    while (true) {
        f(j);
        int pos = n - 1;
        while (pos >= 0 && j[pos] == k[pos]) {
            j[pos] = 0;
            --pos;
        }
        if (pos < 0) return;
        ++j[pos];
    }
}

}  // namespace

Jet::Jet(Point anchor, int order)
    : anchor_(std::move(anchor)),
      table_(IndexTable::get(static_cast<int>(anchor_.size()), order)),
      coeffs_(table_->size(), cplx{}),
      valid_order_(order) {}

Jet Jet::constant(Point anchor, int order, cplx c) {
    Jet j(std::move(anchor), order);
    j.coeffs_[0] = c;
    return j;
}

Jet Jet::coordinate(Point anchor, int order, int var) {
    const cplx a = anchor.at(static_cast<std::size_t>(var));
    Jet j(std::move(anchor), order);
    j.coeffs_[0] = a;
    if (order >= 1) {
        MultiIndex e(static_cast<std::size_t>(j.dim()), 0);
        e[static_cast<std::size_t>(var)] = 1;
        j.coeffs_[j.table().rank(e)] = 1.0;
    }
    return j;
}

cplx Jet::coeff(std::span<const int> k) const {
    if (!table_->contains(k)) throw OrderExceeded("multi-index outside the jet table");
    return coeffs_[table_->rank(k)];
}

bool Jet::is_zero() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const cplx& c) { return c == cplx{}; });
}

Jet operator+(const Jet& a, const Jet& b) {
    require_compatible(a, b);
    Jet r = a;
    for (std::size_t i = 0; i < r.coeffs().size(); ++i) r[i] += b[i];
    r.set_valid_order(std::min(a.valid_order(), b.valid_order()));
    return r;
}

Jet operator-(const Jet& a, const Jet& b) {
    require_compatible(a, b);
    Jet r = a;
    for (std::size_t i = 0; i < r.coeffs().size(); ++i) r[i] -= b[i];
    r.set_valid_order(std::min(a.valid_order(), b.valid_order()));
    return r;
}

Jet operator-(const Jet& a) { return scale(a, -1.0); }

Jet scale(const Jet& a, cplx s) {
    Jet r = a;
    for (auto& c : r.coeffs()) c *= s;
    return r;
}

Jet operator*(const Jet& a, const Jet& b) {
    require_compatible(a, b);
    const IndexTable& t = a.table();
    const int n = t.dim();
    const int d = t.order();
    Jet r(a.anchor(), d);
    MultiIndex sum(static_cast<std::size_t>(n));
    for (std::size_t pa = 0; pa < t.size(); ++pa) {
        const cplx ca = a[pa];
        if (ca == cplx{}) continue;
        const auto ka = t.at(pa);
        const int budget = d - t.norm_at(pa);
        for (int s = 0; s <= budget; ++s) {
            for (std::size_t pb : t.shell(s)) {
                const cplx cb = b[pb];
                if (cb == cplx{}) continue;
                const auto kb = t.at(pb);
                for (int i = 0; i < n; ++i) sum[i] = ka[i] + kb[i];
                r[t.rank(sum)] += ca * cb;
            }
        }
    }
    r.set_valid_order(std::min(a.valid_order(), b.valid_order()));
    return r;
}

Jet recip(const Jet& a) {
    const cplx a0 = a[0];
    if (a0 == cplx{}) throw DivisionByZeroConstantTerm("reciprocal of a jet with zero constant term");
    const IndexTable& t = a.table();
    Jet r(a.anchor(), t.order());
    r[0] = 1.0 / a0;
    MultiIndex j(static_cast<std::size_t>(t.dim()));
    MultiIndex rest(static_cast<std::size_t>(t.dim()));
    for (std::size_t pk = 1; pk < t.size(); ++pk) {
        const auto k = t.at(pk);
        cplx acc{};
        for_each_sub(k, j, [&](const MultiIndex& jj) {
            if (norm(jj) == 0) return;
            const cplx aj = a[t.rank(jj)];
            if (aj == cplx{}) return;
            for (std::size_t i = 0; i < jj.size(); ++i) rest[i] = k[i] - jj[i];
            acc += aj * r[t.rank(rest)];
        });
        r[pk] = -acc / a0;
    }
    r.set_valid_order(a.valid_order());
    return r;
}

Jet exp(const Jet& a) {
    const IndexTable& t = a.table();
    Jet r(a.anchor(), t.order());
    r[0] = std::exp(a[0]);
    MultiIndex j(static_cast<std::size_t>(t.dim()));
    MultiIndex rest(static_cast<std::size_t>(t.dim()));
    for (std::size_t pk = 1; pk < t.size(); ++pk) {
        const auto k = t.at(pk);
        // Differentiate along the first coordinate with k_i > 0:
        // k_i e_K = sum_{J <= K, j_i > 0} j_i a_J e_{K-J}.
        std::size_t i = 0;
        while (k[i] == 0) ++i;
        cplx acc{};
        for_each_sub(k, j, [&](const MultiIndex& jj) {
            if (jj[i] == 0) return;
            const cplx aj = a[t.rank(jj)];
            if (aj == cplx{}) return;
            for (std::size_t q = 0; q < jj.size(); ++q) rest[q] = k[q] - jj[q];
            acc += static_cast<double>(jj[i]) * aj * r[t.rank(rest)];
        });
        r[pk] = acc / static_cast<double>(k[i]);
    }
    r.set_valid_order(a.valid_order());
    return r;
}

Jet ipow(const Jet& a, int m) {
    if (m < 0) throw DomainError("negative exponent");
    Jet r = Jet::constant(a.anchor(), a.order(), 1.0);
    for (int i = 0; i < m; ++i) r = r * a;
    if (m == 0) r.set_valid_order(a.valid_order());
    return r;
}

Jet partial(const Jet& a, int var) {
    const IndexTable& t = a.table();
    if (t.order() == 0) return Jet(a.anchor(), 0);
    Jet r(a.anchor(), t.order() - 1);
    const IndexTable& rt = r.table();
    MultiIndex up(static_cast<std::size_t>(t.dim()));
    for (std::size_t p = 0; p < rt.size(); ++p) {
        const auto k = rt.at(p);
        std::copy(k.begin(), k.end(), up.begin());
        up[static_cast<std::size_t>(var)] += 1;
        r[p] = static_cast<double>(up[static_cast<std::size_t>(var)]) * a[t.rank(up)];
    }
    r.set_valid_order(std::max(0, a.valid_order() - 1));
    return r;
}

Jet truncate(const Jet& a, int order) {
    if (order > a.order()) throw OrderExceeded("truncate to a higher order");
    Jet r(a.anchor(), order);
    const IndexTable& rt = r.table();
    for (std::size_t p = 0; p < rt.size(); ++p) r[p] = a[a.table().rank(rt.at(p))];
    r.set_valid_order(std::min(order, a.valid_order()));
    return r;
}

namespace {

Jet build(const Expr& e, const Point& anchor, int order) {
    using Op = Expr::Op;
    const auto& n = e.node();
    switch (n.op) {
        case Op::Const: return Jet::constant(anchor, order, n.value);
        case Op::Var:
            if (n.var >= static_cast<int>(anchor.size())) throw ArityError("variable beyond jet dimension");
            return Jet::coordinate(anchor, order, n.var);
        case Op::Affine: {
            if (n.var >= static_cast<int>(anchor.size())) throw ArityError("variable beyond jet dimension");
            return Jet::constant(anchor, order, n.value) + scale(Jet::coordinate(anchor, order, n.var), n.slope);
        }
        case Op::AbsVar:
        case Op::Abs:
        case Op::Norm: throw NotHolomorphic("|z| terms have no Taylor expansion: " + e.str());
        case Op::Add: return build(n.kids[0], anchor, order) + build(n.kids[1], anchor, order);
        case Op::Sub: return build(n.kids[0], anchor, order) - build(n.kids[1], anchor, order);
        case Op::Mul: return build(n.kids[0], anchor, order) * build(n.kids[1], anchor, order);
        case Op::Neg: return -build(n.kids[0], anchor, order);
        case Op::Pow: return ipow(build(n.kids[0], anchor, order), n.power);
        case Op::Recip: {
            Jet c = build(n.kids[0], anchor, order);
            if (c[0] == cplx{})
                throw DivisionByZeroConstantTerm("1/(" + n.kids[0].str() + ") vanishes at the anchor");
            return recip(c);
        }
        case Op::Exp: return exp(build(n.kids[0], anchor, order));
    }
    return Jet(anchor, order);
}

}  // namespace

Jet jet_from_expr(const Expr& expr, const Point& anchor, int order, const JetConfig& cfg) {
    if (order < 0) throw OrderOverflow("negative order");
    if (order > cfg.max_order)
        throw OrderOverflow("order " + std::to_string(order) + " exceeds cap " + std::to_string(cfg.max_order));
    if (anchor.empty()) throw ArityError("empty anchor");
    return build(expr, anchor, order);
}

cplx derivative_at(const Jet& jet, std::span<const int> k) {
    if (norm(k) > jet.order())
        throw OrderExceeded("||K|| = " + std::to_string(norm(k)) + " > jet order " + std::to_string(jet.order()));
    return factorial(k) * jet.coeff(k);
}

cplx jet_eval(const Jet& jet, std::span<const cplx> z) {
    const IndexTable& t = jet.table();
    const int n = t.dim();
    const int d = t.order();
    std::vector<std::vector<cplx>> pw(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& p = pw[static_cast<std::size_t>(i)];
        p.assign(static_cast<std::size_t>(d) + 1, 1.0);
        const cplx h = z[static_cast<std::size_t>(i)] - jet.anchor()[static_cast<std::size_t>(i)];
        for (int k = 1; k <= d; ++k) p[k] = p[k - 1] * h;
    }
    cplx sum{};
    for (std::size_t pos = 0; pos < t.size(); ++pos) {
        const cplx c = jet[pos];
        if (c == cplx{}) continue;
        const auto k = t.at(pos);
        cplx term = c;
        for (int i = 0; i < n; ++i) term *= pw[static_cast<std::size_t>(i)][static_cast<std::size_t>(k[i])];
        sum += term;
    }
    return sum;
}

double singularity_radius(const Expr& expr, const Point& anchor, int order) {
    if (!expr.has_recip()) return std::numeric_limits<double>::infinity();
    const Jet j = jet_from_expr(expr, anchor, order);
    const IndexTable& t = j.table();
    double rho = std::numeric_limits<double>::infinity();
    for (int s = std::max(1, order / 2); s <= order; ++s) {
        double m = 0.0;
        for (std::size_t p : t.shell(s)) m = std::max(m, std::abs(j[p]));
        if (m > 0.0) rho = std::min(rho, std::pow(m, -1.0 / s));
    }
    return rho;
}

namespace {

// Bound on the omitted contribution sum_{||J|| > D} |b_J| C(J, K) |h|^{J-K}
// for a coefficient of total degree m, under |b_J| <= A rho^{-||J||}.
double tail_bound(double amp, double rho, double s, int n, int d, int m) {
    if (!std::isfinite(rho) || amp == 0.0) return 0.0;
    if (s >= rho) return std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (int t = d + 1; t < d + 100000; ++t) {
        const double logterm = std::log(amp) - t * std::log(rho) + (t - m) * (s > 0 ? std::log(s) : -1e300) +
                               std::lgamma(t + n) - std::lgamma(m + n) - std::lgamma(t - m + 1);
        const double term = std::exp(logterm);
        total += term;
        if (t > d + 10 && term < 1e-18 * total) break;
    }
    return total;
}

void shift_fibers(Jet& jet, int var, cplx h) {
    if (h == cplx{}) return;
    const IndexTable& t = jet.table();
    const int d = t.order();
    MultiIndex k(static_cast<std::size_t>(t.dim()));
    std::vector<cplx> c;
    for (std::size_t base = 0; base < t.size(); ++base) {
        const auto kb = t.at(base);
        if (kb[static_cast<std::size_t>(var)] != 0) continue;
        const int budget = d - t.norm_at(base);
        std::copy(kb.begin(), kb.end(), k.begin());
        c.assign(static_cast<std::size_t>(budget) + 1, cplx{});
        std::vector<std::size_t> pos(static_cast<std::size_t>(budget) + 1);
        for (int e = 0; e <= budget; ++e) {
            k[static_cast<std::size_t>(var)] = e;
            pos[e] = t.rank(k);
            c[e] = jet[pos[e]];
        }
        // Repeated synthetic division: Taylor shift of p(x) to p(x + h).
        for (int i = 0; i < budget; ++i)
            for (int e = budget - 1; e >= i; --e) c[e] += h * c[e + 1];
        for (int e = 0; e <= budget; ++e) jet[pos[e]] = c[e];
    }
}

}  // namespace

RecenterResult jet_recenter(const Jet& jet, const Point& new_anchor, double rho, const JetConfig& cfg) {
    if (new_anchor.size() != jet.anchor().size()) throw ArityError("recenter anchor dimension mismatch");
    const IndexTable& t = jet.table();
    const int n = t.dim();
    const int d = t.order();
    Jet out(new_anchor, d);
    for (std::size_t p = 0; p < t.size(); ++p) out[p] = jet[p];

    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const cplx h = new_anchor[static_cast<std::size_t>(i)] - jet.anchor()[static_cast<std::size_t>(i)];
        s = std::max(s, std::abs(h));
        shift_fibers(out, i, h);
    }

    double amp = 0.0;
    if (std::isfinite(rho)) {
        for (int sh = std::max(0, d - 1); sh <= d; ++sh)
            for (std::size_t p : t.shell(sh)) amp = std::max(amp, std::abs(jet[p]) * std::pow(rho, sh));
    }
    int valid = -1;
    double top = 0.0;
    const int cap = std::min(d, jet.valid_order());
    for (int m = 0; m <= cap; ++m) {
        const double err = (s == 0.0) ? 0.0 : tail_bound(amp, rho, s, n, d, m);
        if (!(err <= cfg.recenter_tolerance)) break;
        valid = m;
        top = err;
    }
    if (valid < 0) throw ValidityCollapse("recentering shift too large for the certified tail bound");
    out.set_valid_order(valid);
    return {out, valid, top};
}

}  // namespace lindex
