#include "lindex/expr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lindex/errors.hpp"

namespace lindex {

double euclid_norm(std::span<const cplx> z) {
    double s = 0.0;
    for (const auto& v : z) s += std::norm(v);
    return std::sqrt(s);
}

Expr::Expr() : Expr(make(Node{})) {}

Expr Expr::make(Node n) { return Expr(std::make_shared<const Node>(std::move(n))); }

Expr Expr::constant(cplx c) {
    Node n;
    n.op = Op::Const;
    n.value = c;
    return make(std::move(n));
}

Expr Expr::var(int j) {
    Node n;
    n.op = Op::Var;
    n.var = j;
    return make(std::move(n));
}

Expr Expr::abs_var(int j) {
    Node n;
    n.op = Op::AbsVar;
    n.var = j;
    return make(std::move(n));
}

Expr Expr::norm() {
    Node n;
    n.op = Op::Norm;
    return make(std::move(n));
}

Expr Expr::affine(cplx a, cplx b, int j) {
    Node n;
    n.op = Op::Affine;
    n.value = a;
    n.slope = b;
    n.var = j;
    return make(std::move(n));
}

namespace {
Expr::Node binary(Expr::Op op, Expr a, Expr b) {
    Expr::Node n;
    n.op = op;
    n.kids = {std::move(a), std::move(b)};
    return n;
}
Expr::Node unary(Expr::Op op, Expr a) {
    Expr::Node n;
    n.op = op;
    n.kids = {std::move(a)};
    return n;
}
}  // namespace

Expr Expr::add(Expr a, Expr b) { return make(binary(Op::Add, std::move(a), std::move(b))); }
Expr Expr::sub(Expr a, Expr b) { return make(binary(Op::Sub, std::move(a), std::move(b))); }
Expr Expr::mul(Expr a, Expr b) { return make(binary(Op::Mul, std::move(a), std::move(b))); }
Expr Expr::neg(Expr a) { return make(unary(Op::Neg, std::move(a))); }
Expr Expr::recip(Expr a) { return make(unary(Op::Recip, std::move(a))); }
Expr Expr::exp(Expr a) { return make(unary(Op::Exp, std::move(a))); }
Expr Expr::abs(Expr a) { return make(unary(Op::Abs, std::move(a))); }

Expr Expr::pow(Expr a, int m) {
    if (m < 0) throw DomainError("negative exponent in power node");
    Node n = unary(Op::Pow, std::move(a));
    n.power = m;
    return make(std::move(n));
}

Expr Expr::with_span(SourceSpan s) const {
    Node n = *node_;
    n.span = s;
    return make(std::move(n));
}

cplx Expr::eval(std::span<const cplx> z) const {
    const Node& n = *node_;
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: return z[static_cast<std::size_t>(n.var)];
        case Op::AbsVar: return std::abs(z[static_cast<std::size_t>(n.var)]);
        case Op::Norm: return euclid_norm(z);
        case Op::Affine: return n.value + n.slope * z[static_cast<std::size_t>(n.var)];
        case Op::Add: return n.kids[0].eval(z) + n.kids[1].eval(z);
        case Op::Sub: return n.kids[0].eval(z) - n.kids[1].eval(z);
        case Op::Mul: return n.kids[0].eval(z) * n.kids[1].eval(z);
        case Op::Neg: return -n.kids[0].eval(z);
        case Op::Pow: {
            const cplx b = n.kids[0].eval(z);
            cplx r = 1.0;
            for (int i = 0; i < n.power; ++i) r *= b;
            return r;
        }
        case Op::Recip: return 1.0 / n.kids[0].eval(z);
        case Op::Exp: return std::exp(n.kids[0].eval(z));
        case Op::Abs: return std::abs(n.kids[0].eval(z));
    }
    return {};
}

bool Expr::holomorphic() const {
    if (op() == Op::AbsVar || op() == Op::Norm || op() == Op::Abs) return false;
    return std::all_of(node_->kids.begin(), node_->kids.end(), [](const Expr& e) { return e.holomorphic(); });
}

bool Expr::has_recip() const {
    if (op() == Op::Recip) return true;
    return std::any_of(node_->kids.begin(), node_->kids.end(), [](const Expr& e) { return e.has_recip(); });
}

int Expr::max_var() const {
    int m = (op() == Op::Var || op() == Op::AbsVar || op() == Op::Affine) ? node_->var : -1;
    for (const auto& k : node_->kids) m = std::max(m, k.max_var());
    return m;
}

int Expr::depth() const {
    int d = 0;
    for (const auto& k : node_->kids) d = std::max(d, k.depth());
    return d + 1;
}

bool Expr::is_zero_constant() const { return op() == Op::Const && node_->value == cplx{}; }

namespace {
void print_number(std::ostream& os, cplx c) {
    if (c.imag() == 0.0) {
        os << c.real();
    } else {
        os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
    }
}
}  // namespace

std::string Expr::str() const {
    std::ostringstream os;
    os.precision(17);
    const Node& n = *node_;
    switch (n.op) {
        case Op::Const: print_number(os, n.value); break;
        case Op::Var: os << "z" << n.var + 1; break;
        case Op::AbsVar: os << "|z" << n.var + 1 << "|"; break;
        case Op::Norm: os << "|z|"; break;
        case Op::Affine:
            os << "(";
            print_number(os, n.value);
            os << "+";
            print_number(os, n.slope);
            os << "*z" << n.var + 1 << ")";
            break;
        case Op::Add: os << "(" << n.kids[0].str() << "+" << n.kids[1].str() << ")"; break;
        case Op::Sub: os << "(" << n.kids[0].str() << "-" << n.kids[1].str() << ")"; break;
        case Op::Mul: os << "(" << n.kids[0].str() << "*" << n.kids[1].str() << ")"; break;
        case Op::Neg: os << "(0-" << n.kids[0].str() << ")"; break;
        case Op::Pow: os << "(" << n.kids[0].str() << ")^" << n.power; break;
        case Op::Recip: os << "1/(" << n.kids[0].str() << ")"; break;
        case Op::Exp: os << "exp(" << n.kids[0].str() << ")"; break;
        case Op::Abs: os << "|" << n.kids[0].str() << "|"; break;
    }
    return os.str();
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::add(a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::sub(a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::mul(a, b); }
Expr operator-(const Expr& a) { return Expr::neg(a); }


namespace {

bool is_constant(const Expr& e, cplx v) { return e.op() == Expr::Op::Const && e.node().value == v; }

Expr fold_add(const Expr& a, const Expr& b) {
    if (is_constant(a, 0.0)) return b;
    if (is_constant(b, 0.0)) return a;
    return a + b;
}

Expr fold_mul(const Expr& a, const Expr& b) {
    if (is_constant(a, 0.0) || is_constant(b, 0.0)) return Expr::constant(0.0);
    if (is_constant(a, 1.0)) return b;
    if (is_constant(b, 1.0)) return a;
    return a * b;
}

}  // namespace

Expr differentiate(const Expr& e, int j) {
    using Op = Expr::Op;
    const auto& n = e.node();
    switch (n.op) {
        case Op::Const: return Expr::constant(0.0);
        case Op::Var: return Expr::constant(n.var == j ? 1.0 : 0.0);
        case Op::Affine: return Expr::constant(n.var == j ? n.slope : cplx{});
        case Op::Add: return fold_add(differentiate(n.kids[0], j), differentiate(n.kids[1], j));
        case Op::Sub: {
            const Expr a = differentiate(n.kids[0], j), b = differentiate(n.kids[1], j);
            if (is_constant(b, 0.0)) return a;
            return is_constant(a, 0.0) ? -b : a - b;
        }
        case Op::Mul:
            return fold_add(fold_mul(differentiate(n.kids[0], j), n.kids[1]),
                            fold_mul(n.kids[0], differentiate(n.kids[1], j)));
        case Op::Neg: {
            const Expr a = differentiate(n.kids[0], j);
            return is_constant(a, 0.0) ? a : -a;
        }
        case Op::Pow: {
            if (n.power == 0) return Expr::constant(0.0);
            const Expr base = n.power == 1 ? Expr::constant(1.0) : Expr::pow(n.kids[0], n.power - 1);
            return fold_mul(fold_mul(Expr::constant(static_cast<double>(n.power)), base), differentiate(n.kids[0], j));
        }
        case Op::Recip: {
            const Expr du = differentiate(n.kids[0], j);
            if (is_constant(du, 0.0)) return du;
            return -(du * Expr::pow(e, 2));
        }
        case Op::Exp: return fold_mul(e, differentiate(n.kids[0], j));
        default: throw NotHolomorphic("cannot differentiate " + e.str() + " in z");
    }
}

Expr differentiate(const Expr& e, std::span<const int> k) {
    Expr out = e;
    for (std::size_t j = 0; j < k.size(); ++j)
        for (int t = 0; t < k[j]; ++t) out = differentiate(out, static_cast<int>(j));
    return out;
}

std::optional<int> polynomial_degree(const Expr& e) {
    using Op = Expr::Op;
    const auto& n = e.node();
    auto kid = [&](std::size_t i) { return polynomial_degree(n.kids[i]); };
    switch (n.op) {
        case Op::Const: return 0;
        case Op::Var: return 1;
        case Op::Affine: return n.slope == cplx{} ? 0 : 1;
        case Op::Add:
        case Op::Sub: {
            const auto a = kid(0), b = kid(1);
            if (!a || !b) return std::nullopt;
            return std::max(*a, *b);
        }
        case Op::Mul: {
            const auto a = kid(0), b = kid(1);
            if (!a || !b) return std::nullopt;
            return *a + *b;
        }
        case Op::Neg: return kid(0);
        case Op::Pow: {
            const auto a = kid(0);
            if (!a) return std::nullopt;
            return *a * n.power;
        }
        case Op::Recip:
        case Op::Exp: {
            const auto a = kid(0);
            if (a && *a == 0) return 0;
            return std::nullopt;
        }
        default: return std::nullopt;
    }
}

}  // namespace lindex
