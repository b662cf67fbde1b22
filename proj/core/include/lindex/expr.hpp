#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lindex {

using cplx = std::complex<double>;
using Point = std::vector<cplx>;

double euclid_norm(std::span<const cplx> z);

struct SourceSpan {
    int line = 0;
    int column = 0;
    int length = 0;
};

// Expression tree shared by analytic functions F (holomorphic nodes only) and
// weight components l_j (which may also use |z_j| and |z|).
class Expr {
public:
    enum class Op { Const, Var, AbsVar, Norm, Add, Sub, Mul, Neg, Pow, Recip, Exp, Affine, Abs };

    struct Node {
        Op op = Op::Const;
        cplx value{};   // Const value, Affine offset
        cplx slope{};   // Affine slope
        int var = -1;   // Var / AbsVar / Affine variable (0-based)
        int power = 0;  // Pow exponent
        std::vector<Expr> kids;
        SourceSpan span;
    };

    Expr();  // the constant 0

    static Expr constant(cplx c);
    static Expr var(int j);
    static Expr abs_var(int j);
    static Expr norm();
    static Expr affine(cplx a, cplx b, int j);  // a + b z_j
    static Expr add(Expr a, Expr b);
    static Expr sub(Expr a, Expr b);
    static Expr mul(Expr a, Expr b);
    static Expr neg(Expr a);
    static Expr pow(Expr a, int m);
    static Expr recip(Expr a);
    static Expr exp(Expr a);
    static Expr abs(Expr a);  // modulus of a subexpression (real-valued)

    Expr with_span(SourceSpan s) const;

    const Node& node() const { return *node_; }
    Op op() const { return node_->op; }

    cplx eval(std::span<const cplx> z) const;
    // Real-valued evaluation for weight components.
    double eval_real(std::span<const cplx> z) const { return eval(z).real(); }

    bool holomorphic() const;     // no |z_j| or |z| nodes
    bool has_recip() const;
    int max_var() const;          // largest variable index used, -1 if none
    int depth() const;
    bool is_zero_constant() const;
    std::string str() const;

private:
    explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    static Expr make(Node n);
    std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

// d e / d z_j with light constant folding; NotHolomorphic for |.| nodes.
Expr differentiate(const Expr& e, int j);
// F^(K) as an expression.
Expr differentiate(const Expr& e, std::span<const int> k);

// An upper bound for the total degree when e is a polynomial in z, empty otherwise.
std::optional<int> polynomial_degree(const Expr& e);

}  // namespace lindex
