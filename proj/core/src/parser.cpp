#include "lindex/parser.hpp"

#include <cctype>
#include <charconv>
#include <string>

#include "lindex/errors.hpp"

namespace lindex {

namespace {

class Parser {
public:
    Parser(std::string_view text, int n, Grammar g) : s_(text), n_(n), g_(g) {}

    Expr parse() {
        skip();
        if (at_end()) fail("empty expression");
        Expr e = expr();
        skip();
        if (!at_end()) fail(std::string("unexpected '") + s_[i_] + "'");
        return e;
    }

private:
    struct Mark {
        std::size_t pos;
        int line;
        int col;
    };

    bool at_end() const { return i_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[i_]; }
    Mark mark() const { return {i_, line_, col_}; }

    void advance() {
        if (s_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    void skip() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(s_[i_]))) advance();
    }

    [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, line_, col_); }
    [[noreturn]] void fail_at(const Mark& m, const std::string& msg) const { throw SyntaxError(msg, m.line, m.col); }

    void expect(char c) {
        skip();
        if (peek() != c) {
            if (at_end()) fail(std::string("expected '") + c + "' before the end of input");
            fail(std::string("expected '") + c + "', found '" + peek() + "'");
        }
        advance();
    }

    Expr spanned(Expr e, const Mark& m) const {
        return e.with_span({m.line, m.col, static_cast<int>(i_ - m.pos)});
    }

    Expr expr() {
        skip();
        const Mark m = mark();
        bool negate = false;
        if (peek() == '-') {
            advance();
            negate = true;
        }
        Expr lhs = term();
        if (negate) lhs = spanned(-lhs, m);
        while (true) {
            skip();
            const char c = peek();
            if (c != '+' && c != '-') break;
            advance();
            Expr rhs = term();
            lhs = spanned(c == '+' ? lhs + rhs : lhs - rhs, m);
        }
        return lhs;
    }

    Expr term() {
        skip();
        const Mark m = mark();
        Expr lhs = factor();
        while (true) {
            skip();
            if (peek() != '*') break;
            advance();
            lhs = spanned(lhs * factor(), m);
        }
        return lhs;
    }

    Expr factor() {
        skip();
        const Mark m = mark();
        Expr base = atom();
        skip();
        if (peek() == '^') {
            advance();
            skip();
            const Mark e = mark();
            const int k = uint_literal("exponent");
            if (k > 1000) fail_at(e, "exponent above 1000");
            base = spanned(Expr::pow(base, k), m);
        }
        return base;
    }

    int uint_literal(const char* what) {
        const Mark m = mark();
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
        if (i_ == m.pos) fail(std::string("expected an unsigned integer ") + what);
        int v = 0;
        const auto r = std::from_chars(s_.data() + m.pos, s_.data() + i_, v);
        if (r.ec != std::errc()) fail_at(m, std::string(what) + " out of range");
        return v;
    }

    int variable(const Mark& m) {
        const Mark d = mark();
        const int j = uint_literal("variable index");
        if (j < 1 || j > n_)
            throw ArityError("z" + std::to_string(j) + " at " + std::to_string(d.line) + ":" +
                             std::to_string(d.col) + " is outside z1..z" + std::to_string(n_));
        (void)m;
        return j - 1;
    }

    void require(Grammar g, const Mark& m, const std::string& what) const {
        if (g_ != g)
            throw DomainError(what + " at " + std::to_string(m.line) + ":" + std::to_string(m.col) +
                              (g_ == Grammar::analytic ? " is not holomorphic" : " is not a real weight"));
    }

    Expr number() {
        const Mark m = mark();
        while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) advance();
        if (peek() == 'e' || peek() == 'E') {
            const std::size_t save = i_;
            const int sl = line_, sc = col_;
            advance();
            if (peek() == '+' || peek() == '-') advance();
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
            } else {
                i_ = save;
                line_ = sl;
                col_ = sc;
            }
        }
        double v = 0.0;
        const auto r = std::from_chars(s_.data() + m.pos, s_.data() + i_, v);
        if (r.ec != std::errc() || r.ptr != s_.data() + i_) fail_at(m, "malformed number");
        return spanned(Expr::constant(v), m);
    }

    Expr atom() {
        skip();
        const Mark m = mark();
        const char c = peek();
        if (at_end()) fail("expected an operand before the end of input");
        if (c == '(') {
            advance();
            Expr e = expr();
            expect(')');
            return e;
        }
        if (c == 'z') {
            advance();
            require(Grammar::analytic, m, "z_j");
            return spanned(Expr::var(variable(m)), m);
        }
        if (c == '|') {
            advance();
            if (peek() != 'z') fail("expected 'z' after '|'");
            advance();
            if (peek() == '|') {
                advance();
                require(Grammar::weight, m, "|z|");
                return spanned(Expr::norm(), m);
            }
            const int j = variable(m);
            if (peek() != '|') fail("expected '|' closing the modulus");
            advance();
            require(Grammar::weight, m, "|z_j|");
            return spanned(Expr::abs_var(j), m);
        }
        if (s_.substr(i_, 3) == "exp") {
            for (int t = 0; t < 3; ++t) advance();
            skip();
            if (peek() != '(') fail("expected '(' after exp");
            advance();
            Expr e = expr();
            expect(')');
            return spanned(Expr::exp(e), m);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            Expr num = number();
            skip();
            if (peek() == '/') {
                if (num.node().value != cplx{1.0, 0.0}) fail("division is only written as 1/( ... )");
                advance();
                skip();
                if (peek() != '(') fail("expected '(' after '1/'");
                advance();
                Expr e = expr();
                expect(')');
                return spanned(Expr::recip(e), m);
            }
            return num;
        }
        fail(std::string("unexpected '") + c + "'");
    }

    std::string_view s_;
    int n_;
    Grammar g_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

Expr parse_expression(std::string_view text, int n, Grammar grammar) {
    if (n < 1) throw ArityError("dimension must be at least 1");
    return Parser(text, n, grammar).parse();
}

}  // namespace lindex
