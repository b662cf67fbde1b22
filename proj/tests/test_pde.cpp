#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lindex/errors.hpp"
#include "lindex/pde.hpp"

using namespace lindex;

namespace {

Expr z(int j) { return Expr::var(j); }
Expr k(double c) { return Expr::constant(c); }

// f' - (1-z)^-2 f = 0, solved by exp(1/(1-z)).
PDESystem exp_pole_system() {
    PDESystem s;
    s.n = 1;
    PDEEquation e;
    e.p = 1;
    e.lead = k(1);
    e.lower = {{{0}, -Expr::pow(Expr::recip(k(1) - z(0)), 2)}};
    s.equations = {e};
    return s;
}
Expr exp_pole() { return Expr::exp(Expr::recip(k(1) - z(0))); }
LField pole_weight() {
    const Expr d = k(1) - Expr::norm();
    return LField(1.5, {k(2) * Expr::recip(d * d)});
}

// dF/dz1 - z2 F = 0, dF/dz2 - z1 F = 0, solved by exp(z1 z2).
PDESystem exp_product_system() {
    PDESystem s;
    s.n = 2;
    PDEEquation a, b;
    a.lead = k(1);
    a.lower = {{{0, 0}, -z(1)}};
    b.lead = k(1);
    b.lower = {{{0, 0}, -z(0)}};
    s.equations = {a, b};
    return s;
}
LField product_weight() { return LField(1.5, {Expr::abs_var(1) + k(1), Expr::abs_var(0) + k(1)}); }

// The one-variable instance with D = 1, B_{0,0} = 0.5, B_{0,1} = 0.5, B_{1,1} = 0.2.
PDESystem cor5_system() {
    PDESystem s = exp_pole_system();
    s.equations[0].rhs = k(1) + z(0);
    return s;
}
CoeffBounds cor5_bounds(double D = 1.0) {
    CoeffBounds b;
    b.n = 1;
    EquationBounds e;
    e.shell = 1;
    e.B[{{0}, {0}}] = 0.5;
    e.B[{{0}, {1}}] = 0.5;
    e.B_lead[{1}] = 0.2;
    e.D[{1}] = D;
    b.equations = {e};
    return b;
}

}  // namespace

TEST_CASE("system validation and shells") {
    auto s = exp_product_system();
    CHECK_NOTHROW(s.validate());
    CHECK(s.homogeneous());
    CHECK(s.order_sum() == 2);
    CHECK(shell_norm(s, 0, ShellKind::inhomogeneous) == 2);
    CHECK(shell_norm(s, 0, ShellKind::homogeneous) == 1);
    CHECK(hayman_order(s, CVariant::thm22) == 2);
    CHECK(hayman_order(s, CVariant::thm23) == 1);
    CHECK(hayman_order(s, CVariant::thm25) == 1);

    auto bad = s;
    bad.equations[0].lower.push_back({{1, 0}, k(1)});
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = s;
    bad.equations[0].lower.push_back({{0, 0}, k(1)});
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = s;
    bad.equations.pop_back();
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = s;
    bad.equations[1].p = 0;
    CHECK_THROWS_AS(bad.validate(), DomainError);

    CHECK(multinomial(MultiIndex{3, 2}, MultiIndex{1, 1}) == 6.0);
    CHECK(multinomial(MultiIndex{4}, MultiIndex{2}) == 6.0);
}

TEST_CASE("region outside the small polydisc") {
    const auto pts = pde_region(2, 300, 0.9, 0.1, 7);
    REQUIRE(pts.size() == 300);
    for (const auto& p : pts) {
        CHECK(euclid_norm(p) <= 0.9 + 1e-15);
        CHECK(std::max(std::abs(p[0]), std::abs(p[1])) >= 0.1);
    }
    CHECK(pde_region(2, 300, 0.9, 0.1, 7) == pts);
}

TEST_CASE("one-variable constant arithmetic") {
    const auto s = cor5_system();
    const auto b = cor5_bounds();
    CHECK(compute_c(s, b, CVariant::cor5) == doctest::Approx(2.7).epsilon(1e-15));
    // The sum form restricted to n = 1 is the same constant.
    CHECK(compute_c(s, b, CVariant::thm22) == doctest::Approx(2.7).epsilon(1e-15));
    // Factorial form with B = 0.5: D(1/2 + B/2) + B/2 + B(1/2 + 1/2) = 1.5.
    const double c24 = compute_c(s, b, CVariant::thm24);
    CHECK(c24 == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(c24 <= compute_c(s, b, CVariant::thm22));
    CFormOptions printed;
    printed.printed_lower_factorial = true;
    CHECK(compute_c(s, b, CVariant::thm24, printed) == doctest::Approx(1.5).epsilon(1e-15));

    SUBCASE("affine in D") {
        const double c1 = compute_c(s, cor5_bounds(1.0), CVariant::thm22);
        const double c2 = compute_c(s, cor5_bounds(2.0), CVariant::thm22);
        const double c0 = compute_c(s, cor5_bounds(0.0), CVariant::thm22);
        CHECK(c2 <= 2.0 * c1);
        CHECK(c2 - c1 == doctest::Approx(c1 - c0).epsilon(1e-14));
        CHECK(c1 - c0 == doctest::Approx(1.5).epsilon(1e-14));
    }
    SUBCASE("missing entries") {
        auto partial = b;
        partial.equations[0].B.erase({{0}, {1}});
        CHECK_THROWS_AS(compute_c(s, partial, CVariant::thm22), MissingBound);
        CHECK_THROWS_AS(compute_c(s, partial, CVariant::cor5), MissingBound);
        auto no_d = b;
        no_d.equations[0].D.clear();
        CHECK_THROWS_AS(compute_c(s, no_d, CVariant::thm22), MissingBound);
        CHECK_NOTHROW(compute_c(s, no_d, CVariant::thm23));
    }
    SUBCASE("cor5 needs one variable") {
        const auto s2 = exp_product_system();
        const auto b2 = estimate_coeff_bounds(s2, product_weight(), pde_region(2, 50), ShellKind::inhomogeneous);
        CHECK_THROWS_AS(compute_c(s2, b2, CVariant::cor5), DomainError);
    }
}

TEST_CASE("constant coefficients") {
    PDESystem s;
    s.n = 2;
    PDEEquation e;
    e.lead = k(1);
    s.equations = {e, e};
    const LField L(1.5, {k(2), k(3)});
    const auto b = estimate_coeff_bounds(s, L, pde_region(2, 100), ShellKind::inhomogeneous);
    for (const auto& eb : b.equations) {
        CHECK(eb.B.empty());
        CHECK(eb.rhs_zero);
        for (const auto& [M, v] : eb.B_lead) CHECK(v == 0.0);
        for (const auto& [I, v] : eb.D) CHECK(v == 0.0);
    }
    CHECK(compute_c(s, b, CVariant::thm22) == 0.0);
    CHECK(compute_c(s, b, CVariant::thm23) == 0.0);
    CHECK(compute_c(s, b, CVariant::thm25) == 0.0);

    // A hand-set lead bound at M = 0 enters no sum.
    auto manual = b;
    manual.equations[0].B_lead[{0, 0}] = 1.0;
    CHECK(compute_c(s, manual, CVariant::thm23) == 0.0);
}

TEST_CASE("lower coefficient equal to the lead with L >= 1") {
    PDESystem s;
    s.n = 1;
    PDEEquation e;
    e.p = 2;
    e.lead = k(1) + k(0.5) * z(0);
    e.lower = {{{0}, e.lead}, {{1}, e.lead}};
    s.equations = {e};
    const LField L(1.5, {k(1.5) + Expr::abs_var(0)});
    const auto b = estimate_coeff_bounds(s, L, pde_region(1, 500), ShellKind::inhomogeneous);
    CHECK(b.equations[0].B.at({{0}, {0}}) <= 1.0);
    CHECK(b.equations[0].B.at({{1}, {0}}) <= 1.0);
    CHECK(b.equations[0].B.at({{1}, {0}}) > 0.0);
}

TEST_CASE("coefficient bounds for the pole system against a direct oracle") {
    const auto s = exp_pole_system();
    const auto pts = pde_region(1, 10000, 0.9, 0.1, 3);
    const auto b = estimate_coeff_bounds(s, pole_weight(), pts, ShellKind::inhomogeneous);
    double b00 = 0.0, b01 = 0.0;
    for (const auto& p : pts) {
        const double r = std::abs(p[0]);
        const double d = std::abs(1.0 - p[0]);
        b00 = std::max(b00, (1 - r) * (1 - r) / (2 * d * d));
        b01 = std::max(b01, std::pow(1 - r, 4) / (2 * d * d * d));
    }
    const auto& eb = b.equations[0];
    CHECK(eb.B.at({{0}, {0}}) == doctest::Approx(b00).epsilon(1e-12));
    CHECK(eb.B.at({{0}, {1}}) == doctest::Approx(b01).epsilon(1e-12));
    CHECK(eb.B.at({{0}, {0}}) <= 0.5);
    CHECK(eb.B_lead.at({1}) == 0.0);
    CHECK(eb.rhs_zero);
    CHECK(compute_c(s, b, CVariant::cor5) == doctest::Approx(b00 + b01).epsilon(1e-12));
    CHECK(compute_c(s, b, CVariant::thm22) == doctest::Approx(compute_c(s, b, CVariant::cor5)).epsilon(1e-14));
}

TEST_CASE("homogeneous constant is the sum form on the shifted shell") {
    const auto s = exp_product_system();
    const auto pts = pde_region(2, 400, 0.9, 0.1, 11);
    const auto b = estimate_coeff_bounds(s, product_weight(), pts, ShellKind::homogeneous);
    const double c23 = compute_c(s, b, CVariant::thm23);
    CHECK(c23 == c_sum_form(s, b, ShellKind::homogeneous, true));
    CHECK_THROWS_AS(compute_c(s, b, CVariant::thm22), MissingBound);

    // c = max_j (sup |z_k|/(|z_k|+1) + sup 1/((|z1|+1)(|z2|+1))).
    double a0 = 0.0, a1 = 0.0, m = 0.0;
    for (const auto& p : pts) {
        const double r0 = std::abs(p[0]), r1 = std::abs(p[1]);
        a0 = std::max(a0, r1 / (r1 + 1));
        a1 = std::max(a1, r0 / (r0 + 1));
        m = std::max(m, 1.0 / ((r0 + 1) * (r1 + 1)));
    }
    CHECK(c23 == doctest::Approx(std::max(a0, a1) + m).epsilon(1e-12));

    const auto bi = estimate_coeff_bounds(s, product_weight(), pts, ShellKind::inhomogeneous);
    CHECK(compute_c(s, bi, CVariant::thm23) == doctest::Approx(c23).epsilon(1e-15));
}

TEST_CASE("residual") {
    const auto pts = pde_region(2, 200, 0.9, 0.1, 5);
    const auto s = exp_product_system();
    const Expr F = Expr::exp(z(0) * z(1));
    CHECK(max_residual(F, s, pts) < 1e-12);
    CHECK(max_residual(Expr::exp(z(0) + z(1)), s, pts) > 0.1);
    CHECK(max_residual(Expr(), s, pts) == 0.0);

    VerifyOptions opt;
    opt.run_growth = false;
    const auto a = verify_solution(F, s, product_weight(), pts, opt);
    const auto b = verify_solution(F, s, LField(2.0, {k(3) + Expr::abs_var(1), k(2) + Expr::abs_var(0)}), pts, opt);
    CHECK(a.residual_max == b.residual_max);
    CHECK_THROWS_AS(verify_solution(Expr::exp(z(0)), s, product_weight(), pts, opt), ResidualFailure);
}

TEST_CASE("one-variable solution with a boundary pole") {
    const auto s = exp_pole_system();
    const auto pts = pde_region(1, 200, 0.9, 0.1, 1);
    VerifyOptions opt;
    opt.variant = CVariant::cor5;
    const auto v = verify_solution(exp_pole(), s, pole_weight(), pts, opt);
    CHECK(v.residual_max < 1e-8);
    CHECK(std::isfinite(v.bounds.equations[0].B.at({{0}, {0}})));
    CHECK(std::isfinite(v.bounds.equations[0].B.at({{0}, {1}})));
    CHECK(v.c > 0.0);
    CHECK(v.c <= 1.0);
    CHECK(v.hayman.constants.at("p") == 1);
    CHECK(v.hayman.passed());
    CHECK(v.hayman.constants.at("c_star") <= v.c);
    REQUIRE(v.growth);
    CHECK(v.growth->report.passed());
    CHECK(v.report.passed());
}

TEST_CASE("entire product solution") {
    const auto s = exp_product_system();
    const auto pts = pde_region(2, 200, 0.9, 0.1, 2);
    VerifyOptions opt;
    opt.growth.skeleton.require_inside_ball = false;
    const auto v = verify_solution(Expr::exp(z(0) * z(1)), s, product_weight(), pts, opt);
    CHECK(v.variant == CVariant::thm23);
    CHECK(v.residual_max < 1e-12);
    CHECK(v.hayman.passed());
    REQUIRE(v.growth);
    CHECK(v.growth->limsup <= v.growth->cap);
    // ln M = r^2 against the ray integral 2(r^2/2 + r): the ratio is r/(r+2).
    const double r = v.growth->radii.back()[0];
    CHECK(v.growth->ratio.back() == doctest::Approx(r / (r + 2)).epsilon(1e-6));
    CHECK(v.report.passed());

    SUBCASE("factorial form") {
        VerifyOptions f = opt;
        f.variant = CVariant::thm25;
        f.run_growth = false;
        const auto w = verify_solution(Expr::exp(z(0) * z(1)), s, product_weight(), pts, f);
        CHECK(w.hayman.check == "hayman_factorial");
        CHECK(w.hayman.passed());
    }
}

TEST_CASE("zero solution of a homogeneous system") {
    const auto s = exp_product_system();
    const auto v = verify_solution(Expr(), s, product_weight(), pde_region(2, 100));
    CHECK(v.residual_max == 0.0);
    CHECK(v.hayman.passed());
    CHECK(!v.growth);
    CHECK(v.report.passed());
}

TEST_CASE("vanishing coefficients") {
    std::vector<Point> pts = pde_region(1, 50);
    pts.push_back({cplx{0.5, 0.0}});
    SUBCASE("lead") {
        auto s = exp_pole_system();
        s.equations[0].lead = z(0) - k(0.5);
        CHECK_THROWS_AS(estimate_coeff_bounds(s, pole_weight(), pts, ShellKind::inhomogeneous), LeadVanishes);
    }
    SUBCASE("right side") {
        auto s = exp_pole_system();
        s.equations[0].rhs = z(0) - k(0.5);
        CHECK_THROWS_AS(estimate_coeff_bounds(s, pole_weight(), pts, ShellKind::inhomogeneous), ZeroH);
    }
    SUBCASE("excluded polydisc") {
        auto s = exp_pole_system();
        s.equations[0].lead = z(0) - k(0.05);
        pts.back() = {cplx{0.05, 0.0}};
        const auto b = estimate_coeff_bounds(s, pole_weight(), pts, ShellKind::inhomogeneous, 0.1);
        CHECK(b.samples_excluded == 1);
    }
}
