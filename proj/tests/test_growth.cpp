#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "lindex/errors.hpp"
#include "lindex/growth.hpp"

using namespace lindex;

namespace {

Expr z(int j) { return Expr::var(j); }
Expr k(double c) { return Expr::constant(c); }
Expr one_minus_norm() { return k(1) - Expr::norm(); }

LField sharpness_field() { return LField(1.5, {Expr::abs_var(1) + k(1), Expr::abs_var(0) + k(1)}); }
LField radial(int n, double beta, double factor = 1.0) {
    return LField(beta, std::vector<Expr>(static_cast<std::size_t>(n), k(factor * beta) * Expr::recip(one_minus_norm())));
}

double trapezoid(const std::function<double(double)>& f, double a, double b, int panels) {
    const double h = (b - a) / panels;
    double s = 0.5 * (f(a) + f(b));
    for (int i = 1; i < panels; ++i) s += f(a + i * h);
    return s * h;
}

}  // namespace

TEST_CASE("adaptive Simpson") {
    CHECK(adaptive_simpson([](double x) { return std::pow(x, 4); }, 0.0, 1.0).value == doctest::Approx(0.2).epsilon(1e-13));
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi).value ==
          doctest::Approx(2.0).epsilon(1e-10));
    const auto q = adaptive_simpson([](double x) { return 1.0 / (1.0 - x); }, 0.0, 0.999);
    CHECK(q.converged);
    CHECK(std::abs(q.value + std::log(0.001)) < 1e-9);
    QuadratureOptions tight;
    tight.tol = 1e-15;
    tight.max_panels = 16;
    CHECK(!adaptive_simpson([](double x) { return std::sqrt(x); }, 0.0, 1.0, tight).converged);
    CHECK_THROWS_AS(adaptive_simpson([](double) { return std::nan(""); }, 0.0, 1.0), IntegrandSingularity);
}

TEST_CASE("growth integral") {
    SUBCASE("n = 1, beta/(1-|z|): -beta ln(1-r)") {
        const auto g = growth_integral(radial(1, 2.0), {0.5}, {0.3}, {0.25}, {0});
        CHECK(g.value == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-10));
        CHECK(std::abs(g.value - 1.3862943611198906) < 1e-9);
    }
    SUBCASE("constant weights give sum c r_j") {
        const LField L(1.5, {k(3), k(3)});
        for (const std::vector<int>& sigma : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
            const auto g = growth_integral(L, {0.4, 0.2}, {1.0, -2.0}, {0.1, 0.1}, sigma);
            CHECK(g.value == doctest::Approx(3 * 0.6).epsilon(1e-14));
        }
    }
    SUBCASE("sharpness field against a trapezoid oracle") {
        const LField L = sharpness_field();
        for (double r : {0.2, 0.5, 0.7}) {
            const Radii R{r, r}, R0{r / 2, r / 2};
            const auto g = growth_integral(L, R, {0.0, 0.0}, R0, {0, 1});
            // j = 1 runs with z2 at r, j = 2 with z1 at r0_1.
            const double o1 = trapezoid([&](double t) { return L(0, Point{t, r}); }, 0.0, r, 100000);
            const double o2 = trapezoid([&](double t) { return L(1, Point{r / 2, t}); }, 0.0, r, 100000);
            CHECK(std::abs(g.value - (o1 + o2)) < 1e-7);
            CHECK(g.value == doctest::Approx(r * (r + 1) + r * (r / 2 + 1)).epsilon(1e-12));
        }
    }
    SUBCASE("telescoping identity for a gradient field") {
        // l_1 = l_2 = |z1| + |z2| + 1 is the gradient of (r1 + r2)^2/2 + r1 + r2.
        const Expr l = Expr::abs_var(0) + Expr::abs_var(1) + k(1);
        const LField L(1.5, {l, l});
        auto phi = [](const Radii& R) { return std::pow(R[0] + R[1], 2) / 2 + R[0] + R[1]; };
        const Radii R{0.5, 0.6}, R0{0.1, 0.3};
        for (const std::vector<int>& sigma : {std::vector<int>{0, 1}, std::vector<int>{1, 0}}) {
            const auto g = growth_integral(L, R, {0.7, 2.1}, R0, sigma, R0);
            CHECK(std::abs(g.value - (phi(R) - phi(R0))) < 1e-9);
            CHECK(g.per_coordinate.size() == 2);
        }
    }
    SUBCASE("minimum over angles and permutations") {
        const Expr l1 = Expr::abs(k(1) + z(0) * k(0.5)) + k(1);
        const LField L(1.5, {l1, Expr::abs_var(0) + k(1)});
        const auto m = growth_integral_min(L, {0.4, 0.4}, std::nullopt, theta_grid(2, 8));
        CHECK(m.evaluations == 64 * 2);
        // |1 + z1/2| is smallest at theta_1 = pi.
        CHECK(m.theta[0] == doctest::Approx(std::numbers::pi));
        for (const auto& th : theta_grid(2, 8))
            for (const std::vector<int>& s : {std::vector<int>{0, 1}, std::vector<int>{1, 0}})
                CHECK(m.value <= growth_integral(L, {0.4, 0.4}, th, {0.2, 0.2}, s).value + 1e-15);
    }
    SUBCASE("preconditions") {
        const LField L(1.5, {k(1), k(1)});
        CHECK_THROWS_AS(growth_integral(L, {0.8, 0.8}, {0, 0}, {0, 0}, {0, 1}), DomainError);
        CHECK_THROWS_AS(growth_integral(L, {0.5, 0.5}, {0, 0}, {0, 0}, {0, 0}), DomainError);
        const LField bad(1.5, {Expr::recip(k(0.5) - Expr::abs_var(0)), k(1)});
        CHECK_THROWS_AS(growth_integral(bad, {0.6, 0.1}, {0, 0}, {0, 0}, {0, 1}), IntegrandSingularity);
    }
    CHECK(default_theta_grid(2).size() == 1024);
    CHECK(default_theta_grid(3).size() == 4096);
    CHECK(default_theta_grid(4).size() == 4096);
}

TEST_CASE("divergence along radii") {
    const auto seq = diagonal_radii(2, 0.1, 0.7, 10);
    SUBCASE("the cone weight meets its envelope") {
        const auto c = lemma4_divergence(radial(2, 1.5), seq, theta_grid(2, 4));
        for (std::size_t t = 0; t < seq.size(); ++t) CHECK(std::abs(c.lhs[t] - c.rhs[t]) < 1e-7);
        CHECK(c.report.verdict == Verdict::pass);
        CHECK(c.report.constants.at("strictly_increasing") == 1.0);
    }
    SUBCASE("doubling the weight doubles the integral") {
        const auto c = lemma4_divergence(radial(2, 1.5, 2.0), seq, theta_grid(2, 4));
        for (std::size_t t = 0; t < seq.size(); ++t) CHECK(c.ratio[t] == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("constant weight is rejected") {
        CHECK_THROWS_AS(lemma4_divergence(LField(1.5, {k(3), k(3)}), seq, theta_grid(2, 2)), InadmissibleL);
    }
    SUBCASE("CSV export") {
        const auto c = lemma4_divergence(radial(1, 2.0), diagonal_radii(1, 0.5, 0.9, 3), theta_grid(1, 1));
        std::ostringstream os;
        c.write_csv(os);
        const std::string s = os.str();
        CHECK(s.rfind("|R|,lhs,rhs,ratio\n", 0) == 0);
        CHECK(std::count(s.begin(), s.end(), '\n') == 4);
    }
    CHECK_THROWS_AS(lemma4_divergence(radial(1, 2.0), {{0.5}, {0.4}}), DomainError);
}

TEST_CASE("derivative bound along a ray") {
    SUBCASE("constant, N = 0") {
        const auto rep = thm15_derivative_bound(k(-2), radial(2, 1.5), {0.3, 0.4}, {0.1, 0.2}, 0);
        CHECK(rep.constants.at("lhs") == doctest::Approx(std::log(2.0)));
        CHECK(rep.constants.at("log_g0") == doctest::Approx(std::log(2.0)));
        CHECK(rep.verdict == Verdict::pass);
    }
    SUBCASE("exp(z1 z2), N = 0: r^2 against r^2 + 2r") {
        for (double r : {0.3, 0.5, 0.7}) {
            const auto rep = thm15_derivative_bound(Expr::exp(z(0) * z(1)), sharpness_field(), {r, r}, {0, 0}, 0);
            CHECK(rep.constants.at("lhs") == doctest::Approx(r * r).epsilon(1e-13));
            CHECK(rep.constants.at("rhs") == doctest::Approx(r * r + 2 * r).epsilon(1e-10));
            CHECK(rep.constants.at("integral_gamma") == 0.0);
            CHECK(rep.verdict == Verdict::pass);
        }
    }
    SUBCASE("z1, N = 1, constant weights") {
        const LField L(1.5, {k(2), k(2)});
        const auto rep = thm15_derivative_bound(z(0), L, {0.5, 0.3}, {0.4, 0.0}, 1);
        // max(|z1|, 1/2) at both ends; the beta integral is (2 + 1.2 + 2) * 0.5.
        CHECK(rep.constants.at("lhs") == doctest::Approx(std::log(0.5)));
        CHECK(rep.constants.at("log_g0") == doctest::Approx(std::log(0.5)));
        CHECK(rep.constants.at("integral_beta") == doctest::Approx(2.6).epsilon(1e-12));
        CHECK(rep.verdict == Verdict::pass);
    }
    SUBCASE("decreasing weight activates the derivative term") {
        // l = 3 - |z| decreases along rays: (-u')^+/l = 1/(3 - t).
        const LField L(2.0, {k(3) - Expr::norm()});
        const auto rep = thm15_derivative_bound(Expr::exp(z(0)), L, {0.6}, {0.0}, 1);
        CHECK(rep.constants.at("integral_gamma") == doctest::Approx(std::log(3.0 / 2.4)).epsilon(1e-6));
        CHECK(rep.verdict == Verdict::pass);
    }
}

TEST_CASE("derivative condition on the weights") {
    const auto radii = diagonal_radii(1, 0.1, 0.95, 12);
    SUBCASE("radially increasing weights give C = 0") {
        const auto rep = check_W_condition(radial(1, 2.0), radii, theta_grid(1, 4));
        CHECK(rep.constants.at("C") == 0.0);
        CHECK(rep.constants.at("W_member") == 1.0);
        CHECK(rep.verdict == Verdict::pass);
        const auto rep2 = check_W_condition(sharpness_field(), diagonal_radii(2, 0.1, 0.7, 6), theta_grid(2, 4));
        CHECK(rep2.constants.at("C") == 0.0);
    }
    SUBCASE("a weight with a dip near the origin has positive C") {
        const LField L(2.0, {k(2) * Expr::recip(one_minus_norm()) + k(10) * Expr::exp(k(-20) * Expr::norm())});
        WConditionOptions opt;
        opt.t_points = 200;
        const auto rep = check_W_condition(L, radii, theta_grid(1, 1), opt);
        double oracle = 0.0;
        for (const auto& R : radii) {
            const double r = R[0];
            for (int i = 0; i < opt.t_points; ++i) {
                const double t = r * i / (opt.t_points - 1);
                const double u = 2 / (1 - t) + 10 * std::exp(-20 * t);
                const double du = 2 / ((1 - t) * (1 - t)) - 200 * std::exp(-20 * t);
                oracle = std::max(oracle, std::max(-du, 0.0) / (u * u));
            }
        }
        CHECK(oracle > 0.0);
        CHECK(rep.constants.at("C") == doctest::Approx(oracle).epsilon(1e-5));
        CHECK(rep.verdict == Verdict::pass);
        // The dip near the origin is on every ray, so the shell sups do not vanish.
        CHECK(rep.constants.at("W_member") == 0.0);
    }
}

TEST_CASE("growth ratio") {
    SUBCASE("exp(z1 z2) with the sharpness field: r^2 / (r^2 + 2r)") {
        GrowthRatioOptions opt;
        opt.thetas = theta_grid(2, 4);
        GrowthCap cap;
        cap.kind = GrowthCapKind::thm15_W;
        cap.N = 0;
        const auto seq = diagonal_radii(2, 0.1, 0.7, 13);
        const auto c = growth_ratio_limsup(Expr::exp(z(0) * z(1)), sharpness_field(), seq, cap, opt);
        for (std::size_t t = 0; t < seq.size(); ++t) {
            const double r = seq[t][0];
            CHECK(c.lhs[t] == doctest::Approx(r * r).epsilon(1e-9));
            CHECK(c.ratio[t] == doctest::Approx(r / (r + 2)).epsilon(1e-9));
            if (t > 0) CHECK(c.ratio[t] > c.ratio[t - 1]);
        }
        CHECK(c.limsup == doctest::Approx(0.7 / 2.7).epsilon(1e-9));
        CHECK(c.cap == 1.0);
        CHECK(c.report.verdict == Verdict::pass);
    }
    SUBCASE("constant: the ratio decays") {
        const auto c = growth_ratio_limsup(k(2), radial(1, 2.0), diagonal_radii(1, 0.5, 0.999, 8));
        for (std::size_t t = 1; t < c.ratio.size(); ++t) CHECK(c.ratio[t] < c.ratio[t - 1]);
        CHECK(c.ratio.back() < 0.06);
        CHECK(c.report.verdict == Verdict::indeterminate);
    }
    SUBCASE("caps") {
        GrowthCap cap{GrowthCapKind::thm15_C, 2, 0.5, 0.0, 0};
        CHECK(growth_cap_value(cap) == 4.0);
        CHECK(growth_cap_value(cap) < (cap.C + 1) * (cap.N + 1));
        CHECK(growth_cap_value({GrowthCapKind::lemma6, 0, 0.0, 3.0, 2}) == 9.0);
        CHECK(growth_cap_value({GrowthCapKind::lemma5, 0, 0.0, 3.0, 2}) == 3.0);
        CHECK(std::isinf(growth_cap_value({})));
    }
}

TEST_CASE("Lagrange problem") {
    for (int n = 1; n <= 8; ++n) {
        const auto res = lagrange_H_max(n);
        CHECK(res.H == doctest::Approx(std::sqrt(n)).epsilon(1e-12));
        for (double x : res.x) CHECK(std::abs(x - n) < 1e-9);
        CHECK(res.kkt_residual < 1e-9);
    }
    SUBCASE("from random feasible starts") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.05, 1.0);
        for (int n : {2, 3, 5}) {
            std::vector<double> w(static_cast<std::size_t>(n));
            double s = 0.0;
            for (auto& v : w) s += (v = u(rng));
            std::vector<double> x;
            for (double v : w) x.push_back(s / v);
            const auto res = lagrange_H_max(n, x);
            CHECK(std::abs(res.H - std::sqrt(n)) < 1e-9);
            for (double xi : res.x) CHECK(std::abs(xi - n) < 1e-6);
            CHECK(res.kkt_residual < 1e-9);
            // No random feasible point beats the optimum.
            for (int trial = 0; trial < 1000; ++trial) {
                double t = 0.0;
                for (auto& v : w) t += (v = u(rng));
                std::vector<double> y;
                for (double v : w) y.push_back(t / v);
                CHECK(lagrange_H(y) <= res.H * (1 + 1e-12));
            }
        }
    }
    SUBCASE("n = 2 scan") {
        double best = 0.0;
        for (int i = 1; i < 1000000; ++i) {
            const double x1 = 1.0 + 99.0 * i / 1000000.0;
            best = std::max(best, lagrange_H({x1, 1.0 / (1.0 - 1.0 / x1)}));
        }
        CHECK(best == doctest::Approx(lagrange_H_max(2).H).epsilon(1e-9));
    }
    CHECK_THROWS_AS(lagrange_H_max(2, std::vector<double>{3.0, 3.0}), DomainError);
}

TEST_CASE("gamma ratio bound") {
    CHECK(gamma_ratio_bound({4}, {0}, 1, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(gamma_ratio_bound({0, 0}, {2, 1}, 2, 1.5) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(gamma_ratio_bound({0, 0, 0}, {3, 0, 1}, 3, 1.5) == doctest::Approx(1.0 / 6).epsilon(1e-13));
    SUBCASE("direct factorial arithmetic, n = 2") {
        // S = (2, 2): 5! Gamma(2)^2 / (2! 2! Gamma(4) r^4).
        CHECK(gamma_ratio_bound({2, 2}, {0, 0}, 2, 1.3) == doctest::Approx(120.0 / (4 * 6 * std::pow(1.3, 4))));
    }
    SUBCASE("decreasing in r and vanishing along rays above the critical radius") {
        for (int m : {1, 5, 20}) {
            double prev = INFINITY;
            for (double r : {1.0, 1.5, 2.0, 3.0}) {
                const double v = gamma_ratio_bound({m, 2 * m}, {1, 0}, 2, r);
                CHECK(v < prev);
                prev = v;
            }
        }
        // Roughly sqrt(2) * 1.01^(-400) at ||S|| = 400.
        CHECK(gamma_ratio_bound({200, 200}, {0, 0}, 2, std::sqrt(2.0) * 1.01) < 0.03);
        CHECK(gamma_ratio_bound({400, 400}, {0, 0}, 2, std::sqrt(2.0) * 1.01) < 1e-3);
        CHECK(gamma_ratio_threshold({1, 1}, {0, 0}, 2, std::sqrt(2.0) * 1.05, 200).has_value());
    }
    SUBCASE("at r = sqrt(n) the diagonal tends to 2^((n-1)/2)") {
        CHECK(gamma_ratio_threshold({1}, {0}, 1, 1.0, 200) == 0);
        for (int n : {2, 3}) {
            const MultiIndex dir(static_cast<std::size_t>(n), 1);
            CHECK(!gamma_ratio_threshold(dir, MultiIndex(static_cast<std::size_t>(n), 0), n, std::sqrt(n), 200));
            const MultiIndex S(static_cast<std::size_t>(n), 200);
            CHECK(gamma_ratio_bound(S, MultiIndex(static_cast<std::size_t>(n), 0), n, std::sqrt(n)) ==
                  doctest::Approx(std::pow(2.0, (n - 1) / 2.0)).epsilon(0.01));
        }
        for (int n : {1, 2, 3})
            CHECK(!gamma_ratio_threshold(MultiIndex(static_cast<std::size_t>(n), 1), MultiIndex(static_cast<std::size_t>(n), 0),
                                         n, std::sqrt(n) / 1.2, 200));
    }
}
