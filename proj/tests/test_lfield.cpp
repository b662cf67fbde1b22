#include <doctest.h>

#include <cmath>

#include "lindex/errors.hpp"
#include "lindex/lfield.hpp"
#include "lindex/sampling.hpp"

using namespace lindex;

namespace {

Expr k(double c) { return Expr::constant(c); }
Expr one_minus_norm() { return k(1) - Expr::norm(); }

// Example field l_1 = 1/((1-|z1|)^2 (1-|z|)), l_2 = 1/((1-|z|)(1-|z2|)^2).
std::vector<Expr> example_components() {
    const Expr a = k(1) - Expr::abs_var(0), b = k(1) - Expr::abs_var(1);
    return {Expr::recip(Expr::pow(a, 2) * one_minus_norm()), Expr::recip(one_minus_norm() * Expr::pow(b, 2))};
}

std::vector<Point> real_anchors(std::initializer_list<double> ts) {
    std::vector<Point> out;
    for (double t : ts) out.push_back(Point{t});
    return out;
}

}  // namespace

TEST_CASE("beta must exceed sqrt(n)") {
    CHECK_THROWS_AS(LField(1.0, {k(1), k(1)}), InvalidBeta);
    CHECK_NOTHROW(LField(1.5, {k(1), k(1)}));
}

TEST_CASE("cone condition") {
    const auto grid = halton_ball(2, 200, 1.0 - kBoundaryExclusion, 3);
    SUBCASE("l_j = 2 beta/(1-|z|) has ratio exactly 2") {
        const Expr l = k(4) * Expr::recip(one_minus_norm());
        const auto rep = check_cone_condition(LField(2.0, {l, l}), grid);
        CHECK(rep.verdict == Verdict::pass);
        CHECK(rep.constants.at("min_ratio") == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(rep.constants.at("radial_rays_flagged") == 0);
    }
    SUBCASE("constant 1 fails") {
        const auto rep = check_cone_condition(LField(2.0, {k(1), k(1)}), grid);
        CHECK(rep.verdict == Verdict::fail);
        REQUIRE(rep.witness);
        CHECK(rep.constants.at("min_ratio") < 0.5 + 1e-12);
    }
    SUBCASE("example field with beta = 1.05 sqrt(2) follows the sampled minimum") {
        const LField L(1.05 * std::sqrt(2.0), example_components());
        double oracle = 1e300;
        for (const auto& z : grid)
            for (int j = 0; j < 2; ++j) oracle = std::min(oracle, L(j, z) * (1 - euclid_norm(z)) / L.beta());
        const auto rep = check_cone_condition(L, grid);
        CHECK(rep.constants.at("min_ratio") == doctest::Approx(oracle).epsilon(1e-14));
        CHECK((rep.verdict == Verdict::pass) == (oracle > 1.0));
        // The field is 1/(1-|z|) times a factor >= 1 that equals 1 near the axes.
        CHECK(rep.verdict == Verdict::fail);
    }
    CHECK_THROWS_AS(check_cone_condition(LField(2.0, {k(1)}), {}), EmptyGrid);
}

TEST_CASE("estimate_lambda") {
    SUBCASE("constant field gives exactly 1") {
        const LField L(2.0, {k(3), k(3)});
        const auto b = estimate_lambda(L, {1.0, 1.0}, halton_ball(2, 20, 0.5, 1));
        for (int j = 0; j < 2; ++j) {
            CHECK(b.lambda1[static_cast<std::size_t>(j)] == 1.0);
            CHECK(b.lambda2[static_cast<std::size_t>(j)] == 1.0);
        }
    }
    SUBCASE("radial field against the closed form") {
        // l = 2/(1-|z|)^2, R = 1: around a real anchor t the disc has radius
        // rho = (1-t)^2/2 and the extreme ratios sit at |z| = t -+ rho.
        const double beta = 2.0;
        const LField L(beta, {k(beta) * Expr::recip(Expr::pow(one_minus_norm(), 2))});
        const auto anchors = real_anchors({0.0, 0.2, 0.4, 0.6, 0.8, 0.9});
        double lo = 1.0, hi = 1.0;
        for (const auto& a : anchors) {
            const double t = a[0].real();
            const double rho = (1 - t) * (1 - t) / beta;
            auto l = [&](double s) { return beta / ((1 - s) * (1 - s)); };
            hi = std::max(hi, l(t + rho) / l(t));
            lo = std::min(lo, l(std::abs(t - rho)) / l(t));
        }
        const auto b = estimate_lambda(L, {1.0}, anchors);
        CHECK(b.lambda2[0] <= hi * (1 + 1e-12));
        CHECK(b.lambda2[0] >= hi * 0.98);
        CHECK(b.lambda1[0] >= lo * (1 - 1e-12));
        CHECK(b.lambda1[0] <= lo * 1.02);

        LocalSampling ball;
        ball.shape = LocalShape::ball;
        const auto bb = estimate_lambda(L, {1.0}, anchors, ball);
        CHECK(bb.lambda2[0] == doctest::Approx(b.lambda2[0]).epsilon(0.02));
        CHECK(bb.lambda1[0] == doctest::Approx(b.lambda1[0]).epsilon(0.02));
        CHECK(bb.lambda1[0] <= 1.0);
        CHECK(bb.lambda2[0] >= 1.0);
    }
    SUBCASE("monotone in R on nested samples") {
        const LField L(1.5, example_components());
        const auto anchors = halton_ball(2, 15, 0.5, 2);
        LocalSampling one, two;
        one.scales = {1.0};
        two.scales = {0.5, 1.0};
        const auto small = estimate_lambda(L, {0.3, 0.3}, anchors, one);
        const auto large = estimate_lambda(L, {0.6, 0.6}, anchors, two);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(small.lambda1[j] <= 1.0);
            CHECK(small.lambda2[j] >= 1.0);
            CHECK(large.lambda2[j] >= small.lambda2[j]);
            CHECK(large.lambda1[j] <= small.lambda1[j]);
        }
    }
    SUBCASE("escaping polydiscs are reported") {
        const LField L(1.5, {k(1.6), k(1.6)});
        CHECK_THROWS_AS(estimate_lambda(L, {1.0, 1.0}, {Point{0.5, 0.0}}), PolydiscEscapesBall);
    }
}

TEST_CASE("Q membership") {
    SUBCASE("constant field is a member with unit bounds") {
        const LField L(2.0, {k(5)});
        const auto rep = check_Q_membership(L, {{0.5}, {1.0}}, halton_ball(1, 10, 0.7, 4));
        CHECK(rep.verdict == Verdict::pass);
        CHECK(rep.constants.at("lambda1_min") == 1.0);
        CHECK(rep.constants.at("lambda2_max") == 1.0);
    }
    SUBCASE("beta/(1-|z|) is a member with lambda2 = 1/(1-R/beta)") {
        const double beta = 2.0;
        const LField L(beta, {k(beta) * Expr::recip(one_minus_norm())});
        const auto anchors = real_anchors({0.0, 0.3, 0.6, 0.9, 0.99});
        for (double R : {0.5, 1.0}) {
            const auto rep = check_Q_membership(L, {{R}}, anchors);
            CHECK(rep.verdict == Verdict::pass);
            CHECK(rep.constants.at("lambda2_max") == doctest::Approx(1.0 / (1.0 - R / beta)).epsilon(0.02));
            CHECK(rep.constants.at("lambda1_min") == doctest::Approx(1.0 / (1.0 + R / beta)).epsilon(0.02));
        }
        // With R = beta the closed disc reaches the unit circle.
        CHECK_THROWS_AS(check_Q_membership(L, {{2.0}}, anchors), PolydiscEscapesBall);
    }
    SUBCASE("exp(1/(1-|z|)) stays bounded because its discs shrink faster") {
        // Around t the disc has radius e^{-1/(1-t)}, so the ratio is about
        // exp(e^{-1/(1-t)}/(1-t)^2) -> 1 as t -> 1.
        const LField L(2.0, {Expr::exp(Expr::recip(one_minus_norm()))});
        const auto anchors = real_anchors({0.0, 0.5, 0.9, 0.95});
        const auto rep = check_Q_membership(L, {{1.0}}, anchors);
        double oracle = 1.0;
        for (const auto& a : anchors) {
            const double t = a[0].real();
            const double rho = std::exp(-1.0 / (1 - t));
            oracle = std::max(oracle, std::exp(1.0 / (1 - t - rho) - 1.0 / (1 - t)));
        }
        CHECK(rep.constants.at("lambda2_max") == doctest::Approx(oracle).epsilon(0.02));
        CHECK(rep.verdict == Verdict::pass);
    }
    SUBCASE("lambda form and pair form agree") {
        // The doubled example field satisfies the cone condition with beta = 1.5,
        // which keeps every L-scaled polydisc with |R| <= beta inside the ball.
        const LField L = LField(1.5, example_components()).scaled(2.0);
        const auto rep = check_Q_membership(L, {{0.5, 0.5}, {1.0, 1.0}}, halton_ball(2, 10, 0.4, 5));
        CHECK(rep.verdict != Verdict::indeterminate);
    }
}

TEST_CASE("K membership") {
    std::vector<std::vector<double>> radial;
    for (double r : {0.1, 0.3, 0.5, 0.7, 0.9}) radial.push_back({r});
    SUBCASE("fields of |z_j| only have c = 1") {
        const LField L(1.5, {Expr::abs_var(1) + k(1), Expr::abs_var(0) + k(1)});
        std::vector<std::vector<double>> r2;
        for (double r : {0.1, 0.5, 0.7}) r2.push_back({r, r / 2});
        const auto rep = check_K_membership(L, r2, 16);
        CHECK(rep.constants.at("c") == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(rep.verdict == Verdict::pass);
    }
    SUBCASE("constant") {
        CHECK(check_K_membership(LField(2.0, {k(2)}), radial, 16).constants.at("c") == 1.0);
    }
    SUBCASE("(|e^z|+1)/(1-|z|) has angular ratio (e^r+1)/(e^{-r}+1)") {
        const LField L(2.0, {(Expr::abs(Expr::exp(Expr::var(0))) + k(1)) * Expr::recip(one_minus_norm())});
        const auto rep = check_K_membership(L, radial, 64);
        const double r = 0.9;
        CHECK(rep.constants.at("c") == doctest::Approx((std::exp(r) + 1) / (std::exp(-r) + 1)).epsilon(1e-12));
    }
}

TEST_CASE("theorem 13 differential test") {
    const auto grid = halton_ball(1, 400, 0.9, 6);
    const auto anchors = halton_ball(1, 30, 0.6, 7);
    SUBCASE("constant components") {
        const auto rep = check_theorem13({k(3)}, 1.0, grid, {1.0}, anchors);
        CHECK(rep.constants.at("P") == 0.0);
        CHECK(rep.constants.at("bracket_upper") == 1.0);
        CHECK(rep.constants.at("bracket_lower") == 1.0);
        CHECK(rep.verdict == Verdict::pass);
    }
    SUBCASE("e^z has P <= 1") {
        const auto rep = check_theorem13({Expr::exp(Expr::var(0))}, 1.0, grid, {1.0}, anchors);
        CHECK(rep.constants.at("P") <= 1.0);
        CHECK(rep.verdict == Verdict::pass);
    }
    SUBCASE("1/(1-z) against the scalar oracle") {
        const Expr l = Expr::recip(k(1) - Expr::var(0));
        const auto rep = check_theorem13({l}, 1.0, grid, {1.0}, anchors);
        double oracle = 0.0;
        for (const auto& z : grid) {
            const double m = std::abs(1.0 - z[0]);
            oracle = std::max(oracle, 1.0 / (m * (m + 1.0)));
        }
        CHECK(rep.constants.at("P") == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(rep.verdict == Verdict::pass);
    }
}
