#include "lindex/growth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "lindex/errors.hpp"
#include "lindex/index.hpp"
#include "lindex/jet.hpp"
#include "lindex/parallel.hpp"

namespace lindex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kConeSlack = 1e-12;

double radii_norm(const Radii& R) {
    double s = 0.0;
    for (double r : R) s += r * r;
    return std::sqrt(s);
}

double radii_max(const Radii& R) { return *std::max_element(R.begin(), R.end()); }

void require_radii(const LField& L, const Radii& R, const char* what) {
    if (static_cast<int>(R.size()) != L.dim())
        throw DomainError(std::string(what) + ": radii dimension does not match L");
    for (double r : R)
        if (!(r >= 0.0)) throw DomainError(std::string(what) + ": radii must be nonnegative");
    if (!(radii_norm(R) < 1.0)) throw DomainError(std::string(what) + ": needs |R| < 1");
    if (!(radii_max(R) > 0.0)) throw DomainError(std::string(what) + ": needs r* > 0");
}

void require_increasing(const std::vector<Radii>& seq, const char* what) {
    if (seq.empty()) throw EmptyGrid(std::string(what) + " needs a radii sequence");
    for (std::size_t t = 1; t < seq.size(); ++t)
        if (!(radii_norm(seq[t]) > radii_norm(seq[t - 1])))
            throw DomainError(std::string(what) + ": radii must be strictly increasing in |R|");
}

const std::vector<std::vector<double>>& thetas_or_default(const std::vector<std::vector<double>>& given, int n,
                                                          std::vector<std::vector<double>>& storage) {
    if (!given.empty()) return given;
    storage = default_theta_grid(n);
    return storage;
}

// z = tau (R/r*) e^{i Theta}
Point ray_point(const Radii& R, const std::vector<double>& theta, double tau) {
    const double rs = radii_max(R);
    Point z(R.size());
    for (std::size_t j = 0; j < R.size(); ++j) z[j] = std::polar(tau * R[j] / rs, theta[j]);
    return z;
}

double checked_l(const LField& L, int j, const Point& z) {
    if (!(euclid_norm(z) < 1.0)) throw IntegrandSingularity("integration path leaves the unit ball");
    const double v = L(j, z);
    if (!std::isfinite(v) || !(v > 0.0)) {
        std::ostringstream os;
        os << "l_" << j + 1 << " is not finite and positive on the integration path (value " << v << ")";
        throw IntegrandSingularity(os.str());
    }
    return v;
}

struct Interval {
    double a, b, fa, fm, fb, whole, tol;
    int depth;
};

double simpson(double a, double b, double fa, double fm, double fb) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& opt) {
    QuadratureResult res;
    if (a == b) return res;
    auto eval = [&](double x) {
        const double v = f(x);
        if (!std::isfinite(v)) throw IntegrandSingularity("integrand is not finite");
        return v;
    };
    // Eight initial panels so that narrow features near the start are seen.
    constexpr int kInitial = 8;
    std::vector<Interval> stack;
    std::vector<double> xs(2 * kInitial + 1), fs(2 * kInitial + 1);
    for (int i = 0; i <= 2 * kInitial; ++i) {
        xs[static_cast<std::size_t>(i)] = a + (b - a) * i / (2.0 * kInitial);
        fs[static_cast<std::size_t>(i)] = eval(xs[static_cast<std::size_t>(i)]);
    }
    for (int i = kInitial - 1; i >= 0; --i) {
        const auto l = static_cast<std::size_t>(2 * i);
        stack.push_back({xs[l], xs[l + 2], fs[l], fs[l + 1], fs[l + 2],
                         simpson(xs[l], xs[l + 2], fs[l], fs[l + 1], fs[l + 2]), opt.tol / kInitial, 0});
    }
    std::size_t live = stack.size();
    while (!stack.empty()) {
        Interval iv = stack.back();
        stack.pop_back();
        const double m = 0.5 * (iv.a + iv.b);
        const double lm = 0.5 * (iv.a + m), rm = 0.5 * (m + iv.b);
        const double flm = eval(lm), frm = eval(rm);
        const double left = simpson(iv.a, m, iv.fa, flm, iv.fm);
        const double right = simpson(m, iv.b, iv.fm, frm, iv.fb);
        const double diff = left + right - iv.whole;
        const bool budget_left = live + 1 <= opt.max_panels;
        if (std::abs(diff) <= 15.0 * iv.tol || iv.depth >= 60 || !budget_left) {
            if (std::abs(diff) > 15.0 * iv.tol) res.converged = false;
            res.value += left + right + diff / 15.0;
            res.error_estimate += std::abs(diff) / 15.0;
            ++res.panels;
            --live;
            continue;
        }
        ++live;
        stack.push_back({m, iv.b, iv.fm, frm, iv.fb, right, iv.tol / 2, iv.depth + 1});
        stack.push_back({iv.a, m, iv.fa, flm, iv.fm, left, iv.tol / 2, iv.depth + 1});
    }
    return res;
}

std::vector<std::vector<double>> theta_grid(int n, int m) {
    if (n < 1 || m < 1) throw DomainError("theta_grid needs n >= 1 and m >= 1");
    std::size_t total = 1;
    for (int j = 0; j < n; ++j) total *= static_cast<std::size_t>(m);
    std::vector<std::vector<double>> out(total, std::vector<double>(static_cast<std::size_t>(n)));
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rest = i;
        for (int j = 0; j < n; ++j) {
            out[i][static_cast<std::size_t>(j)] =
                2.0 * std::numbers::pi * static_cast<double>(rest % static_cast<std::size_t>(m)) / m;
            rest /= static_cast<std::size_t>(m);
        }
    }
    return out;
}

std::vector<std::vector<double>> default_theta_grid(int n) {
    int m = 32;
    while (m > 1 && std::pow(static_cast<double>(m), n) > 4096.0) --m;
    return theta_grid(n, m);
}

GrowthIntegral growth_integral(const LField& L, const Radii& R, const std::vector<double>& theta, const Radii& R0,
                               const std::vector<int>& sigma, const std::optional<Radii>& lower,
                               const QuadratureOptions& quad) {
    require_radii(L, R, "growth_integral");
    const auto n = R.size();
    if (R0.size() != n || theta.size() != n || sigma.size() != n)
        throw DomainError("growth_integral: R0, Theta and sigma must have the dimension of R");
    std::vector<int> sorted(sigma);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < n; ++k)
        if (sorted[k] != static_cast<int>(k)) throw DomainError("growth_integral: sigma is not a permutation");
    if (lower && lower->size() != n) throw DomainError("growth_integral: lower limits have the wrong dimension");

    GrowthIntegral out;
    out.per_coordinate.assign(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        Point z(n);
        for (std::size_t k = 0; k < n; ++k) {
            if (k == j) continue;
            const double rk = sigma[k] < sigma[j] ? R0[k] : R[k];
            z[k] = std::polar(rk, theta[k]);
        }
        auto f = [&, j](double t) {
            Point w = z;
            w[j] = std::polar(t, theta[j]);
            return checked_l(L, static_cast<int>(j), w);
        };
        const double a = lower ? (*lower)[j] : 0.0;
        const auto q = adaptive_simpson(f, a, R[j], quad);
        out.per_coordinate[j] = q.value;
        out.value += q.value;
        out.converged = out.converged && q.converged;
    }
    return out;
}

GrowthIntegralMin growth_integral_min(const LField& L, const Radii& R, const std::optional<Radii>& R0,
                                      const std::vector<std::vector<double>>& thetas, const QuadratureOptions& quad) {
    require_radii(L, R, "growth_integral_min");
    const int n = L.dim();
    if (n > 4) throw DomainError("growth_integral_min enumerates permutations only for n <= 4");
    Radii base = R0 ? *R0 : R;
    if (!R0)
        for (auto& r : base) r *= 0.5;
    std::vector<std::vector<double>> storage;
    const auto& grid = thetas_or_default(thetas, n, storage);

    std::vector<std::vector<int>> perms;
    std::vector<int> sigma(static_cast<std::size_t>(n));
    std::iota(sigma.begin(), sigma.end(), 0);
    do perms.push_back(sigma);
    while (std::next_permutation(sigma.begin(), sigma.end()));

    const std::size_t total = grid.size() * perms.size();
    std::vector<double> values(total);
    parallel_for(total, [&](std::size_t i) {
        values[i] = growth_integral(L, R, grid[i / perms.size()], base, perms[i % perms.size()], std::nullopt, quad).value;
    });
    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    return {values[best], grid[best / perms.size()], perms[best % perms.size()], total};
}

namespace {

double ray_integral(const LField& L, const Radii& R, const std::vector<double>& theta, const QuadratureOptions& quad,
                    bool check_cone) {
    const double rs = radii_max(R);
    auto f = [&](double tau) {
        const Point z = ray_point(R, theta, tau);
        double s = 0.0;
        for (int j = 0; j < L.dim(); ++j) {
            const double l = checked_l(L, j, z);
            if (check_cone && l < L.beta() / (1.0 - euclid_norm(z)) * (1.0 - kConeSlack)) {
                std::ostringstream os;
                os << "l_" << j + 1 << " = " << l << " is below beta/(1-|z|) at |z| = " << euclid_norm(z);
                throw InadmissibleL(os.str());
            }
            s += R[static_cast<std::size_t>(j)] / rs * l;
        }
        return s;
    };
    return adaptive_simpson(f, 0.0, rs, quad).value;
}

RayIntegral ray_max(const LField& L, const Radii& R, const std::vector<std::vector<double>>& grid,
                    const QuadratureOptions& quad, bool check_cone) {
    std::vector<double> values(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { values[i] = ray_integral(L, R, grid[i], quad, check_cone); });
    const auto best = static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
    return {values[best], grid[best]};
}

}  // namespace

RayIntegral ray_integral_max(const LField& L, const Radii& R, const std::vector<std::vector<double>>& thetas,
                             const QuadratureOptions& quad) {
    require_radii(L, R, "ray_integral_max");
    std::vector<std::vector<double>> storage;
    return ray_max(L, R, thetas_or_default(thetas, L.dim(), storage), quad, false);
}

std::vector<Radii> diagonal_radii(int n, double r_first, double r_last, std::size_t count) {
    if (n < 1 || count == 0) throw DomainError("diagonal_radii needs n >= 1 and a positive count");
    std::vector<Radii> out;
    for (std::size_t i = 0; i < count; ++i) {
        const double r = count == 1 ? r_last : r_first + (r_last - r_first) * static_cast<double>(i) / (count - 1);
        out.emplace_back(static_cast<std::size_t>(n), r);
    }
    return out;
}

void GrowthCurve::write_csv(std::ostream& os) const {
    os << "|R|,lhs,rhs,ratio\n";
    char buf[128];
    for (std::size_t t = 0; t < radii.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", radii_norm(radii[t]), lhs[t], rhs[t], ratio[t]);
        os << buf;
    }
}

GrowthCurve lemma4_divergence(const LField& L, const std::vector<Radii>& sequence,
                              const std::vector<std::vector<double>>& thetas, const QuadratureOptions& quad) {
    require_increasing(sequence, "lemma4_divergence");
    std::vector<std::vector<double>> storage;
    const auto& grid = thetas_or_default(thetas, L.dim(), storage);
    GrowthCurve c;
    c.report.check = "lemma4_divergence";
    double worst = kInf;
    std::size_t wt = 0;
    for (std::size_t t = 0; t < sequence.size(); ++t) {
        const Radii& R = sequence[t];
        require_radii(L, R, "lemma4_divergence");
        const double norm = radii_norm(R);
        const double integral = ray_max(L, R, grid, quad, true).value;
        double envelope = 0.0;
        for (double r : R) envelope -= r * L.beta() / norm * std::log1p(-norm);
        c.radii.push_back(R);
        c.lhs.push_back(integral);
        c.rhs.push_back(envelope);
        c.ratio.push_back(integral / envelope);
        const double margin = integral - envelope;
        if (margin < worst) {
            worst = margin;
            wt = t;
        }
        ++c.report.samples_used;
    }
    bool increasing = true;
    for (std::size_t t = 1; t < c.lhs.size(); ++t) increasing = increasing && c.lhs[t] > c.lhs[t - 1];
    const double tol = quad.tol * 10.0 * static_cast<double>(L.dim());
    c.report.worst_margin = worst;
    c.report.constants["final_integral"] = c.lhs.back();
    c.report.constants["final_envelope"] = c.rhs.back();
    c.report.constants["strictly_increasing"] = increasing ? 1.0 : 0.0;
    c.limsup = c.ratio.back();
    c.report.verdict = verdict_from(worst >= -tol && increasing, c.report.samples_used, 0);
    if (worst < -tol) {
        std::ostringstream os;
        os << "integral below the envelope at |R| = " << radii_norm(sequence[wt]);
        c.report.witness = Witness{Point(sequence[wt].begin(), sequence[wt].end()), {}, os.str()};
    }
    return c;
}

double u_derivative(const LField& L, int j, const Radii& R, const std::vector<double>& theta, double t) {
    const double rs = radii_max(R);
    const double h = 1e-6 * rs;
    auto u = [&](double s) { return checked_l(L, j, ray_point(R, theta, s)); };
    if (t - h < 0.0) return (u(t + h) - u(t)) / h;
    if (t + h > rs) return (u(t) - u(t - h)) / h;
    return (u(t + h) - u(t - h)) / (2.0 * h);
}

CriterionReport thm15_derivative_bound(const Expr& F, const LField& L, const Radii& R,
                                       const std::vector<double>& theta, int N, const QuadratureOptions& quad) {
    require_radii(L, R, "thm15_derivative_bound");
    if (N < 0) throw DomainError("thm15_derivative_bound needs N >= 0");
    if (theta.size() != R.size()) throw DomainError("thm15_derivative_bound: Theta has the wrong dimension");
    const auto n = R.size();
    const double rs = radii_max(R);

    auto log_g = [&](const Point& z) {
        const Jet J = jet_from_expr(F, z, N);
        const auto v = log_normalized_derivatives(J, L.eval(z));
        return *std::max_element(v.begin(), v.end());
    };
    const Point zR = ray_point(R, theta, rs);
    const double lhs = log_g(zR);
    const double g0 = log_g(Point(n, cplx{}));

    auto beta_t = [&](double tau) {
        const Point z = ray_point(R, theta, tau);
        double s = 0.0, m = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double a = R[j] / rs * checked_l(L, static_cast<int>(j), z);
            s += a;
            m = std::max(m, a);
        }
        return s + N * m;
    };
    auto gamma_t = [&](double tau) {
        if (N == 0) return 0.0;
        const Point z = ray_point(R, theta, tau);
        double m = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = u_derivative(L, static_cast<int>(j), R, theta, tau);
            m = std::max(m, std::max(-d, 0.0) / checked_l(L, static_cast<int>(j), z));
        }
        return N * m;
    };
    const auto ib = adaptive_simpson(beta_t, 0.0, rs, quad);
    const auto ig = adaptive_simpson(gamma_t, 0.0, rs, quad);
    const double rhs = g0 + ib.value + ig.value;

    CriterionReport rep;
    rep.check = "thm15_derivative_bound";
    rep.constants["N"] = N;
    rep.constants["lhs"] = lhs;
    rep.constants["log_g0"] = g0;
    rep.constants["integral_beta"] = ib.value;
    rep.constants["integral_gamma"] = ig.value;
    rep.constants["rhs"] = rhs;
    rep.samples_used = 1;
    if (!ib.converged || !ig.converged) rep.notes.push_back("quadrature stopped at the panel budget");
    if (g0 == kNegInf) {
        rep.notes.push_back("all normalized derivatives of order <= N vanish at the origin");
        rep.verdict = lhs == kNegInf ? Verdict::pass : Verdict::indeterminate;
        rep.worst_margin = lhs == kNegInf ? 0.0 : kNegInf;
        return rep;
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(rhs));
    rep.worst_margin = lhs == kNegInf ? kInf : rhs - lhs;
    const bool ok = lhs <= rhs + tol;
    rep.verdict = verdict_from(ok, 1, 0);
    if (!ok) rep.witness = Witness{zR, {}, "normalized derivatives exceed the integrated bound"};
    return rep;
}

CriterionReport check_W_condition(const LField& L, const std::vector<Radii>& radii,
                                  const std::vector<std::vector<double>>& thetas, const WConditionOptions& opt) {
    require_increasing(radii, "check_W_condition");
    if (opt.t_points < 2) throw DomainError("check_W_condition needs at least two t samples");
    std::vector<std::vector<double>> storage;
    const auto& grid = thetas_or_default(thetas, L.dim(), storage);
    const auto n = static_cast<std::size_t>(L.dim());

    struct Sup {
        double value = 0.0;
        Point at;
    };
    std::vector<Sup> shell(radii.size());
    for (std::size_t s = 0; s < radii.size(); ++s) {
        const Radii& R = radii[s];
        require_radii(L, R, "check_W_condition");
        const double rs = radii_max(R);
        std::vector<Sup> per_theta(grid.size());
        parallel_for(grid.size(), [&](std::size_t g) {
            Sup best;
            for (int i = 0; i < opt.t_points; ++i) {
                const double t = rs * i / (opt.t_points - 1);
                const Point z = ray_point(R, grid[g], t);
                for (std::size_t j = 0; j < n; ++j) {
                    if (R[j] == 0.0) continue;
                    const double d = u_derivative(L, static_cast<int>(j), R, grid[g], t);
                    if (!(d < 0.0)) continue;
                    const double l = checked_l(L, static_cast<int>(j), z);
                    const double v = -d / (R[j] / rs * l * l);
                    if (v > best.value) best = {v, z};
                }
            }
            per_theta[g] = best;
        });
        for (const auto& p : per_theta)
            if (p.value > shell[s].value) shell[s] = p;
    }

    CriterionReport rep;
    rep.check = "check_W_condition";
    double C = 0.0;
    std::size_t wc = 0;
    for (std::size_t s = 0; s < shell.size(); ++s)
        if (shell[s].value > C) {
            C = shell[s].value;
            wc = s;
        }
    rep.samples_used = radii.size() * grid.size() * static_cast<std::size_t>(opt.t_points) * n;
    rep.constants["C"] = C;
    rep.constants["shell_sup_first"] = shell.front().value;
    rep.constants["shell_sup_last"] = shell.back().value;

    // Vanishing toward the boundary, judged on the last quarter of the shells.
    const std::size_t q = std::max<std::size_t>(1, (shell.size() + 3) / 4);
    double tail_max = 0.0;
    bool non_increasing = true;
    for (std::size_t s = shell.size() - q; s < shell.size(); ++s) {
        tail_max = std::max(tail_max, shell[s].value);
        if (s > shell.size() - q && shell[s].value > shell[s - 1].value) non_increasing = false;
    }
    Verdict w;
    if (tail_max <= opt.vanish_tol) w = Verdict::pass;
    else if (non_increasing && shell.back().value < 0.5 * shell[shell.size() - q].value) w = Verdict::indeterminate;
    else w = Verdict::fail;
    rep.constants["W_tail_max"] = tail_max;
    rep.constants["W_member"] = w == Verdict::pass ? 1.0 : w == Verdict::fail ? 0.0 : 0.5;
    rep.notes.push_back(std::string("vanishing-derivative class: ") + to_string(w));

    const bool finite = std::isfinite(C) && C <= opt.threshold;
    rep.worst_margin = opt.threshold - C;
    rep.verdict = verdict_from(finite, rep.samples_used, 0);
    if (C > 0.0)
        rep.witness = Witness{shell[wc].at, {}, "largest sampled (-u')^+/(alpha l^2)"};
    return rep;
}

double growth_cap_value(const GrowthCap& cap) {
    switch (cap.kind) {
        case GrowthCapKind::thm15_C: return (cap.C + 1.0) * cap.N + 1.0;
        case GrowthCapKind::thm15_W: return cap.N + 1.0;
        case GrowthCapKind::lemma5: return cap.c;
        case GrowthCapKind::lemma6: return cap.c * (cap.p + 1.0);
        case GrowthCapKind::none: break;
    }
    return kInf;
}

GrowthCurve growth_ratio_limsup(const Expr& F, const LField& L, const std::vector<Radii>& sequence,
                                const GrowthCap& cap, const GrowthRatioOptions& opt) {
    require_increasing(sequence, "growth_ratio_limsup");
    std::vector<std::vector<double>> storage;
    const auto& grid = thetas_or_default(opt.thetas, L.dim(), storage);
    const Point origin(static_cast<std::size_t>(L.dim()), cplx{});

    GrowthCurve c;
    c.report.check = "growth_ratio_limsup";
    for (const auto& R : sequence) {
        require_radii(L, R, "growth_ratio_limsup");
        const double M = skeleton_max(F, origin, R, opt.skeleton).value;
        if (!(M > 0.0)) throw DomainError("growth_ratio_limsup: F vanishes on a torus of the sequence");
        const double lhs = std::log(M);
        const double rhs = ray_max(L, R, grid, opt.quad, false).value;
        c.radii.push_back(R);
        c.lhs.push_back(lhs);
        c.rhs.push_back(rhs);
        c.ratio.push_back(lhs / rhs);
        ++c.report.samples_used;
    }
    const std::size_t q = std::max<std::size_t>(1, (c.ratio.size() + 3) / 4);
    std::size_t arg = c.ratio.size() - q;
    for (std::size_t t = arg; t < c.ratio.size(); ++t)
        if (c.ratio[t] > c.ratio[arg]) arg = t;
    c.limsup = c.ratio[arg];
    c.cap = growth_cap_value(cap);

    auto& k = c.report.constants;
    k["limsup"] = c.limsup;
    k["final_ratio"] = c.ratio.back();
    k["tail_length"] = static_cast<double>(q);
    if (cap.kind == GrowthCapKind::none) {
        c.report.verdict = Verdict::indeterminate;
        c.report.notes.push_back("no cap selected; the trace is reported without a verdict");
        return c;
    }
    k["cap"] = c.cap;
    if (cap.kind == GrowthCapKind::thm15_C) {
        // The one-variable predecessor of this cap is (C+1)(N+1).
        k["cap_product_form"] = (cap.C + 1.0) * (cap.N + 1.0);
    }
    c.report.worst_margin = c.cap - c.limsup;
    const bool ok = c.limsup <= c.cap;
    c.report.verdict = verdict_from(ok, c.report.samples_used, 0);
    if (!ok) {
        const auto& R = c.radii[arg];
        c.report.witness = Witness{Point(R.begin(), R.end()), {}, "growth ratio above the cap"};
    }
    return c;
}

double lagrange_H(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += std::log(v) / (2.0 * v);
    return std::exp(s);
}

namespace {

// Euclidean projection onto {y : sum y = 1, y >= floor}.
std::vector<double> project_simplex(std::vector<double> v, double floor) {
    const auto n = v.size();
    for (auto& x : v) x -= floor;
    const double target = 1.0 - floor * static_cast<double>(n);
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, shift = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cum += u[i];
        const double s = (cum - target) / static_cast<double>(i + 1);
        if (u[i] - s > 0.0) shift = s;
    }
    for (auto& x : v) x = std::max(x - shift, 0.0) + floor;
    return v;
}

double half_entropy(const std::vector<double>& y) {
    double s = 0.0;
    for (double v : y) s -= 0.5 * v * std::log(v);
    return s;
}

}  // namespace

LagrangeResult lagrange_H_max(int n, const std::optional<std::vector<double>>& start) {
    if (n < 1) throw DomainError("lagrange_H_max needs n >= 1");
    LagrangeResult res;
    if (n == 1) {
        res.x = {1.0};
        res.H = 1.0;
        return res;
    }
    const auto nn = static_cast<std::size_t>(n);
    std::vector<double> y(nn, 1.0 / n);
    if (start) {
        if (start->size() != nn) throw DomainError("lagrange_H_max: start has the wrong dimension");
        double s = 0.0;
        for (double x : *start) {
            if (!(x > 1.0)) throw DomainError("lagrange_H_max: start needs x_j > 1");
            s += 1.0 / x;
        }
        if (std::abs(s - 1.0) > 1e-9) throw DomainError("lagrange_H_max: start violates sum 1/x_j = 1");
        for (std::size_t j = 0; j < nn; ++j) y[j] = 1.0 / (*start)[j];
        y = project_simplex(y, 0.0);
    }
    constexpr double kFloor = 1e-300;
    double f = half_entropy(y);
    for (res.iterations = 0; res.iterations < 100000; ++res.iterations) {
        std::vector<double> g(nn);
        for (std::size_t j = 0; j < nn; ++j) g[j] = -0.5 * (std::log(y[j]) + 1.0);
        double step = 1.0;
        std::vector<double> next;
        double fn = f;
        bool moved = false;
        for (int ls = 0; ls < 80; ++ls, step *= 0.5) {
            std::vector<double> trial(nn);
            for (std::size_t j = 0; j < nn; ++j) trial[j] = y[j] + step * g[j];
            trial = project_simplex(trial, kFloor);
            double dir = 0.0;
            for (std::size_t j = 0; j < nn; ++j) dir += g[j] * (trial[j] - y[j]);
            const double ft = half_entropy(trial);
            if (ft >= f + 1e-4 * dir && ft >= f) {
                next = std::move(trial);
                fn = ft;
                moved = true;
                break;
            }
        }
        if (!moved) break;
        double change = 0.0;
        for (std::size_t j = 0; j < nn; ++j) change = std::max(change, std::abs(next[j] - y[j]));
        y = std::move(next);
        f = fn;
        if (change < 1e-16) break;
    }
    res.x.resize(nn);
    for (std::size_t j = 0; j < nn; ++j) res.x[j] = 1.0 / y[j];
    res.H = lagrange_H(res.x);
    // Stationarity: lambda_j = (1 - ln x_j) H / 2 must not depend on j.
    std::vector<double> lam(nn);
    for (std::size_t j = 0; j < nn; ++j) lam[j] = (1.0 - std::log(res.x[j])) * res.H / 2.0;
    const double mean = std::accumulate(lam.begin(), lam.end(), 0.0) / n;
    for (double l : lam) res.kkt_residual = std::max(res.kkt_residual, std::abs(l - mean));
    return res;
}

double log_gamma_ratio_bound(const MultiIndex& S, const MultiIndex& K, int n, double r) {
    if (S.size() != K.size() || static_cast<int>(S.size()) != n) throw DomainError("gamma_ratio_bound: dimension mismatch");
    if (!(r > 0.0)) throw DomainError("gamma_ratio_bound needs r > 0");
    int norm = 0;
    double v = 0.0;
    for (std::size_t j = 0; j < S.size(); ++j) {
        if (S[j] < 0 || K[j] < 0) throw DomainError("gamma_ratio_bound needs nonnegative entries");
        norm += S[j];
        v += std::lgamma(S[j] / 2.0 + 1.0) - std::lgamma(K[j] + S[j] + 1.0);
    }
    return v + std::lgamma(n + static_cast<double>(norm)) - std::lgamma(n + norm / 2.0) - norm * std::log(r);
}

double gamma_ratio_bound(const MultiIndex& S, const MultiIndex& K, int n, double r) {
    return std::exp(log_gamma_ratio_bound(S, K, n, r));
}

std::optional<int> gamma_ratio_threshold(const MultiIndex& direction, const MultiIndex& K, int n, double r,
                                         int max_m) {
    int last_above = -1;
    for (int m = 0; m <= max_m; ++m) {
        MultiIndex S(direction);
        for (auto& s : S) s *= m;
        if (log_gamma_ratio_bound(S, K, n, r) > 1e-12) last_above = m;
    }
    if (last_above == max_m) return std::nullopt;
    return last_above + 1;
}

}  // namespace lindex
