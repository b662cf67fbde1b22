#include "lindex/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "lindex/errors.hpp"
#include "lindex/index.hpp"
#include "lindex/parallel.hpp"
#include "lindex/sampling.hpp"

namespace lindex {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogTol = 1e-12;

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

std::vector<double> angles_of(const Point& z, const Point& z0) {
    std::vector<double> t(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) t[j] = std::arg(z[j] - z0[j]);
    return t;
}

Point torus_point(const Point& z0, const std::vector<double>& R, const std::vector<double>& theta) {
    Point z = z0;
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += std::polar(R[j], theta[j]);
    return z;
}

// ln(|F^(K)(z)| / L^K(z)) over the jet table (no factorial).
std::vector<double> log_derivatives_over_weights(const Jet& F, const std::vector<double>& l) {
    auto v = log_normalized_derivatives(F, l);
    for (std::size_t pos = 0; pos < v.size(); ++pos)
        if (v[pos] != kNegInf) v[pos] += log_factorial(F.table().at(pos));
    return v;
}

int sampled_index(const Expr& F, const LField& L, const std::vector<Point>& anchors, int order,
                  CriterionReport& rep) {
    const auto g = global_index_estimate(F, L, anchors, order);
    rep.constants["anchors_exceeding_validity"] = static_cast<double>(g.exceeded);
    if (g.exceeded > 0)
        rep.notes.push_back("some anchors have no certified local index; n0 is the sup over the others");
    return g.sup_index;
}

void require_anchors(const std::vector<Point>& anchors, const char* what) {
    if (anchors.empty()) throw EmptyGrid(std::string(what) + " needs at least one anchor");
}

std::mt19937_64 anchor_rng(std::uint64_t seed, std::size_t a) {
    return std::mt19937_64(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(a + 1));
}

// Log-domain ratio check shared by the polydisc and ball forms of the
// normalized-derivative inequality.
struct DerivRatio {
    bool vacuous = false;
    double log_ratio = kNegInf;
    Point worst_point;
    MultiIndex worst_K;
    MultiIndex K0;
};

DerivRatio normalized_ratio(const Expr& F, const LField& L, const Point& z0, const std::vector<Point>& pts, int N) {
    DerivRatio out;
    const Jet j0 = jet_from_expr(F, z0, N);
    const auto logs0 = log_normalized_derivatives(j0, L.eval(z0));
    const auto it = std::max_element(logs0.begin(), logs0.end());
    const double rhs = *it;
    out.K0 = j0.table().index(static_cast<std::size_t>(it - logs0.begin()));
    double lhs = kNegInf;
    for (const auto& z : pts) {
        const Jet jz = jet_from_expr(F, z, N);
        const auto logs = log_normalized_derivatives(jz, L.eval(z));
        for (std::size_t pos = 0; pos < logs.size(); ++pos)
            if (logs[pos] > lhs) {
                lhs = logs[pos];
                out.worst_point = z;
                out.worst_K = jz.table().index(pos);
            }
    }
    if (rhs == kNegInf) {
        if (lhs == kNegInf) {
            out.vacuous = true;
            out.log_ratio = kNegInf;
        } else {
            out.log_ratio = kInf;
        }
        return out;
    }
    out.log_ratio = lhs - rhs;
    return out;
}

// Candidate sets of K0 for the modulus-growth checks.
std::vector<std::vector<MultiIndex>> candidate_groups(int n, int N, bool axis) {
    std::vector<std::vector<MultiIndex>> groups;
    if (!axis) {
        const auto table = IndexTable::get(n, N);
        std::vector<MultiIndex> all;
        for (std::size_t pos = 0; pos < table->size(); ++pos) all.push_back(table->index(pos));
        groups.push_back(all);
        return groups;
    }
    for (int j = 0; j < n; ++j) {
        std::vector<MultiIndex> g;
        for (int k = 0; k <= N; ++k) {
            MultiIndex K(static_cast<std::size_t>(n), 0);
            K[static_cast<std::size_t>(j)] = k;
            g.push_back(K);
        }
        groups.push_back(g);
    }
    return groups;
}

struct GrowthRatio {
    double log_ratio = kNegInf;  // max over groups of min over the group
    std::size_t vacuous = 0;     // derivatives vanishing identically on the sampled set
    MultiIndex K0;
    Point worst_point;
};

// For each candidate K: ln(max over the sampled set of |F^(K)| / |F^(K)(z0)|).
GrowthRatio modulus_growth(const std::vector<std::vector<MultiIndex>>& groups,
                           const std::vector<std::vector<Expr>>& derivs, const Point& z0,
                           const std::vector<std::vector<double>>& maxima,
                           const std::vector<std::vector<Point>>& argmax) {
    GrowthRatio out;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        double best = kInf;
        MultiIndex bestK;
        Point bestP;
        for (std::size_t i = 0; i < groups[g].size(); ++i) {
            const double at0 = std::abs(derivs[g][i].eval(z0));
            const double mx = std::max(maxima[g][i], at0);
            double lr;
            if (at0 == 0.0) {
                if (mx == 0.0) {
                    ++out.vacuous;
                    lr = 0.0;  // 0 <= p * 0 holds for every p >= 1
                } else {
                    lr = kInf;
                }
            } else {
                lr = std::log(mx) - std::log(at0);
            }
            if (lr < best) {
                best = lr;
                bestK = groups[g][i];
                bestP = argmax[g][i];
            }
        }
        if (best > out.log_ratio) {
            out.log_ratio = best;
            out.K0 = bestK;
            out.worst_point = bestP;
        }
    }
    return out;
}

void finish_ratio_report(CriterionReport& rep, double worst_log, double log_bound, const Point& anchor,
                         const MultiIndex& K, const std::string& detail) {
    rep.worst_margin = worst_log == kNegInf ? kInf : log_bound - worst_log;
    const bool ok = worst_log <= log_bound + kLogTol;
    rep.verdict = verdict_from(ok, rep.samples_used, rep.samples_skipped);
    if (rep.verdict == Verdict::fail) rep.witness = Witness{anchor, K, detail};
}

double clamp_exp(double x) { return x > 709.0 ? kInf : std::exp(x); }

}  // namespace

// ---------------------------------------------------------------------------

int default_angles(int n) {
    if (n <= 2) return 64;
    if (n == 3) return 16;
    return 8;
}

std::vector<SkeletonMax> skeleton_max(const ModulusVecFn& moduli, std::size_t count, const Point& z0,
                                      const std::vector<double>& R, const SkeletonOptions& opt) {
    const int n = static_cast<int>(z0.size());
    if (R.size() != z0.size()) throw DomainError("radius vector does not match the dimension");
    if (opt.require_inside_ball && polydisc_outer_norm(z0, R) >= 1.0) {
        std::ostringstream os;
        os << "torus around the anchor reaches |z| = " << polydisc_outer_norm(z0, R);
        throw PolydiscEscapesBall(os.str());
    }
    std::vector<SkeletonMax> out(count);
    std::vector<std::vector<double>> theta(count, std::vector<double>(z0.size(), 0.0));
    std::size_t evals = 0;
    auto eval = [&](const Point& z) {
        ++evals;
        return moduli(z);
    };
    for (auto& s : out) s.argmax = torus_point(z0, R, std::vector<double>(z0.size(), 0.0));

    int m = opt.angles > 0 ? opt.angles : default_angles(n);
    std::vector<double> previous(count, -1.0);
    for (int level = 0; level <= opt.max_doublings; ++level) {
        const TorusGrid grid(z0, R, m);
        if (level > 0 && grid.size() > opt.max_points) break;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Point z = grid.point(i);
            const auto v = eval(z);
            for (std::size_t c = 0; c < count; ++c)
                if (v[c] > out[c].value) {
                    out[c].value = v[c];
                    out[c].argmax = z;
                    theta[c] = angles_of(z, z0);
                }
        }
        if (opt.polish) {
            // Compass search on the angles; only improvements are accepted, so
            // the value stays the modulus at a sampled torus point.
            for (std::size_t c = 0; c < count; ++c) {
                if (out[c].value == 0.0) continue;
                double step = std::numbers::pi / m;
                int budget = 400 * n;
                while (step > 1e-10 && budget > 0) {
                    bool improved = false;
                    for (int j = 0; j < n && budget > 0; ++j) {
                        if (R[static_cast<std::size_t>(j)] == 0.0) continue;
                        for (double dir : {1.0, -1.0}) {
                            auto t = theta[c];
                            t[static_cast<std::size_t>(j)] += dir * step;
                            const Point z = torus_point(z0, R, t);
                            const double v = eval(z)[c];
                            --budget;
                            if (v > out[c].value) {
                                out[c].value = v;
                                out[c].argmax = z;
                                theta[c] = t;
                                improved = true;
                                break;
                            }
                        }
                    }
                    if (!improved) step *= 0.5;
                }
            }
        }
        bool settled = level > 0;
        for (std::size_t c = 0; c < count; ++c) {
            out[c].trace.push_back(out[c].value);
            out[c].angles = m;
            const double scale = std::max(std::abs(out[c].value), std::numeric_limits<double>::min());
            if (std::abs(out[c].value - previous[c]) > opt.tol * scale) settled = false;
            previous[c] = out[c].value;
        }
        if (settled) {
            for (auto& s : out) s.converged = true;
            break;
        }
        m *= 2;
    }
    for (auto& s : out) s.evaluations = evals;
    return out;
}

SkeletonMax skeleton_max(const ModulusFn& modulus, const Point& z0, const std::vector<double>& R,
                         const SkeletonOptions& opt) {
    return skeleton_max([&](const Point& z) { return std::vector<double>{modulus(z)}; }, 1, z0, R, opt).front();
}

SkeletonMax skeleton_max(const Expr& F, const Point& z0, const std::vector<double>& R, const SkeletonOptions& opt) {
    return skeleton_max([&](const Point& z) { return std::abs(F.eval(z)); }, z0, R, opt);
}

SkeletonMax skeleton_max(const Jet& F, const std::vector<double>& R, const SkeletonOptions& opt) {
    return skeleton_max([&](const Point& z) { return std::abs(jet_eval(F, z)); }, F.anchor(), R, opt);
}

// ---------------------------------------------------------------------------

double thm1_log_p0(int N, double R_sum, const std::vector<double>& lambda1, const std::vector<double>& lambda2) {
    double lq = std::log(2.0 * (N + 1) * R_sum);
    double lbase = std::log(2.0);
    for (std::size_t j = 0; j < lambda1.size(); ++j) {
        lq += -N * std::log(lambda1[j]) + (N + 1) * std::log(lambda2[j]);
        lbase += -N * std::log(lambda1[j]) + N * std::log(lambda2[j]);
    }
    const double q = std::floor(clamp_exp(lq)) + 1.0;
    return q * lbase;
}

double ball_log_p0(int N, double r, double C, const std::vector<double>& lambda1, const std::vector<double>& lambda2) {
    const double n = static_cast<double>(lambda1.size());
    return thm1_log_p0(N, std::sqrt(n) * C * r, lambda1, lambda2);
}

CriterionReport check_thm1(const Expr& F, const LField& L, const std::vector<double>& R,
                           const std::vector<Point>& anchors, std::optional<int> n0, std::optional<double> p0,
                           const CriteriaOptions& opt) {
    require_anchors(anchors, "check_thm1");
    CriterionReport rep;
    rep.check = "thm1";
    const int N = n0 ? *n0 : sampled_index(F, L, anchors, opt.index_order, rep);
    const auto lb = estimate_lambda(L, R, anchors, opt.local);
    const double log_p0 = p0 ? std::log(*p0) : thm1_log_p0(N, sum(R), lb.lambda1, lb.lambda2);
    rep.constants["n0"] = N;
    rep.constants["log_p0"] = log_p0;
    rep.constants["p0"] = clamp_exp(log_p0);
    rep.constants["lambda1_min"] = *std::min_element(lb.lambda1.begin(), lb.lambda1.end());
    rep.constants["lambda2_max"] = *std::max_element(lb.lambda2.begin(), lb.lambda2.end());
    if (!p0) rep.notes.push_back("p0 from the proof formula with sampled lambda bounds (inner estimates)");

    std::vector<DerivRatio> res(anchors.size());
    parallel_for(anchors.size(), [&](std::size_t a) {
        res[a] = normalized_ratio(F, L, anchors[a], local_points(L, anchors[a], R, opt.local), N);
    });
    double worst = kNegInf;
    std::size_t wa = 0, vacuous = 0;
    for (std::size_t a = 0; a < res.size(); ++a) {
        ++rep.samples_used;
        if (res[a].vacuous) ++vacuous;
        if (res[a].log_ratio > worst) {
            worst = res[a].log_ratio;
            wa = a;
        }
    }
    rep.constants["vacuous_anchors"] = static_cast<double>(vacuous);
    rep.constants["p0_realized"] = clamp_exp(worst);
    finish_ratio_report(rep, worst, log_p0, anchors[wa], res[wa].K0,
                        "normalized derivatives on the polydisc exceed p0 times the anchor value");
    return rep;
}

namespace {

// Shared driver for the modulus-growth checks on polydiscs and balls.
template <class SetMaxima>
CriterionReport growth_check(const Expr& F, const std::vector<Point>& anchors, int N, bool axis, double log_p,
                             CriterionReport rep, SetMaxima&& maxima_at) {
    const int n = static_cast<int>(anchors.front().size());
    const auto groups = candidate_groups(n, N, axis);
    std::vector<std::vector<Expr>> derivs(groups.size());
    std::vector<Expr> flat;
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (const auto& K : groups[g]) {
            derivs[g].push_back(differentiate(F, K));
            flat.push_back(derivs[g].back());
        }
    std::vector<GrowthRatio> res(anchors.size());
    parallel_for(anchors.size(), [&](std::size_t a) {
        std::vector<double> mx;
        std::vector<Point> arg;
        maxima_at(a, flat, mx, arg);
        std::vector<std::vector<double>> gm(groups.size());
        std::vector<std::vector<Point>> ga(groups.size());
        std::size_t k = 0;
        for (std::size_t g = 0; g < groups.size(); ++g)
            for (std::size_t i = 0; i < groups[g].size(); ++i, ++k) {
                gm[g].push_back(mx[k]);
                ga[g].push_back(arg[k]);
            }
        res[a] = modulus_growth(groups, derivs, anchors[a], gm, ga);
    });
    double worst = kNegInf;
    std::size_t wa = 0, vacuous = 0;
    for (std::size_t a = 0; a < res.size(); ++a) {
        ++rep.samples_used;
        vacuous += res[a].vacuous;
        if (res[a].log_ratio > worst) {
            worst = res[a].log_ratio;
            wa = a;
        }
    }
    rep.constants["n0"] = N;
    rep.constants["log_p"] = log_p;
    rep.constants["p"] = clamp_exp(log_p);
    rep.constants["p_realized"] = clamp_exp(worst);
    rep.constants["vacuous_derivatives"] = static_cast<double>(vacuous);
    if (vacuous > 0) rep.notes.push_back("identically vanishing derivatives counted as vacuously satisfied");
    finish_ratio_report(rep, worst, log_p, anchors[wa], res[wa].K0,
                        "no admissible K0 keeps the modulus growth below p");
    return rep;
}

}  // namespace

CriterionReport check_thm2(const Expr& F, const LField& L, const std::vector<double>& R,
                           const std::vector<Point>& anchors, Thm2Mode mode, std::optional<int> n0,
                           std::optional<double> p, const CriteriaOptions& opt) {
    require_anchors(anchors, "check_thm2");
    CriterionReport rep;
    rep.check = mode == Thm2Mode::necessary ? "thm2_necessary" : "thm2_axis";
    const int N = n0 ? *n0 : sampled_index(F, L, anchors, opt.index_order, rep);
    double log_p;
    if (p) {
        log_p = std::log(*p);
    } else {
        const auto lb = estimate_lambda(L, R, anchors, opt.local);
        log_p = thm1_log_p0(N, sum(R), lb.lambda1, lb.lambda2);
        for (double l2 : lb.lambda2) log_p += N * std::log(l2);
        rep.notes.push_back("p = p0 prod lambda2^n0 with sampled lambda bounds");
    }
    return growth_check(F, anchors, N, mode == Thm2Mode::axis_sufficient, log_p, rep,
                        [&](std::size_t a, const std::vector<Expr>& d, std::vector<double>& mx, std::vector<Point>& arg) {
                            const auto radii = local_radii(L, anchors[a], R, LocalShape::polydisc);
                            const auto sk = skeleton_max(
                                [&](const Point& z) {
                                    std::vector<double> v(d.size());
                                    for (std::size_t i = 0; i < d.size(); ++i) v[i] = std::abs(d[i].eval(z));
                                    return v;
                                },
                                d.size(), anchors[a], radii, opt.skeleton);
                            for (const auto& s : sk) {
                                mx.push_back(s.value);
                                arg.push_back(s.argmax);
                            }
                        });
}

CriterionReport check_thm5(const Expr& F, const LField& L, const std::vector<double>& Rp,
                           const std::vector<double>& Rpp, const std::vector<Point>& anchors,
                           const CriteriaOptions& opt) {
    require_anchors(anchors, "check_thm5");
    const double np = euclid_norm(Point(Rp.begin(), Rp.end())), npp = euclid_norm(Point(Rpp.begin(), Rpp.end()));
    if (!(0.0 < np && np < npp && npp < L.beta())) throw DomainError("check_thm5 needs 0 < |R'| < |R''| < beta");
    CriterionReport rep;
    rep.check = "thm5";
    struct Res {
        bool zero = false;
        double log_ratio = kNegInf;
        Point where;
    };
    std::vector<Res> res(anchors.size());
    parallel_for(anchors.size(), [&](std::size_t a) {
        const Point& z0 = anchors[a];
        const auto r1 = local_radii(L, z0, Rp, LocalShape::polydisc);
        const auto r2 = local_radii(L, z0, Rpp, LocalShape::polydisc);
        const auto m1 = skeleton_max(F, z0, r1, opt.skeleton);
        const auto m2 = skeleton_max(F, z0, r2, opt.skeleton);
        if (m1.value == 0.0) {
            if (m2.value != 0.0) throw ZeroDenominator("M(R'/L(z0)) = 0 while M(R''/L(z0)) > 0");
            res[a].zero = true;
            return;
        }
        // The quotient is taken before the logarithm so that F -> lambda F
        // leaves it unchanged whenever the scaling itself is exact.
        res[a].log_ratio = std::log(m2.value / m1.value);
        res[a].where = m2.argmax;
    });
    double worst = kNegInf;
    std::size_t wa = 0;
    for (std::size_t a = 0; a < res.size(); ++a) {
        if (res[a].zero) {
            ++rep.samples_skipped;
            continue;
        }
        ++rep.samples_used;
        if (res[a].log_ratio > worst) {
            worst = res[a].log_ratio;
            wa = a;
        }
    }
    if (rep.samples_used == 0) {
        // F vanishes on every sampled skeleton: F = 0, the ratio is 1 by convention.
        rep.constants["p1"] = 1.0;
        rep.constants["zero_function"] = 1.0;
        rep.verdict = Verdict::pass;
        rep.worst_margin = std::log(opt.threshold);
        return rep;
    }
    const double p1 = std::exp(std::max(worst, 0.0));
    rep.constants["p1"] = p1;
    rep.constants["log_p1"] = worst;

    bool split = true;
    double min_rpp = kInf, s = 0.0;
    for (std::size_t j = 0; j < Rp.size(); ++j) {
        split = split && Rp[j] < 1.0 && Rpp[j] > 1.0;
        min_rpp = std::min(min_rpp, Rpp[j]);
        if (Rp[j] < 1.0) s -= std::log1p(-Rp[j]);
    }
    if (split) {
        const double lp = std::log(p1);
        rep.constants["index_bound_log_denominator"] = (lp + s) / std::log(min_rpp);
        rep.constants["index_bound_linear_denominator"] = (lp + s) / min_rpp;
        rep.notes.push_back("index bound from p1 reported with both ln(min r'') and min r'' denominators");
    }
    finish_ratio_report(rep, worst, std::log(opt.threshold), anchors[wa], MultiIndex(Rp.size(), 0),
                        "skeleton maximum ratio exceeds the threshold");
    return rep;
}

CriterionReport check_directional(const Expr& F, const LField& L, int j, double r1, double r2,
                                  const std::vector<Point>& anchors, const CriteriaOptions& opt) {
    require_anchors(anchors, "check_directional");
    const int n = L.dim();
    if (j < 0 || j >= n) throw ArityError("direction index out of range");
    if (!(0.0 < r1 && r1 < r2 && r2 <= L.beta() / std::sqrt(static_cast<double>(n)) * (1 + 1e-15)))
        throw DomainError("check_directional needs 0 < r1 < r2 <= beta/sqrt(n)");
    CriterionReport rep;
    rep.check = "directional";
    const auto ju = static_cast<std::size_t>(j);
    struct Res {
        bool zero = false;
        double log_ratio = kNegInf;
    };
    std::vector<Res> res(anchors.size());
    parallel_for(anchors.size(), [&](std::size_t a) {
        const Point& z0 = anchors[a];
        const double lj = L(j, z0);
        std::vector<double> rad(z0.size(), 0.0);
        rad[ju] = r2 / lj;
        if (polydisc_outer_norm(z0, rad) >= 1.0) throw PolydiscEscapesBall("directional circle leaves the ball");
        auto circle = [&](double radius) {
            SkeletonOptions so = opt.skeleton;
            so.require_inside_ball = false;
            return skeleton_max(
                       [&](const Point& w) {
                           Point z = z0;
                           z[ju] = w[0];
                           return std::abs(F.eval(z));
                       },
                       Point{z0[ju]}, {radius}, so)
                .value;
        };
        const double m1 = circle(r1 / lj), m2 = circle(r2 / lj);
        if (m1 == 0.0) {
            if (m2 != 0.0) throw ZeroDenominator("circle maximum vanishes at the inner radius only");
            res[a].zero = true;
            return;
        }
        res[a].log_ratio = std::log(m2 / m1);
    });
    double worst = kNegInf;
    std::size_t wa = 0;
    for (std::size_t a = 0; a < res.size(); ++a) {
        if (res[a].zero) {
            ++rep.samples_skipped;
            continue;
        }
        ++rep.samples_used;
        if (res[a].log_ratio > worst) {
            worst = res[a].log_ratio;
            wa = a;
        }
    }
    rep.constants["j"] = j;
    rep.constants["p_j"] = rep.samples_used ? std::exp(std::max(worst, 0.0)) : 1.0;
    if (rep.samples_used == 0) {
        rep.verdict = Verdict::pass;
        rep.constants["zero_function"] = 1.0;
        rep.worst_margin = std::log(opt.threshold);
        return rep;
    }
    MultiIndex K(static_cast<std::size_t>(n), 0);
    finish_ratio_report(rep, worst, std::log(opt.threshold), anchors[wa], K, "circle maximum ratio exceeds the threshold");
    return rep;
}

double hayman_reference_S(double beta, int n) {
    const double b2 = beta * beta;
    return 2.0 * beta * (2.0 * b2 + 1.0) * std::sqrt(static_cast<double>(n)) / (2.0 * b2 - 1.0);
}

CriterionReport check_hayman(const Expr& F, const LField& L, int p, const std::vector<Point>& anchors,
                             std::optional<double> c, const CriteriaOptions& opt) {
    require_anchors(anchors, "check_hayman");
    if (p < 0) throw DomainError("check_hayman needs p >= 0");
    const int n = L.dim();
    CriterionReport rep;
    rep.check = "hayman";
    struct Res {
        bool skipped = false;
        double log_ratio = kNegInf;
        MultiIndex J;
    };
    std::vector<Res> res(anchors.size());
    parallel_for(anchors.size(), [&](std::size_t a) {
        const Jet jet = jet_from_expr(F, anchors[a], p + 1);
        const auto l = L.eval(anchors[a]);
        const auto v = log_derivatives_over_weights(jet, l);
        double num = kNegInf, den = kNegInf;
        std::size_t pn = 0;
        for (std::size_t pos = 0; pos < v.size(); ++pos) {
            if (jet.table().norm_at(pos) == p + 1) {
                if (v[pos] > num) {
                    num = v[pos];
                    pn = pos;
                }
            } else {
                den = std::max(den, v[pos]);
            }
        }
        res[a].J = jet.table().index(pn);
        if (den == kNegInf) {
            if (num == kNegInf) res[a].skipped = true;
            else res[a].log_ratio = kInf;
            return;
        }
        if (num == kNegInf) return;
        // Low orders are compared in the linear domain, which keeps the ratio
        // exactly invariant under exact rescalings of F.
        auto linear = [&](std::size_t pos) {
            const auto k = jet.table().at(pos);
            double w = std::abs(jet[pos]) * factorial(k);
            for (std::size_t j = 0; j < k.size(); ++j) w /= std::pow(l[j], k[j]);
            return w;
        };
        double wn = 0.0, wd = 0.0;
        if (p + 1 <= 30)
            for (std::size_t pos = 0; pos < v.size(); ++pos) {
                const double w = linear(pos);
                if (jet.table().norm_at(pos) == p + 1) wn = std::max(wn, w);
                else wd = std::max(wd, w);
            }
        const bool finite = p + 1 <= 30 && std::isfinite(wn) && wd > 0.0 && std::isfinite(wd);
        res[a].log_ratio = finite ? std::log(wn / wd) : num - den;
    });
    double worst = kNegInf;
    std::size_t wa = 0;
    for (std::size_t a = 0; a < res.size(); ++a) {
        if (res[a].skipped) {
            ++rep.samples_skipped;
            continue;
        }
        ++rep.samples_used;
        if (res[a].log_ratio > worst) {
            worst = res[a].log_ratio;
            wa = a;
        }
    }
    const double necessity = std::pow(factorial(p + 1), n);
    rep.constants["p"] = p;
    rep.constants["c_star"] = worst == kNegInf ? 0.0 : clamp_exp(worst);
    rep.constants["log_c_star"] = worst;
    rep.constants["c_necessity"] = necessity;
    rep.constants["S"] = hayman_reference_S(L.beta(), n);
    const double bound = c ? *c : opt.threshold;
    if (c) rep.constants["c"] = *c;
    if (rep.samples_used == 0 && rep.samples_skipped > 0) {
        rep.verdict = Verdict::indeterminate;
        rep.notes.push_back("every sample had vanishing derivatives up to order p + 1");
        return rep;
    }
    finish_ratio_report(rep, worst, std::log(bound), anchors[wa], res[wa].J,
                        c ? "order p+1 shell exceeds c times the lower shells" : "ratio exceeds the threshold");
    return rep;
}

CriterionReport check_tail(const Expr& F, const LField& L, int N, std::optional<double> c,
                           const std::vector<Point>& anchors, const TailOptions& tail, const CriteriaOptions& opt) {
    require_anchors(anchors, "check_tail");
    const int n = L.dim();
    const int cap = tail.tail_cap;
    if (N < 0 || cap <= N) throw DomainError("check_tail needs 0 <= N < tail_cap");
    std::vector<double> theta = tail.theta.empty() ? std::vector<double>(static_cast<std::size_t>(n), 0.5) : tail.theta;
    for (double t : theta)
        if (!(t > 0.0 && t < 1.0)) throw DomainError("theta entries must lie in (0, 1)");
    const auto degree = polynomial_degree(F);
    const bool exact_table = degree && *degree <= cap;

    // sum_{||J|| > cap} Theta^J = prod 1/(1 - theta_s) - sum_{||J|| <= cap} Theta^J
    double theta_tail = 1.0;
    for (double t : theta) theta_tail /= (1.0 - t);
    {
        const auto table = IndexTable::get(n, cap);
        double head = 0.0;
        for (std::size_t pos = 0; pos < table->size(); ++pos) {
            double t = 1.0;
            const auto k = table->at(pos);
            for (std::size_t j = 0; j < k.size(); ++j) t *= std::pow(theta[j], k[j]);
            head += t;
        }
        theta_tail = std::max(0.0, theta_tail - head);
    }

    CriterionReport rep;
    rep.check = "tail";
    struct Res {
        bool skipped = false;
        bool unavailable = false;
        double head = 0.0, rest = 0.0;
    };
    std::vector<Res> res(anchors.size());
    const int guard = IndexOptions{}.guard;
    parallel_for(anchors.size(), [&](std::size_t a) {
        const Jet jet = jet_from_expr(F, anchors[a], cap);
        const auto l = L.eval(anchors[a]);
        const auto q = log_normalized_derivatives(jet, l);
        for (std::size_t pos = 0; pos < q.size(); ++pos) {
            if (q[pos] == kNegInf) continue;
            (jet.table().norm_at(pos) <= N ? res[a].head : res[a].rest) += std::exp(q[pos]);
        }
        if (!exact_table) {
            std::vector<double> lt(l.size());
            for (std::size_t j = 0; j < l.size(); ++j) lt[j] = theta[j] * l[j];
            const auto qt = log_normalized_derivatives(jet, lt);
            const int dv = cap - guard;
            double best = kNegInf;
            int first = -1;
            for (std::size_t pos = 0; pos < qt.size(); ++pos) {
                if (jet.table().norm_at(pos) > dv) continue;
                if (qt[pos] > best + kLogTol) {
                    best = qt[pos];
                    first = jet.table().norm_at(pos);
                }
            }
            if (first > dv - 2) {
                res[a].unavailable = true;
                return;
            }
            res[a].rest += best == kNegInf ? 0.0 : std::exp(best) * theta_tail;
        }
        if (res[a].head == 0.0 && res[a].rest == 0.0) res[a].skipped = true;
    });

    double worst = kInf;  // min head/rest
    std::size_t wa = 0, unavailable = 0;
    bool ok = true;
    for (std::size_t a = 0; a < res.size(); ++a) {
        if (res[a].skipped || res[a].unavailable) {
            ++rep.samples_skipped;
            unavailable += res[a].unavailable;
            continue;
        }
        ++rep.samples_used;
        const double ratio = res[a].rest == 0.0 ? kInf : res[a].head / res[a].rest;
        if (ratio < worst) {
            worst = ratio;
            wa = a;
        }
        if (c && res[a].head < *c * res[a].rest) ok = false;
    }
    if (unavailable == res.size())
        throw TailBoundUnavailable("Theta L index is not certified by a jet of order tail_cap at any anchor");
    double ref = 1.0, ref_inv = 1.0;
    for (double t : theta) {
        ref *= t / (1.0 - t);
        ref_inv *= (1.0 - t) / t;
    }
    rep.constants["N"] = N;
    rep.constants["tail_cap"] = cap;
    rep.constants["c_star"] = worst;
    rep.constants["c_reference"] = ref;
    rep.constants["c_reference_reciprocal"] = ref_inv;
    rep.constants["majorant_unavailable"] = static_cast<double>(unavailable);
    if (c) rep.constants["c"] = *c;
    if (!exact_table) rep.notes.push_back("tail beyond the cap bounded through the local index of Theta L");
    if (!c) ok = worst >= 1.0 / opt.threshold;
    const double target = c ? *c : 1.0 / opt.threshold;
    rep.worst_margin = worst == kInf ? kInf : std::log(worst) - std::log(target);
    rep.verdict = verdict_from(ok, rep.samples_used, rep.samples_skipped);
    if (rep.verdict == Verdict::fail)
        rep.witness = Witness{anchors[wa], MultiIndex(static_cast<std::size_t>(n), 0),
                              "lower shells do not dominate the tail"};
    return rep;
}

CriterionReport check_thm3_equiv(const Expr& F, const LField& L, const LField& Ltilde,
                                 const std::vector<double>& theta1, const std::vector<double>& theta2,
                                 const std::vector<Point>& anchors, int p, const CriteriaOptions& opt) {
    require_anchors(anchors, "check_thm3_equiv");
    const int n = L.dim();
    if (Ltilde.dim() != n || static_cast<int>(theta1.size()) != n || static_cast<int>(theta2.size()) != n)
        throw DomainError("dimension mismatch in check_thm3_equiv");
    for (const auto& z : anchors)
        for (int j = 0; j < n; ++j) {
            const auto ju = static_cast<std::size_t>(j);
            const double l = L(j, z), lt = Ltilde(j, z);
            if (l < theta1[ju] * lt * (1 - 1e-12) || l > theta2[ju] * lt * (1 + 1e-12)) {
                std::ostringstream os;
                os << "component " << j + 1 << ": l = " << l << ", l~ = " << lt << " at |z| = " << euclid_norm(z);
                throw SandwichViolated(os.str());
            }
        }
    const auto a = check_hayman(F, L, p, anchors, std::nullopt, opt);
    const auto b = check_hayman(F, Ltilde, p, anchors, std::nullopt, opt);
    CriterionReport rep;
    rep.check = "thm3_equiv";
    rep.constants["p"] = p;
    rep.constants["c_star_L"] = a.constants.at("c_star");
    rep.constants["c_star_Ltilde"] = b.constants.at("c_star");
    rep.samples_used = a.samples_used + b.samples_used;
    rep.samples_skipped = a.samples_skipped + b.samples_skipped;
    if (a.verdict == Verdict::indeterminate || b.verdict == Verdict::indeterminate) {
        rep.verdict = Verdict::indeterminate;
        return rep;
    }
    const bool agree = a.verdict == b.verdict;
    rep.verdict = agree ? Verdict::pass : Verdict::fail;
    rep.worst_margin = agree ? std::min(a.worst_margin, b.worst_margin) : -std::abs(a.worst_margin - b.worst_margin);
    if (!agree) rep.witness = a.verdict == Verdict::fail ? a.witness : b.witness;
    if (!rep.witness && !agree) rep.witness = Witness{anchors.front(), {}, "verdicts differ"};
    return rep;
}

CriterionReport check_ball_variant(const Expr& F, const LField& L, double r, const std::vector<Point>& anchors,
                                   BallMode mode, std::optional<int> n0, std::optional<double> p,
                                   const CriteriaOptions& opt) {
    require_anchors(anchors, "check_ball_variant");
    if (!(r > 0.0 && r <= L.beta() * (1 + 1e-15))) throw DomainError("ball radius r must lie in (0, beta]");
    const bool big = mode == BallMode::necessary || mode == BallMode::modmax;  // r / Ell(z0)
    CriterionReport rep;
    switch (mode) {
        case BallMode::necessary: rep.check = "ball_necessary"; break;
        case BallMode::sufficient: rep.check = "ball_sufficient"; break;
        case BallMode::modmax: rep.check = "ball_modmax"; break;
        case BallMode::modmax_axis: rep.check = "ball_modmax_axis"; break;
    }
    const int N = n0 ? *n0 : sampled_index(F, L, anchors, opt.index_order, rep);

    LocalSampling ls = opt.local;
    ls.shape = LocalShape::ball;
    ls.seed = opt.seed;
    const auto lb = estimate_lambda(L, {r}, anchors, ls);
    double C = 1.0;
    for (const auto& z : anchors) C = std::max(C, L.Ell(z) / L.ell(z));
    double log_bound;
    if (mode == BallMode::necessary || mode == BallMode::sufficient) {
        log_bound = p ? std::log(*p) : ball_log_p0(N, r, big ? 1.0 : C, lb.lambda1, lb.lambda2);
    } else if (p) {
        log_bound = std::log(*p);
    } else {
        log_bound = ball_log_p0(N, r, big ? 1.0 : C, lb.lambda1, lb.lambda2);
        for (double l2 : lb.lambda2) log_bound += N * std::log(l2);
    }
    rep.constants["r"] = r;
    rep.constants["C"] = C;
    rep.constants["lambda1_min"] = *std::min_element(lb.lambda1.begin(), lb.lambda1.end());
    rep.constants["lambda2_max"] = *std::max_element(lb.lambda2.begin(), lb.lambda2.end());

    auto ball_points = [&](std::size_t a) {
        const Point& z0 = anchors[a];
        const double rad = r / (big ? L.Ell(z0) : L.ell(z0));
        if (euclid_norm(z0) + rad >= 1.0) throw BallEscapesDomain("local ball around an anchor leaves the unit ball");
        auto rng = anchor_rng(opt.seed, a);
        std::vector<Point> pts{z0};
        auto in = mc_ball(z0, rad, opt.mc_interior, rng);
        auto on = mc_sphere(z0, rad, opt.mc_sphere, rng);
        pts.insert(pts.end(), in.begin(), in.end());
        pts.insert(pts.end(), on.begin(), on.end());
        return pts;
    };

    if (mode == BallMode::necessary || mode == BallMode::sufficient) {
        std::vector<DerivRatio> res(anchors.size());
        parallel_for(anchors.size(), [&](std::size_t a) { res[a] = normalized_ratio(F, L, anchors[a], ball_points(a), N); });
        double worst = kNegInf;
        std::size_t wa = 0;
        for (std::size_t a = 0; a < res.size(); ++a) {
            ++rep.samples_used;
            if (res[a].log_ratio > worst) {
                worst = res[a].log_ratio;
                wa = a;
            }
        }
        rep.constants["n0"] = N;
        rep.constants["log_p0"] = log_bound;
        rep.constants["p0"] = clamp_exp(log_bound);
        rep.constants["p0_realized"] = clamp_exp(worst);
        finish_ratio_report(rep, worst, log_bound, anchors[wa], res[wa].K0,
                            "normalized derivatives on the ball exceed p0 times the anchor value");
        return rep;
    }
    return growth_check(F, anchors, N, mode == BallMode::modmax_axis, log_bound, rep,
                        [&](std::size_t a, const std::vector<Expr>& d, std::vector<double>& mx, std::vector<Point>& arg) {
                            mx.assign(d.size(), 0.0);
                            arg.assign(d.size(), anchors[a]);
                            for (const auto& z : ball_points(a))
                                for (std::size_t i = 0; i < d.size(); ++i) {
                                    const double v = std::abs(d[i].eval(z));
                                    if (v > mx[i]) {
                                        mx[i] = v;
                                        arg[i] = z;
                                    }
                                }
                        });
}

CriterionReport check_index_cap(const Expr& F, const LField& L, int n0, const std::vector<Point>& anchors, int order) {
    require_anchors(anchors, "check_index_cap");
    CriterionReport rep;
    rep.check = "index_cap";
    rep.constants["n0"] = n0;
    const int guard = IndexOptions{}.guard;
    struct Res {
        bool uncertified = false;
        double margin = kInf;
        MultiIndex J;
    };
    std::vector<Res> res(anchors.size());
    parallel_for(anchors.size(), [&](std::size_t a) {
        const Jet jet = jet_from_expr(F, anchors[a], order);
        const int dv = std::min(jet.valid_order(), jet.order()) - guard;
        if (n0 > dv) {
            res[a].uncertified = true;
            return;
        }
        const auto q = log_normalized_derivatives(jet, L.eval(anchors[a]));
        double low = kNegInf, high = kNegInf;
        for (std::size_t pos = 0; pos < q.size(); ++pos) {
            const int k = jet.table().norm_at(pos);
            if (k <= n0) {
                low = std::max(low, q[pos]);
            } else if (k <= dv && q[pos] > high) {
                high = q[pos];
                res[a].J = jet.table().index(pos);
            }
        }
        if (high == kNegInf) return;
        res[a].margin = low == kNegInf ? kNegInf : low - high;
    });
    double worst = kInf;
    std::size_t wa = 0;
    for (std::size_t a = 0; a < res.size(); ++a) {
        if (res[a].uncertified) {
            ++rep.samples_skipped;
            continue;
        }
        ++rep.samples_used;
        if (res[a].margin < worst) {
            worst = res[a].margin;
            wa = a;
        }
    }
    rep.worst_margin = worst;
    const bool ok = worst >= -kLogTol;
    rep.verdict = verdict_from(ok, rep.samples_used, rep.samples_skipped);
    if (rep.verdict == Verdict::fail)
        rep.witness = Witness{anchors[wa], res[wa].J, "a normalized derivative above n0 exceeds the capped maximum"};
    return rep;
}

}  // namespace lindex
