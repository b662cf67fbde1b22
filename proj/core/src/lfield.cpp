#include "lindex/lfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lindex/errors.hpp"
#include "lindex/jet.hpp"
#include "lindex/parallel.hpp"
#include "lindex/sampling.hpp"

namespace lindex {

LField::LField(double beta, std::vector<Expr> components) : beta_(beta), comps_(std::move(components)) {
    if (comps_.empty()) throw InvalidBeta("L needs at least one component");
    const double root = std::sqrt(static_cast<double>(comps_.size()));
    if (!(beta_ > root)) {
        std::ostringstream os;
        os << "beta = " << beta_ << " must exceed sqrt(n) = " << root;
        throw InvalidBeta(os.str());
    }
}

std::vector<double> LField::eval(std::span<const cplx> z) const {
    std::vector<double> l(comps_.size());
    for (std::size_t j = 0; j < comps_.size(); ++j) l[j] = comps_[j].eval_real(z);
    return l;
}

double LField::ell(std::span<const cplx> z) const {
    const auto l = eval(z);
    return *std::min_element(l.begin(), l.end());
}

double LField::Ell(std::span<const cplx> z) const {
    const auto l = eval(z);
    return *std::max_element(l.begin(), l.end());
}

LField LField::scaled(double factor) const {
    std::vector<Expr> c;
    c.reserve(comps_.size());
    for (const auto& e : comps_) c.push_back(Expr::constant(factor) * e);
    return LField(beta_, std::move(c));
}

double log_weight_power(const std::vector<double>& l, std::span<const int> k) {
    double s = 0.0;
    for (std::size_t j = 0; j < l.size(); ++j)
        if (k[j] != 0) s += k[j] * std::log(l[j]);
    return s;
}

CriterionReport check_cone_condition(const LField& L, const std::vector<Point>& grid) {
    if (grid.empty()) throw EmptyGrid("cone condition needs sample points");
    CriterionReport rep;
    rep.check = "cone_condition";
    const int n = L.dim();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& z : grid) {
        const double r = euclid_norm(z);
        const auto l = L.eval(z);
        for (int j = 0; j < n; ++j) {
            const double ratio = l[static_cast<std::size_t>(j)] * (1.0 - r) / L.beta();
            if (ratio < worst) {
                worst = ratio;
                MultiIndex e(static_cast<std::size_t>(n), 0);
                e[static_cast<std::size_t>(j)] = 1;
                rep.witness = Witness{z, e, "min of l_j(z)(1-|z|)/beta"};
            }
        }
        ++rep.samples_used;
    }

    // Along the ray through each sample, |z_j| l_j(t u) should grow toward the boundary.
    std::size_t flagged = 0;
    const std::size_t rays = std::min<std::size_t>(grid.size(), 64);
    for (std::size_t s = 0; s < rays; ++s) {
        const double r = euclid_norm(grid[s]);
        if (r == 0.0) continue;
        bool ok = true;
        std::vector<double> prev(static_cast<std::size_t>(n), -1.0);
        for (int step = 1; step <= 64 && ok; ++step) {
            const double t = (1.0 - kBoundaryExclusion) * step / 64.0;
            Point z = grid[s];
            for (auto& v : z) v *= t / r;
            const auto l = L.eval(z);
            for (int j = 0; j < n; ++j) {
                const double v = std::abs(z[static_cast<std::size_t>(j)]) * l[static_cast<std::size_t>(j)];
                if (v < prev[static_cast<std::size_t>(j)] * (1.0 - 1e-12)) ok = false;
                prev[static_cast<std::size_t>(j)] = v;
            }
        }
        if (!ok) ++flagged;
    }

    rep.constants["min_ratio"] = worst;
    rep.constants["beta"] = L.beta();
    rep.constants["radial_rays_checked"] = static_cast<double>(rays);
    rep.constants["radial_rays_flagged"] = static_cast<double>(flagged);
    rep.worst_margin = worst - 1.0;
    rep.verdict = worst > 1.0 ? Verdict::pass : Verdict::fail;
    if (rep.verdict == Verdict::pass) rep.witness.reset();
    if (flagged > 0) rep.notes.push_back("|z_j| l_j decreases along some sampled radial rays");
    return rep;
}

std::vector<double> local_radii(const LField& L, const Point& z0, const std::vector<double>& R, LocalShape shape) {
    if (shape == LocalShape::ball) return {R.at(0) / L.ell(z0)};
    const auto l = L.eval(z0);
    std::vector<double> rad(l.size());
    for (std::size_t j = 0; j < l.size(); ++j) rad[j] = R.at(j) / l[j];
    return rad;
}

std::vector<Point> local_points(const LField& L, const Point& z0, const std::vector<double>& R,
                                const LocalSampling& spec) {
    if (!spec.scales.empty()) {
        LocalSampling single = spec;
        single.scales.clear();
        std::vector<Point> pts;
        for (double s : spec.scales) {
            std::vector<double> Rs(R);
            for (auto& r : Rs) r *= s;
            auto part = local_points(L, z0, Rs, single);
            pts.insert(pts.end(), part.begin(), part.end());
        }
        return pts;
    }
    std::vector<Point> pts{z0};
    const auto rad = local_radii(L, z0, R, spec.shape);
    if (spec.shape == LocalShape::polydisc) {
        auto inner = halton_polydisc(z0, rad, spec.interior, spec.seed);
        pts.insert(pts.end(), inner.begin(), inner.end());
        TorusGrid sk(z0, rad, spec.skeleton_angles);
        for (std::size_t i = 0; i < sk.size(); ++i) pts.push_back(sk.point(i));
    } else {
        std::mt19937_64 rng(spec.seed);
        auto inner = mc_ball(z0, rad[0], spec.interior, rng);
        auto outer = mc_sphere(z0, rad[0], spec.sphere, rng);
        pts.insert(pts.end(), inner.begin(), inner.end());
        pts.insert(pts.end(), outer.begin(), outer.end());
    }
    return pts;
}

namespace {

bool region_inside_ball(const Point& z0, const std::vector<double>& rad, LocalShape shape) {
    const double outer = shape == LocalShape::polydisc ? polydisc_outer_norm(z0, rad) : euclid_norm(z0) + rad[0];
    return outer < 1.0;
}

}  // namespace

LambdaBounds estimate_lambda(const LField& L, const std::vector<double>& R, const std::vector<Point>& anchors,
                             const LocalSampling& local) {
    const int n = L.dim();
    LambdaBounds out;
    out.R = R;
    out.lambda1.assign(static_cast<std::size_t>(n), 1.0);
    out.lambda2.assign(static_cast<std::size_t>(n), 1.0);
    out.witness_min.assign(static_cast<std::size_t>(n), Point{});
    out.witness_max.assign(static_cast<std::size_t>(n), Point{});

    struct Partial {
        bool skipped = false;
        std::size_t points = 0;
        std::vector<double> lo, hi;
        std::vector<Point> wlo, whi;
    };
    std::vector<Partial> parts(anchors.size());
    parallel_for(anchors.size(), [&](std::size_t a) {
        const Point& z0 = anchors[a];
        Partial& p = parts[a];
        const auto rad = local_radii(L, z0, R, local.shape);
        if (!region_inside_ball(z0, rad, local.shape)) {
            if (local.skip_escaping) {
                p.skipped = true;
                return;
            }
            std::ostringstream os;
            os << "local region around anchor #" << a << " leaves the unit ball";
            if (local.shape == LocalShape::ball) throw BallEscapesDomain(os.str());
            throw PolydiscEscapesBall(os.str());
        }
        const auto l0 = L.eval(z0);
        p.lo.assign(static_cast<std::size_t>(n), 1.0);
        p.hi.assign(static_cast<std::size_t>(n), 1.0);
        p.wlo.assign(static_cast<std::size_t>(n), z0);
        p.whi.assign(static_cast<std::size_t>(n), z0);
        for (const auto& z : local_points(L, z0, R, local)) {
            const auto l = L.eval(z);
            for (std::size_t j = 0; j < l.size(); ++j) {
                const double q = l[j] / l0[j];
                if (q < p.lo[j]) {
                    p.lo[j] = q;
                    p.wlo[j] = z;
                }
                if (q > p.hi[j]) {
                    p.hi[j] = q;
                    p.whi[j] = z;
                }
            }
            ++p.points;
        }
    });
    for (const auto& p : parts) {
        if (p.skipped) {
            ++out.anchors_skipped;
            continue;
        }
        ++out.anchors_used;
        out.points_used += p.points;
        for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
            if (p.lo[j] < out.lambda1[j]) {
                out.lambda1[j] = p.lo[j];
                out.witness_min[j] = p.wlo[j];
            }
            if (p.hi[j] > out.lambda2[j]) {
                out.lambda2[j] = p.hi[j];
                out.witness_max[j] = p.whi[j];
            }
        }
    }
    return out;
}

CriterionReport check_Q_membership(const LField& L, const std::vector<std::vector<double>>& R_grid,
                                   const std::vector<Point>& anchors, const LocalSampling& local, double threshold) {
    CriterionReport rep;
    rep.check = local.shape == LocalShape::polydisc ? "Q_membership" : "Q_prime_membership";
    const int n = L.dim();
    double worst_l1 = 1.0, worst_l2 = 1.0, sup_pair = 1.0;
    std::size_t pairs = 0;
    for (const auto& R : R_grid) {
        const LambdaBounds b = estimate_lambda(L, R, anchors, local);
        rep.samples_used += b.points_used;
        rep.samples_skipped += b.anchors_skipped;
        for (int j = 0; j < n; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            if (b.lambda1[uj] < worst_l1) {
                worst_l1 = b.lambda1[uj];
                rep.witness = Witness{b.witness_min[uj], {}, "lambda1 minimiser"};
            }
            if (b.lambda2[uj] > worst_l2) {
                worst_l2 = b.lambda2[uj];
                rep.witness = Witness{b.witness_max[uj], {}, "lambda2 maximiser"};
            }
        }
        // Single-condition form: pairs z, w with |z_k - w_k| <= r_k / min(l_k(z), l_k(w)).
        for (const auto& w : anchors) {
            const auto rad = local_radii(L, w, R, local.shape);
            if (!region_inside_ball(w, rad, local.shape)) continue;
            const auto lw = L.eval(w);
            for (const auto& z : local_points(L, w, R, local)) {
                const auto lz = L.eval(z);
                bool admissible = true;
                for (int k = 0; k < n && admissible; ++k) {
                    const auto uk = static_cast<std::size_t>(k);
                    const double rk = local.shape == LocalShape::polydisc ? R[uk] : R[0];
                    if (std::abs(z[uk] - w[uk]) > rk / std::min(lz[uk], lw[uk]) * (1.0 + 1e-12)) admissible = false;
                }
                if (!admissible) continue;
                ++pairs;
                for (int j = 0; j < n; ++j) {
                    const auto uj = static_cast<std::size_t>(j);
                    sup_pair = std::max({sup_pair, lz[uj] / lw[uj], lw[uj] / lz[uj]});
                }
            }
        }
    }
    const bool member4 = worst_l1 > 1.0 / threshold && worst_l2 < threshold;
    const bool member8 = sup_pair < threshold;
    rep.constants["lambda1_min"] = worst_l1;
    rep.constants["lambda2_max"] = worst_l2;
    rep.constants["pair_ratio_sup"] = sup_pair;
    rep.constants["pair_samples"] = static_cast<double>(pairs);
    rep.constants["threshold"] = threshold;
    rep.worst_margin = std::min(std::log(threshold) - std::log(worst_l2), std::log(worst_l1) + std::log(threshold));
    if (member4 != member8) {
        rep.verdict = Verdict::indeterminate;
        rep.notes.push_back("lambda-form and pair-form verdicts disagree on the sampled set");
    } else {
        rep.verdict = verdict_from(member4, rep.samples_used, rep.samples_skipped);
    }
    rep.notes.push_back("sampled lambda bounds are inner estimates of the true infimum/supremum");
    if (rep.verdict == Verdict::pass) rep.witness.reset();
    return rep;
}

CriterionReport check_K_membership(const LField& L, const std::vector<std::vector<double>>& radial_grid,
                                   int angles_per_dim, double threshold) {
    CriterionReport rep;
    rep.check = "K_membership";
    const int n = L.dim();
    int m = angles_per_dim;
    while (m > 1 && std::pow(static_cast<double>(m), n) > 4096.0) --m;
    double c = 1.0;
    for (const auto& R : radial_grid) {
        if (R.size() != static_cast<std::size_t>(n)) throw ArityError("radius vector dimension");
        TorusGrid grid(Point(static_cast<std::size_t>(n)), R, m);
        std::vector<double> lo(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
        std::vector<double> hi(static_cast<std::size_t>(n), 0.0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const Point z = grid.point(i);
            const auto l = L.eval(z);
            for (std::size_t j = 0; j < l.size(); ++j) {
                lo[j] = std::min(lo[j], l[j]);
                hi[j] = std::max(hi[j], l[j]);
            }
            ++rep.samples_used;
        }
        for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
            const double ratio = hi[j] / lo[j];
            if (ratio > c) {
                c = ratio;
                Point z(R.begin(), R.end());
                rep.witness = Witness{z, {}, "radius with the largest angular ratio"};
            }
        }
    }
    rep.constants["c"] = c;
    rep.constants["angles_per_dim"] = m;
    rep.constants["threshold"] = threshold;
    rep.worst_margin = threshold - c;
    rep.verdict = c < threshold ? Verdict::pass : Verdict::fail;
    if (rep.verdict == Verdict::pass) rep.witness.reset();
    return rep;
}

LField theorem13_field(const std::vector<Expr>& raw, double c, double beta) {
    std::vector<Expr> comps;
    comps.reserve(raw.size());
    for (const auto& e : raw) comps.push_back(Expr::constant(c) + Expr::abs(e));
    return LField(beta, std::move(comps));
}

namespace {

// |d l / d z_m| at z: exact via a first-order jet for holomorphic components,
// central Wirtinger differences otherwise.
double partial_modulus(const Expr& e, const Point& z, int m) {
    if (e.holomorphic()) {
        const Jet j = jet_from_expr(e, z, 1);
        MultiIndex k(z.size(), 0);
        k[static_cast<std::size_t>(m)] = 1;
        return std::abs(j.coeff(k));
    }
    const double h = 1e-6;
    Point a = z, b = z, c = z, d = z;
    a[static_cast<std::size_t>(m)] += h;
    b[static_cast<std::size_t>(m)] -= h;
    c[static_cast<std::size_t>(m)] += cplx(0, h);
    d[static_cast<std::size_t>(m)] -= cplx(0, h);
    const cplx dx = (e.eval(a) - e.eval(b)) / (2 * h);
    const cplx dy = (e.eval(c) - e.eval(d)) / (2 * h);
    return std::abs(0.5 * (dx - cplx(0, 1) * dy));
}

}  // namespace

CriterionReport check_theorem13(const std::vector<Expr>& raw, double c, const std::vector<Point>& grid,
                                const std::vector<double>& R, const std::vector<Point>& anchors,
                                const LocalSampling& local) {
    if (grid.empty()) throw EmptyGrid("theorem 13 test needs sample points");
    CriterionReport rep;
    rep.check = "theorem13";
    const int n = static_cast<int>(raw.size());
    double P = 0.0;
    for (const auto& z : grid) {
        for (int j = 0; j < n; ++j) {
            const double lj = std::abs(raw[static_cast<std::size_t>(j)].eval(z));
            for (int m = 0; m < n; ++m) {
                const double d = partial_modulus(raw[static_cast<std::size_t>(j)], z, m);
                if (!std::isfinite(d) || !std::isfinite(lj)) throw NonFiniteDerivative("at a sample point");
                const double q = d / (c + lj);
                if (q > P) {
                    P = q;
                    MultiIndex k(static_cast<std::size_t>(n), 0);
                    k[static_cast<std::size_t>(m)] = 1;
                    rep.witness = Witness{z, k, "sup of |dl_j/dz_m|/(c+|l_j|)"};
                }
            }
        }
        ++rep.samples_used;
    }
    double rsum = 0.0;
    for (double r : R) rsum += r;
    const double upper = std::exp(P / c * rsum);
    const double lower = std::exp(-P / c * rsum);
    rep.constants["P"] = P;
    rep.constants["c"] = c;
    rep.constants["bracket_upper"] = upper;
    rep.constants["bracket_lower"] = lower;

    // beta only has to make the field constructible here; the cross-check uses
    // the local polydiscs, not the cone condition.
    const LField star = theorem13_field(raw, c, std::sqrt(static_cast<double>(n)) + 1.0);
    LocalSampling spec = local;
    spec.skip_escaping = true;
    const LambdaBounds b = estimate_lambda(star, R, anchors, spec);
    double l1 = 1.0, l2 = 1.0;
    for (std::size_t j = 0; j < b.lambda1.size(); ++j) {
        l1 = std::min(l1, b.lambda1[j]);
        l2 = std::max(l2, b.lambda2[j]);
    }
    rep.constants["lambda1_sampled"] = l1;
    rep.constants["lambda2_sampled"] = l2;
    rep.constants["anchors_used"] = static_cast<double>(b.anchors_used);
    rep.samples_skipped = b.anchors_skipped;
    const double tol = 1e-12;
    const bool contained = l2 <= upper * (1 + tol) && l1 >= lower * (1 - tol);
    rep.worst_margin = std::min(std::log(upper) - std::log(l2), std::log(l1) - std::log(lower));
    rep.verdict = (std::isfinite(P) && contained) ? Verdict::pass : Verdict::fail;
    if (b.anchors_used == 0) {
        rep.verdict = Verdict::indeterminate;
        rep.notes.push_back("no anchor had its local polydisc inside the ball");
    }
    if (rep.verdict == Verdict::pass) rep.witness.reset();
    return rep;
}

}  // namespace lindex
