#include "lindex/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lindex/errors.hpp"
#include "lindex/parallel.hpp"
#include "lindex/sampling.hpp"

namespace lindex {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

int certified_order(const Jet& F, int guard) { return std::min(F.valid_order(), F.order()) - guard; }

// Largest value per degree shell, for shells 0..top.
std::vector<double> shell_max(const Jet& F, const std::vector<double>& values, int top) {
    std::vector<double> s(static_cast<std::size_t>(std::max(top + 1, 0)), kNegInf);
    for (int k = 0; k <= top; ++k)
        for (std::size_t pos : F.table().shell(k)) s[static_cast<std::size_t>(k)] = std::max(s[static_cast<std::size_t>(k)], values[pos]);
    return s;
}

bool ties(double a, double best, double tol) { return a >= best + std::log1p(-tol); }

}  // namespace

std::vector<double> log_normalized_derivatives(const Jet& F, const std::vector<double>& l) {
    const auto& table = F.table();
    std::vector<double> out(table.size());
    std::vector<double> log_l(l.size());
    for (std::size_t j = 0; j < l.size(); ++j) log_l[j] = std::log(l[j]);
    for (std::size_t pos = 0; pos < table.size(); ++pos) {
        const double a = std::abs(F[pos]);
        if (a == 0.0) {
            out[pos] = kNegInf;
            continue;
        }
        // b_J = F^(J)/J!, so the factorial is already divided out.
        double v = std::log(a);
        const auto k = table.at(pos);
        for (std::size_t j = 0; j < k.size(); ++j) v -= k[j] * log_l[j];
        out[pos] = v;
    }
    return out;
}

IndexReport local_index(const Jet& F, const LField& L, const IndexOptions& opt) {
    IndexReport rep;
    rep.anchor = F.anchor();
    const int dv = certified_order(F, opt.guard);
    rep.valid_order = dv;
    if (dv < 0) {
        rep.exceeds_validity = true;
        return rep;
    }
    const auto l = L.eval(F.anchor());
    const auto logs = log_normalized_derivatives(F, l);
    const auto shells = shell_max(F, logs, dv);
    const double M = *std::max_element(shells.begin(), shells.end());
    if (M == kNegInf) {
        rep.is_zero = true;
        rep.local_index = 0;
        rep.argmax = MultiIndex(static_cast<std::size_t>(F.dim()), 0);
        rep.log_max = kNegInf;
        rep.margin = 1.0;
        return rep;
    }

    int n0 = 0;
    while (!ties(shells[static_cast<std::size_t>(n0)], M, opt.tie_tolerance)) ++n0;

    // Largest norm attaining the maximum: ||nu(1/L)|| within the table.
    int nu = n0;
    for (int k = dv; k > n0; --k)
        if (ties(shells[static_cast<std::size_t>(k)], M, opt.tie_tolerance)) {
            nu = k;
            break;
        }
    rep.nu_norm = nu;
    if (n0 > nu) throw std::logic_error("local index exceeds the central index of 1/L");

    double low = kNegInf;
    for (int k = 0; k <= n0; ++k)
        for (std::size_t pos : F.table().shell(k))
            if (logs[pos] > low) {
                low = logs[pos];
                rep.argmax = F.table().index(pos);
            }
    double high = kNegInf;
    for (int k = n0 + 1; k <= dv; ++k) high = std::max(high, shells[static_cast<std::size_t>(k)]);
    rep.log_max = low;
    rep.margin = high == kNegInf ? 1.0 : std::max(0.0, -std::expm1(high - low));

    if (n0 > dv - 2) {
        rep.exceeds_validity = true;
    } else {
        rep.local_index = n0;
    }
    return rep;
}

GlobalIndexReport global_index_estimate(const Expr& F, const LField& L, const std::vector<Point>& anchors, int order,
                                        const IndexOptions& opt) {
    if (anchors.empty()) throw EmptyGrid("global index needs anchors");
    GlobalIndexReport out;
    out.anchors.resize(anchors.size());
    parallel_for(anchors.size(), [&](std::size_t i) {
        out.anchors[i] = local_index(jet_from_expr(F, anchors[i], order), L, opt);
    });
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const auto& r = out.anchors[i];
        if (!r.local_index) {
            ++out.exceeded;
            continue;
        }
        if (*r.local_index > out.sup_index) {
            out.sup_index = *r.local_index;
            out.witness = i;
        }
    }
    return out;
}

MaximalTerm maximal_term(const Jet& F, const std::vector<double>& R, double tie_tolerance) {
    MaximalTerm mt;
    mt.R = R;
    const auto& table = F.table();
    const int top = std::min(F.valid_order(), F.order());
    std::vector<double> logs(table.size(), kNegInf);
    for (std::size_t pos = 0; pos < table.size(); ++pos) {
        if (table.norm_at(pos) > top) continue;
        const double a = std::abs(F[pos]);
        if (a == 0.0) continue;
        double v = std::log(a);
        const auto k = table.at(pos);
        for (std::size_t j = 0; j < k.size(); ++j)
            if (k[j] != 0) v += k[j] * std::log(R[j]);
        logs[pos] = v;
        mt.log_mu = std::max(mt.log_mu, v);
    }
    mt.nu = MultiIndex(static_cast<std::size_t>(F.dim()), 0);
    if (mt.log_mu == kNegInf) return mt;
    mt.mu = std::exp(mt.log_mu);
    int best_norm = -1;
    for (std::size_t pos = 0; pos < table.size(); ++pos) {
        if (logs[pos] == kNegInf || !ties(logs[pos], mt.log_mu, tie_tolerance)) continue;
        const int nrm = table.norm_at(pos);
        const auto k = table.at(pos);
        if (nrm > best_norm || (nrm == best_norm && std::lexicographical_compare(mt.nu.begin(), mt.nu.end(), k.begin(), k.end()))) {
            best_norm = nrm;
            mt.nu.assign(k.begin(), k.end());
        }
    }
    return mt;
}

double domination_constant(int N, int n) {
    return 2.0 * (factorial(N + n + 1) * factorial(n + 1) + (N + 1) * binomial(n + N - 1, N));
}

CriterionReport verify_dominance(const Jet& F, int k0, const std::vector<double>& R, const std::vector<Point>& skeleton) {
    if (skeleton.empty()) throw EmptyGrid("dominance check needs skeleton points");
    CriterionReport rep;
    rep.check = "dominance";
    const auto& table = F.table();
    const int top = std::min(F.valid_order(), F.order());

    Jet rest = F;
    double peak = 0.0;
    for (std::size_t pos = 0; pos < table.size(); ++pos) {
        const int nrm = table.norm_at(pos);
        if (nrm == k0) {
            double t = std::abs(F[pos]);
            const auto k = table.at(pos);
            for (std::size_t j = 0; j < k.size(); ++j) t *= std::pow(R[j], k[j]);
            peak = std::max(peak, t);
        }
        if (nrm == k0 || nrm > top) rest[pos] = 0.0;
    }
    const double rhs = 0.5 * peak;
    double lhs = 0.0;
    for (const auto& z : skeleton) {
        const double v = std::abs(jet_eval(rest, z));
        if (v > lhs) {
            lhs = v;
            rep.witness = Witness{z, MultiIndex{k0}, "largest non-dominant remainder"};
        }
        ++rep.samples_used;
    }
    rep.constants["k0"] = k0;
    rep.constants["lhs"] = lhs;
    rep.constants["rhs"] = rhs;
    rep.worst_margin = rhs - lhs;
    rep.verdict = lhs <= rhs ? Verdict::pass : Verdict::fail;
    if (rep.verdict == Verdict::pass) rep.witness.reset();
    return rep;
}

DominationCertificate dominating_polynomial(const Jet& F, const LField& L, double d, std::optional<int> N,
                                            std::size_t skeleton_samples, const IndexOptions& opt) {
    const int n = F.dim();
    if (!(d > 0.0) || d > L.beta() / std::sqrt(static_cast<double>(n)) * (1 + 1e-15))
        throw DomainError("d must lie in (0, beta/sqrt(n)]");
    DominationCertificate cert;
    cert.d = d;
    const int dv = certified_order(F, opt.guard);
    if (!N) {
        const IndexReport idx = local_index(F, L, opt);
        if (!idx.local_index) throw NoDominatingStep("local index at the anchor is not certified by the jet");
        N = *idx.local_index;
    }
    cert.N = *N;
    cert.p = *N;
    cert.c = domination_constant(*N, n);
    cert.eta = d / ((d + 1.0) * std::pow(cert.c, 2.0 * (*N + 1)));

    const auto l = L.eval(F.anchor());
    const auto logs = log_normalized_derivatives(F, l);
    const auto la = shell_max(F, logs, dv);  // ln a_k
    const double log_c = std::log(cert.c);

    const bool zero = std::all_of(la.begin(), la.end(), [](double v) { return v == kNegInf; });
    int m0 = -1;
    for (int m = 0; m <= 2 * *N + 1 && !zero; ++m) {
        DominationStep st;
        st.m = m;
        st.r = d / ((d + 1.0) * std::pow(cert.c, m));
        const double lr = std::log(st.r);
        std::vector<double> t(la.size());
        for (std::size_t k = 0; k < la.size(); ++k) t[k] = la[k] == kNegInf ? kNegInf : la[k] + static_cast<double>(k) * lr;
        const double top = *std::max_element(t.begin(), t.end());
        st.s = static_cast<int>(std::find_if(t.begin(), t.end(), [&](double v) { return ties(v, top, opt.tie_tolerance); }) - t.begin());
        double star = kNegInf;
        for (std::size_t k = 0; k < t.size(); ++k)
            if (static_cast<int>(k) != st.s && t[k] > star) {
                star = t[k];
                st.s_star = static_cast<int>(k);
            }
        st.mu = std::exp(top);
        st.mu_star = star == kNegInf ? 0.0 : std::exp(star);
        cert.steps.push_back(st);
        if (star == kNegInf || star - top <= -log_c + 1e-12) {
            m0 = m;
            break;
        }
    }
    if (zero) {
        cert.m0 = 0;
        cert.k0 = 0;
        cert.r = d / (d + 1.0);
    } else {
        if (m0 < 0) {
            std::ostringstream os;
            os << "no step m <= 2N+1 = " << 2 * *N + 1 << " satisfies mu*/mu <= 1/c";
            throw NoDominatingStep(os.str());
        }
        cert.m0 = m0;
        cert.k0 = cert.steps.back().s;
        cert.r = cert.steps.back().r;
    }

    std::vector<double> radii(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) radii[static_cast<std::size_t>(j)] = cert.r / l[static_cast<std::size_t>(j)];

    // Coefficient-sum route: sum over the table, plus a majorant for the
    // orders the jet does not certify, assuming a_k <= max a over the table.
    double amax = 0.0;
    for (double v : la)
        if (v != kNegInf) amax = std::max(amax, std::exp(v));
    for (std::size_t pos = 0; pos < F.table().size(); ++pos) {
        const int nrm = F.table().norm_at(pos);
        if (nrm == cert.k0 || nrm > dv || logs[pos] == kNegInf) continue;
        cert.coefficient_sum += std::exp(logs[pos] + nrm * std::log(cert.r));
    }
    double tail = 0.0;
    for (int k = std::max(dv, -1) + 1; k < dv + 2000; ++k) {
        const double term = amax * binomial(n + k - 1, k) * std::pow(cert.r, k);
        tail += term;
        if (term < 1e-18 * std::max(tail, 1e-300)) break;
    }
    cert.truncation_tail = tail;

    std::vector<Point> skeleton = halton_torus(F.anchor(), radii, skeleton_samples, 0);
    cert.report = verify_dominance(F, cert.k0, radii, skeleton);
    cert.lhs = cert.report.constants["lhs"];
    cert.rhs = cert.report.constants["rhs"];
    cert.report.check = "dominating_polynomial";
    auto& k = cert.report.constants;
    k["N"] = cert.N;
    k["c"] = cert.c;
    k["d"] = d;
    k["m0"] = cert.m0;
    k["r"] = cert.r;
    k["eta"] = cert.eta;
    k["p"] = cert.p;
    k["coefficient_sum"] = cert.coefficient_sum;
    k["truncation_tail"] = tail;
    const bool sums_ok = cert.coefficient_sum + tail <= cert.rhs || (cert.rhs == 0.0 && cert.coefficient_sum == 0.0);
    const bool skeleton_ok = cert.lhs + tail <= cert.rhs || (cert.rhs == 0.0 && cert.lhs == 0.0);
    cert.report.worst_margin = cert.rhs - std::max(cert.lhs, cert.coefficient_sum) - tail;
    if (!sums_ok) cert.report.notes.push_back("coefficient-sum bound exceeds half the dominant block");
    cert.report.verdict = (sums_ok && skeleton_ok && cert.m0 <= 2 * cert.N + 1) ? Verdict::pass : Verdict::fail;
    if (cert.report.verdict == Verdict::fail && !cert.report.witness)
        cert.report.witness = Witness{F.anchor(), MultiIndex{cert.k0}, "coefficient-sum bound"};
    return cert;
}

}  // namespace lindex
