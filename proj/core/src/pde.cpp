#include "lindex/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "lindex/errors.hpp"
#include "lindex/jet.hpp"
#include "lindex/parallel.hpp"
#include "lindex/sampling.hpp"

namespace lindex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogTol = 1e-12;
constexpr double kTiny = 1e-300;

std::string show(const MultiIndex& k) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < k.size(); ++i) os << (i ? "," : "") << k[i];
    os << ')';
    return os.str();
}

MultiIndex unit(int n, int j, int p) {
    MultiIndex e(static_cast<std::size_t>(n), 0);
    e[static_cast<std::size_t>(j)] = p;
    return e;
}

MultiIndex plus(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

MultiIndex minus(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

bool nonnegative(const MultiIndex& k) {
    return std::all_of(k.begin(), k.end(), [](int v) { return v >= 0; });
}

bool outside_polydisc(const Point& z, double r_prime) {
    return std::any_of(z.begin(), z.end(), [&](const cplx& v) { return std::abs(v) >= r_prime; });
}

std::vector<Point> exclude_polydisc(const std::vector<Point>& region, double r_prime, std::size_t& excluded) {
    std::vector<Point> out;
    excluded = 0;
    for (const auto& z : region) {
        if (outside_polydisc(z, r_prime)) out.push_back(z);
        else ++excluded;
    }
    return out;
}

// All I with ||I|| = s.
std::vector<MultiIndex> shell_indices(int n, int s) {
    const auto table = IndexTable::get(n, s);
    std::vector<MultiIndex> out;
    for (std::size_t pos : table->shell(s)) out.push_back(table->index(pos));
    return out;
}

// All M with ||M|| <= s, in table order.
std::vector<MultiIndex> indices_upto(int n, int s) {
    const auto table = IndexTable::get(n, s);
    std::vector<MultiIndex> out;
    for (std::size_t pos = 0; pos < table->size(); ++pos) out.push_back(table->index(pos));
    return out;
}

std::vector<MultiIndex> below(const std::vector<MultiIndex>& all, const MultiIndex& I) {
    std::vector<MultiIndex> out;
    for (const auto& M : all)
        if (leq(M, I)) out.push_back(M);
    return out;
}

bool is_zero_rhs(const PDEEquation& eq) { return !eq.rhs || eq.rhs->is_zero_constant(); }

double lookup_B(const EquationBounds& eb, const MultiIndex& S, const MultiIndex& M, int j) {
    auto it = eb.B.find({S, M});
    if (it == eb.B.end())
        throw MissingBound("B for S = " + show(S) + ", M = " + show(M) + " in equation " + std::to_string(j));
    return it->second;
}

double lookup_lead(const EquationBounds& eb, const MultiIndex& M, int j) {
    auto it = eb.B_lead.find(M);
    if (it == eb.B_lead.end())
        throw MissingBound("lead bound for M = " + show(M) + " in equation " + std::to_string(j));
    return it->second;
}

double lookup_D(const EquationBounds& eb, const MultiIndex& I, int j) {
    if (eb.rhs_zero) return 0.0;
    auto it = eb.D.find(I);
    if (it == eb.D.end())
        throw MissingBound("D for I = " + show(I) + " in equation " + std::to_string(j));
    return it->second;
}

void require_bounds(const PDESystem& sys, const CoeffBounds& b) {
    sys.validate();
    if (b.n != sys.n || b.equations.size() != sys.equations.size())
        throw MissingBound("coefficient bounds do not match the system");
}

double factorial_form(const PDESystem& sys, const CoeffBounds& b, ShellKind shell, bool with_D,
                      const CFormOptions& opt) {
    const int n = sys.n;
    // B is the largest of the bounds the constant actually uses.
    double B = 0.0;
    for (int j = 0; j < n; ++j) {
        const auto& eq = sys.equations[static_cast<std::size_t>(j)];
        const auto& eb = b.equations[static_cast<std::size_t>(j)];
        for (const auto& M : indices_upto(n, shell_norm(sys, j, shell))) {
            if (norm(M) > 0) B = std::max(B, lookup_lead(eb, M, j));
            for (const auto& [S, G] : eq.lower) B = std::max(B, lookup_B(eb, S, M, j));
        }
    }
    double c = 0.0;
    for (int j = 0; j < n; ++j) {
        const auto& eq = sys.equations[static_cast<std::size_t>(j)];
        const auto& eb = b.equations[static_cast<std::size_t>(j)];
        const int s = shell_norm(sys, j, shell);
        const MultiIndex pe = unit(n, j, eq.p);
        const auto all = indices_upto(n, s);
        for (const auto& I : shell_indices(n, s)) {
            const MultiIndex P = plus(pe, I);
            const double den = factorial(P);
            double t = 0.0;
            if (with_D) {
                double lower = 0.0;
                for (const auto& [S, G] : eq.lower) {
                    if (opt.printed_lower_factorial) {
                        const MultiIndex w = minus(pe, S);
                        if (!nonnegative(w))
                            throw DomainError("(p e_j - S)! is undefined for S = " + show(S));
                        lower += factorial(w);
                    } else {
                        lower += factorial(S);
                    }
                }
                t += lookup_D(eb, I, j) * (factorial(eq.p) / den + B * lower / den);
            }
            for (const auto& M : below(all, I)) {
                const double C = multinomial(I, M);
                if (norm(M) > 0) t += B * C * factorial(minus(P, M)) / den;
                for (const auto& [S, G] : eq.lower) t += B * C * factorial(minus(plus(S, I), M)) / den;
            }
            c = std::max(c, t);
        }
    }
    return c;
}

double cor5_form(const PDESystem& sys, const CoeffBounds& b) {
    if (sys.n != 1) throw DomainError("the one-variable constant needs n = 1");
    const auto& eq = sys.equations[0];
    const auto& eb = b.equations[0];
    const MultiIndex zero{0}, one{1};
    double b0 = 0.0, b01 = 0.0;
    for (const auto& [S, G] : eq.lower) {
        b0 += lookup_B(eb, S, zero, 0);
        b01 += lookup_B(eb, S, zero, 0) + lookup_B(eb, S, one, 0);
    }
    return lookup_D(eb, one, 0) * (1.0 + b0) + lookup_lead(eb, one, 0) + b01;
}

// max_{||J||=p+1} |F^(J)|/(J! L^J) over max_{||K||<=p} of the same, in logs.
CriterionReport hayman_factorial(const Expr& F, const LField& L, int p, const std::vector<Point>& pts, double c) {
    CriterionReport rep;
    rep.check = "hayman_factorial";
    struct Res {
        bool skipped = false;
        double log_ratio = kNegInf;
        MultiIndex J;
    };
    std::vector<Res> res(pts.size());
    parallel_for(pts.size(), [&](std::size_t a) {
        const Jet jet = jet_from_expr(F, pts[a], p + 1);
        const auto l = L.eval(pts[a]);
        double num = kNegInf, den = kNegInf;
        for (std::size_t pos = 0; pos < jet.table().size(); ++pos) {
            const double mag = std::abs(jet[pos]);
            const double v = mag > 0.0 ? std::log(mag) - log_weight_power(l, jet.table().at(pos)) : kNegInf;
            if (jet.table().norm_at(pos) == p + 1) {
                if (v > num) {
                    num = v;
                    res[a].J = jet.table().index(pos);
                }
            } else {
                den = std::max(den, v);
            }
        }
        if (den == kNegInf) {
            if (num == kNegInf) res[a].skipped = true;
            else res[a].log_ratio = kInf;
            return;
        }
        res[a].log_ratio = num - den;
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
    rep.constants["p"] = p;
    rep.constants["c"] = c;
    rep.constants["log_c_star"] = worst;
    rep.constants["c_star"] = worst == kNegInf ? 0.0 : (worst > 709.0 ? kInf : std::exp(worst));
    if (rep.samples_used == 0) {
        rep.verdict = Verdict::indeterminate;
        return rep;
    }
    const double log_c = c > 0.0 ? std::log(c) : kNegInf;
    rep.worst_margin = worst == kNegInf ? kInf : log_c - worst;
    const bool ok = worst == kNegInf || worst <= log_c + kLogTol;
    rep.verdict = verdict_from(ok, rep.samples_used, rep.samples_skipped);
    if (rep.verdict == Verdict::fail)
        rep.witness = Witness{pts[wa], res[wa].J, "order p+1 shell exceeds c times the lower shells"};
    return rep;
}

}  // namespace

bool PDEEquation::homogeneous() const { return is_zero_rhs(*this); }

void PDESystem::validate() const {
    if (n < 1) throw DomainError("a system needs n >= 1");
    if (equations.size() != static_cast<std::size_t>(n))
        throw DomainError("a system needs one equation per variable, got " + std::to_string(equations.size()) +
                          " for n = " + std::to_string(n));
    for (std::size_t j = 0; j < equations.size(); ++j) {
        const auto& eq = equations[j];
        if (eq.p < 1) throw DomainError("equation " + std::to_string(j) + " has order p < 1");
        std::set<MultiIndex> seen;
        for (const auto& [S, G] : eq.lower) {
            if (S.size() != static_cast<std::size_t>(n) || !nonnegative(S))
                throw DomainError("malformed lower index " + show(S) + " in equation " + std::to_string(j));
            if (norm(S) > eq.p - 1)
                throw DomainError("lower index " + show(S) + " exceeds order p - 1 in equation " +
                                  std::to_string(j));
            if (!seen.insert(S).second)
                throw DomainError("repeated lower index " + show(S) + " in equation " + std::to_string(j));
        }
    }
}

bool PDESystem::homogeneous() const {
    return std::all_of(equations.begin(), equations.end(), [](const PDEEquation& e) { return e.homogeneous(); });
}

int PDESystem::order_sum() const {
    int s = 0;
    for (const auto& e : equations) s += e.p;
    return s;
}

int shell_norm(const PDESystem& sys, int j, ShellKind kind) {
    const int rest = sys.order_sum() - sys.equations[static_cast<std::size_t>(j)].p;
    return kind == ShellKind::inhomogeneous ? rest + 1 : rest;
}

std::vector<Point> pde_region(int n, std::size_t count, double radius, double r_prime, std::uint64_t seed) {
    if (!(radius > 0.0 && radius < 1.0)) throw DomainError("region radius must lie in (0, 1)");
    if (!(r_prime >= 0.0 && r_prime < radius)) throw DomainError("R' must lie in [0, radius)");
    std::vector<Point> out;
    std::uint64_t offset = seed;
    while (out.size() < count) {
        const std::size_t want = count - out.size();
        for (auto& z : halton_ball(n, 2 * want + 16, radius, offset)) {
            if (out.size() == count) break;
            if (outside_polydisc(z, r_prime)) out.push_back(std::move(z));
        }
        offset += 2 * want + 16;
    }
    return out;
}

CoeffBounds estimate_coeff_bounds(const PDESystem& sys, const LField& L, const std::vector<Point>& region,
                                  ShellKind shell, double r_prime) {
    sys.validate();
    const int n = sys.n;
    if (L.dim() != n) throw DomainError("weight dimension does not match the system");
    CoeffBounds out;
    out.n = n;
    out.shell = shell;
    const auto pts = exclude_polydisc(region, r_prime, out.samples_excluded);
    if (pts.empty()) throw EmptyGrid("no region point lies outside D(0, R')");
    out.samples_used = pts.size();

    int max_p = 0;
    for (const auto& e : sys.equations) max_p = std::max(max_p, e.p);

    // One flat slot per ratio; each sample fills its own row.
    struct Slot {
        int j;
        int kind;            // 0 lower, 1 lead, 2 rhs
        std::size_t s_idx;   // lower term index
        MultiIndex M;        // derivative order (I for the rhs)
        MultiIndex K;        // weight exponent
    };
    std::vector<Slot> slots;
    std::vector<int> orders(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const auto& eq = sys.equations[static_cast<std::size_t>(j)];
        const int s = shell_norm(sys, j, shell);
        orders[static_cast<std::size_t>(j)] = s + max_p;
        const MultiIndex pe = unit(n, j, eq.p);
        for (const auto& M : indices_upto(n, s)) {
            for (std::size_t t = 0; t < eq.lower.size(); ++t)
                slots.push_back({j, 0, t, M, plus(minus(pe, eq.lower[t].first), M)});
            if (norm(M) > 0) slots.push_back({j, 1, 0, M, M});
        }
        if (!is_zero_rhs(eq))
            for (const auto& I : shell_indices(n, s)) slots.push_back({j, 2, 0, I, I});
    }

    std::vector<std::vector<double>> rows(pts.size());
    parallel_for(pts.size(), [&](std::size_t a) {
        const Point& z = pts[a];
        const auto l = L.eval(z);
        std::vector<double> row(slots.size(), 0.0);
        for (int j = 0; j < n; ++j) {
            const auto& eq = sys.equations[static_cast<std::size_t>(j)];
            const int order = orders[static_cast<std::size_t>(j)];
            const Jet lead = jet_from_expr(eq.lead, z, order);
            const double lead0 = std::abs(lead[0]);
            if (!(lead0 > kTiny)) {
                std::ostringstream os;
                os << "lead coefficient of equation " << j << " vanishes at a region point with |z| = "
                   << euclid_norm(z);
                throw LeadVanishes(os.str());
            }
            std::vector<Jet> lower;
            for (const auto& [S, G] : eq.lower) lower.push_back(jet_from_expr(G, z, order));
            std::optional<Jet> rhs;
            if (!is_zero_rhs(eq)) rhs = jet_from_expr(*eq.rhs, z, order);
            for (std::size_t k = 0; k < slots.size(); ++k) {
                const Slot& sl = slots[k];
                if (sl.j != j) continue;
                const Jet& src = sl.kind == 0 ? lower[sl.s_idx] : (sl.kind == 1 ? lead : *rhs);
                const double num = std::abs(derivative_at(src, sl.M));
                if (num == 0.0) continue;
                double base = lead0;
                if (sl.kind == 2) {
                    base = std::abs((*rhs)[0]);
                    if (!(base > kTiny)) {
                        std::ostringstream os;
                        os << "right side of equation " << j << " vanishes at a region point with |z| = "
                           << euclid_norm(z) << " while its derivative of order " << show(sl.M) << " does not";
                        throw ZeroH(os.str());
                    }
                }
                row[k] = std::exp(std::log(num) - std::log(base) - log_weight_power(l, sl.K));
            }
        }
        rows[a] = std::move(row);
    });

    out.equations.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        auto& eb = out.equations[static_cast<std::size_t>(j)];
        const auto& eq = sys.equations[static_cast<std::size_t>(j)];
        eb.shell = shell_norm(sys, j, shell);
        eb.rhs_zero = is_zero_rhs(eq);
        if (eb.rhs_zero)
            for (const auto& I : shell_indices(n, eb.shell)) eb.D[I] = 0.0;
    }
    for (std::size_t k = 0; k < slots.size(); ++k) {
        double sup = 0.0;
        for (const auto& row : rows) sup = std::max(sup, row[k]);
        const Slot& sl = slots[k];
        auto& eb = out.equations[static_cast<std::size_t>(sl.j)];
        if (sl.kind == 0) eb.B[{sys.equations[static_cast<std::size_t>(sl.j)].lower[sl.s_idx].first, sl.M}] = sup;
        else if (sl.kind == 1) eb.B_lead[sl.M] = sup;
        else eb.D[sl.M] = sup;
    }
    return out;
}

const char* to_string(CVariant v) {
    switch (v) {
        case CVariant::thm22: return "thm22";
        case CVariant::thm23: return "thm23";
        case CVariant::thm24: return "thm24";
        case CVariant::thm25: return "thm25";
        case CVariant::cor5: return "cor5";
    }
    return "?";
}

ShellKind shell_of(CVariant v) {
    return v == CVariant::thm23 || v == CVariant::thm25 ? ShellKind::homogeneous : ShellKind::inhomogeneous;
}

int hayman_order(const PDESystem& sys, CVariant v) {
    return shell_of(v) == ShellKind::homogeneous ? sys.order_sum() - 1 : sys.order_sum();
}

double c_sum_form(const PDESystem& sys, const CoeffBounds& b, ShellKind shell, bool with_D) {
    require_bounds(sys, b);
    const int n = sys.n;
    double c = 0.0;
    for (int j = 0; j < n; ++j) {
        const auto& eq = sys.equations[static_cast<std::size_t>(j)];
        const auto& eb = b.equations[static_cast<std::size_t>(j)];
        const int s = shell_norm(sys, j, shell);
        const auto all = indices_upto(n, s);
        const MultiIndex zero(static_cast<std::size_t>(n), 0);
        for (const auto& I : shell_indices(n, s)) {
            double t = 0.0;
            if (with_D) {
                double b0 = 0.0;
                for (const auto& [S, G] : eq.lower) b0 += lookup_B(eb, S, zero, j);
                t += lookup_D(eb, I, j) * (1.0 + b0);
            }
            for (const auto& M : below(all, I)) {
                const double C = multinomial(I, M);
                if (norm(M) > 0) t += C * lookup_lead(eb, M, j);
                for (const auto& [S, G] : eq.lower) t += C * lookup_B(eb, S, M, j);
            }
            c = std::max(c, t);
        }
    }
    return c;
}

double compute_c(const PDESystem& sys, const CoeffBounds& b, CVariant v, const CFormOptions& opt) {
    require_bounds(sys, b);
    switch (v) {
        case CVariant::thm22: return c_sum_form(sys, b, ShellKind::inhomogeneous, true);
        case CVariant::thm23: return c_sum_form(sys, b, ShellKind::homogeneous, false);
        case CVariant::thm24: return factorial_form(sys, b, ShellKind::inhomogeneous, true, opt);
        case CVariant::thm25: return factorial_form(sys, b, ShellKind::homogeneous, false, opt);
        case CVariant::cor5: return cor5_form(sys, b);
    }
    return kInf;
}

double max_residual(const Expr& F, const PDESystem& sys, const std::vector<Point>& region, Point* worst) {
    sys.validate();
    int max_p = 0;
    for (const auto& e : sys.equations) max_p = std::max(max_p, e.p);
    std::vector<double> rel(region.size(), 0.0);
    parallel_for(region.size(), [&](std::size_t a) {
        const Point& z = region[a];
        const Jet jet = jet_from_expr(F, z, max_p);
        double r = 0.0;
        for (int j = 0; j < sys.n; ++j) {
            const auto& eq = sys.equations[static_cast<std::size_t>(j)];
            cplx sum = eq.lead.eval(z) * derivative_at(jet, unit(sys.n, j, eq.p));
            double scale = std::abs(sum);
            for (const auto& [S, G] : eq.lower) {
                const cplx term = G.eval(z) * derivative_at(jet, S);
                sum += term;
                scale = std::max(scale, std::abs(term));
            }
            if (!is_zero_rhs(eq)) {
                const cplx h = eq.rhs->eval(z);
                sum -= h;
                scale = std::max(scale, std::abs(h));
            }
            if (scale > 0.0) r = std::max(r, std::abs(sum) / scale);
            if (!std::isfinite(r)) r = kInf;
        }
        rel[a] = r;
    });
    double m = 0.0;
    std::size_t arg = 0;
    for (std::size_t a = 0; a < rel.size(); ++a)
        if (rel[a] > m) {
            m = rel[a];
            arg = a;
        }
    if (worst && !region.empty()) *worst = region[arg];
    return m;
}

PDEVerification verify_solution(const Expr& F, const PDESystem& sys, const LField& L,
                                const std::vector<Point>& region, const VerifyOptions& opt) {
    sys.validate();
    if (L.dim() != sys.n) throw DomainError("weight dimension does not match the system");
    PDEVerification out;
    out.variant = opt.variant ? *opt.variant : (sys.homogeneous() ? CVariant::thm23 : CVariant::thm22);
    auto& rep = out.report;
    rep.check = std::string("pde_") + to_string(out.variant);

    std::size_t excluded = 0;
    const auto pts = exclude_polydisc(region, opt.r_prime, excluded);
    if (pts.empty()) throw EmptyGrid("no region point lies outside D(0, R')");

    Point worst;
    out.residual_max = max_residual(F, sys, pts, &worst);
    if (!(out.residual_max <= opt.residual_tol)) {
        std::ostringstream os;
        os << "relative residual " << out.residual_max << " exceeds " << opt.residual_tol << " at |z| = "
           << euclid_norm(worst);
        throw ResidualFailure(os.str());
    }

    const bool factorial = out.variant == CVariant::thm24 || out.variant == CVariant::thm25;
    out.bounds = estimate_coeff_bounds(sys, L, pts, shell_of(out.variant), opt.r_prime);
    out.c = opt.c ? *opt.c : compute_c(sys, out.bounds, out.variant, opt.form);
    const int p = hayman_order(sys, out.variant);

    out.hayman = factorial ? hayman_factorial(F, L, p, pts, out.c) : check_hayman(F, L, p, pts, out.c, opt.criteria);
    const bool vanishes = out.hayman.samples_used == 0;
    if (vanishes) {
        out.hayman.verdict = Verdict::pass;
        out.hayman.notes.push_back("F and its derivatives vanish at every sample");
    }

    auto& k = rep.constants;
    k["c"] = out.c;
    k["p"] = p;
    k["residual_max"] = out.residual_max;
    k["c_star"] = out.hayman.constants["c_star"];
    k["samples_excluded"] = static_cast<double>(excluded);
    if (out.variant == CVariant::thm24 && !opt.c) {
        try {
            CFormOptions printed = opt.form;
            printed.printed_lower_factorial = !opt.form.printed_lower_factorial;
            k[opt.form.printed_lower_factorial ? "c_derived_factorials" : "c_printed_factorials"] =
                compute_c(sys, out.bounds, out.variant, printed);
        } catch (const DomainError&) {
            rep.notes.push_back("the printed factorial weight is undefined for this system");
        }
    }
    rep.samples_used = pts.size();
    rep.notes.push_back("B and D are sampled suprema over the region, not certified bounds");

    Verdict growth_verdict = Verdict::pass;
    if (opt.run_growth && !vanishes) {
        auto seq = opt.growth_sequence;
        if (seq.empty()) {
            const double s = std::sqrt(static_cast<double>(sys.n));
            seq = diagonal_radii(sys.n, 0.5 / s, 0.95 / s, 10);
        }
        GrowthCap cap;
        cap.kind = factorial ? GrowthCapKind::lemma6 : GrowthCapKind::lemma5;
        cap.c = out.c;
        cap.p = p;
        out.growth = growth_ratio_limsup(F, L, seq, cap, opt.growth);
        growth_verdict = out.growth->report.verdict;
        k["growth_limsup"] = out.growth->limsup;
        k["growth_cap"] = out.growth->cap;
        if (shell_of(out.variant) == ShellKind::homogeneous)
            rep.notes.push_back("the growth cap is evaluated as |R| tends to 1 inside the ball");
    } else if (vanishes) {
        rep.notes.push_back("growth ratio skipped: F vanishes");
    }

    const auto hv = out.hayman.verdict;
    if (hv == Verdict::fail || growth_verdict == Verdict::fail) rep.verdict = Verdict::fail;
    else if (hv == Verdict::pass && growth_verdict == Verdict::pass) rep.verdict = Verdict::pass;
    else rep.verdict = Verdict::indeterminate;
    rep.worst_margin = out.hayman.worst_margin;
    if (out.hayman.witness) rep.witness = out.hayman.witness;
    else if (out.growth && out.growth->report.witness) rep.witness = out.growth->report.witness;
    return out;
}

}  // namespace lindex
