#include "lindex_app/commands.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include <boost/algorithm/string.hpp>

#include "lindex/criteria.hpp"
#include "lindex/errors.hpp"
#include "lindex/growth.hpp"
#include "lindex/index.hpp"
#include "lindex/pde.hpp"

namespace lindex::app {

namespace {

Json point_json(const Point& p) {
    Json a = Json::array();
    for (const auto& c : p) a.push_back(Json::array({number(c.real()), number(c.imag())}));
    return a;
}

Json index_json(const MultiIndex& k) { return Json(k); }

Verdict worst(Verdict a, Verdict b) {
    if (a == Verdict::fail || b == Verdict::fail) return Verdict::fail;
    if (a == Verdict::indeterminate || b == Verdict::indeterminate) return Verdict::indeterminate;
    return Verdict::pass;
}

std::string csv_line(std::initializer_list<double> values) {
    std::string out;
    char buf[64];
    bool first = true;
    for (double v : values) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        if (!first) out += ',';
        out += buf;
        first = false;
    }
    return out + "\n";
}

struct Context {
    const RunConfig& cfg;
    RunResult& result;
    Json checks = Json::array();
    Json data = Json::object();
    Verdict verdict = Verdict::pass;

    void add(const CriterionReport& r) {
        checks.push_back(to_json(r));
        verdict = worst(verdict, r.verdict);
    }
};

CriteriaOptions criteria_options(const RunConfig& cfg) {
    CriteriaOptions o;
    o.threshold = cfg.real("run.threshold", kDefaultThreshold);
    o.seed = cfg.seed();
    o.local.seed = cfg.seed();
    o.local.interior = static_cast<std::size_t>(cfg.integer("local.interior", 256));
    o.local.skeleton_angles = cfg.integer("local.skeleton_angles", 8);
    o.local.sphere = static_cast<std::size_t>(cfg.integer("local.sphere", 256));
    o.skeleton.angles = cfg.integer("skeleton.angles", 0);
    o.skeleton.require_inside_ball = cfg.integer("skeleton.inside_ball", 1) != 0;
    o.index_order = cfg.integer("index.order", 16);
    o.mc_interior = static_cast<std::size_t>(cfg.integer("ball.interior", 4096));
    o.mc_sphere = static_cast<std::size_t>(cfg.integer("ball.sphere", 4096));
    return o;
}

std::vector<double> radius_vector(const RunConfig& cfg, const std::string& key, double fallback) {
    auto v = cfg.reals(key, {fallback});
    if (v.size() == 1) v.assign(static_cast<std::size_t>(cfg.n()), v[0]);
    if (static_cast<int>(v.size()) != cfg.n()) throw ConfigError(key + " needs 1 or n values");
    return v;
}

MultiIndex multi_index(const RunConfig& cfg, const std::string& key, MultiIndex fallback) {
    if (!cfg.has(key)) return fallback;
    MultiIndex k;
    for (double v : cfg.reals(key)) {
        if (v < 0 || v != std::floor(v)) throw ConfigError(key + " needs nonnegative integers");
        k.push_back(static_cast<int>(v));
    }
    if (static_cast<int>(k.size()) != cfg.n()) throw ConfigError(key + " needs n entries");
    return k;
}

std::optional<int> opt_int(const RunConfig& cfg, const std::string& key) {
    if (!cfg.has(key)) return std::nullopt;
    return cfg.integer(key, 0);
}

std::optional<double> opt_real(const RunConfig& cfg, const std::string& key) {
    if (!cfg.has(key)) return std::nullopt;
    return cfg.real(key);
}

std::vector<Radii> radius_sequence(const RunConfig& cfg, const std::string& section) {
    const int n = cfg.n();
    const double s = std::sqrt(static_cast<double>(n));
    const double first = cfg.real(section + ".r_first", 0.5 / s);
    const double last = cfg.real(section + ".r_last", 0.95 / s);
    const int count = cfg.integer(section + ".count", 10);
    if (count < 1) throw ConfigError(section + ".count must be positive");
    return diagonal_radii(n, first, last, static_cast<std::size_t>(count));
}

std::vector<std::vector<double>> thetas(const RunConfig& cfg, const std::string& section) {
    const int m = cfg.integer(section + ".angles", 0);
    return m > 0 ? theta_grid(cfg.n(), m) : default_theta_grid(cfg.n());
}

std::string curve_csv(const GrowthCurve& c) {
    std::ostringstream os;
    c.write_csv(os);
    return os.str();
}

Json curve_json(const GrowthCurve& c) {
    Json j;
    Json rows = Json::array();
    for (std::size_t i = 0; i < c.ratio.size(); ++i) {
        double norm = 0.0;
        for (double r : c.radii[i]) norm += r * r;
        rows.push_back(Json::array({number(std::sqrt(norm)), number(c.lhs[i]), number(c.rhs[i]), number(c.ratio[i])}));
    }
    j["columns"] = Json::array({"|R|", "lhs", "rhs", "ratio"});
    j["rows"] = rows;
    j["limsup"] = number(c.limsup);
    return j;
}

// ---------------------------------------------------------------------------

void cmd_index(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const Expr F = cfg.function();
    const LField L = cfg.weights();
    const auto anchors = anchors_from(cfg);
    IndexOptions io;
    io.guard = cfg.integer("index.guard", io.guard);
    const auto g = global_index_estimate(F, L, anchors, cfg.integer("index.order", 16), io);

    CriterionReport rep;
    rep.check = "local_index";
    Json rows = Json::array();
    for (const auto& a : g.anchors) {
        Json r;
        r["anchor"] = point_json(a.anchor);
        r["local_index"] = a.local_index ? Json(*a.local_index) : Json(nullptr);
        r["exceeds_validity"] = a.exceeds_validity;
        r["is_zero"] = a.is_zero;
        r["argmax"] = index_json(a.argmax);
        r["log_max"] = number(a.log_max);
        r["margin"] = number(a.margin);
        r["valid_order"] = a.valid_order;
        r["nu_norm"] = a.nu_norm;
        rows.push_back(r);
        if (a.local_index) ++rep.samples_used;
        else ++rep.samples_skipped;
    }
    rep.constants["sup_index"] = g.sup_index;
    rep.constants["exceeded"] = static_cast<double>(g.exceeded);
    const auto expect = opt_int(cfg, "index.expect");
    const bool ok = !expect || g.sup_index <= *expect;
    if (g.exceeded > 0) {
        rep.verdict = Verdict::indeterminate;
        rep.notes.push_back("some anchors have no index below the trusted truncation order");
    } else {
        rep.verdict = verdict_from(ok, rep.samples_used, rep.samples_skipped);
    }
    if (expect) {
        rep.constants["expected_index"] = *expect;
        if (!ok) {
            const auto& w = g.anchors[g.witness];
            rep.witness = Witness{w.anchor, w.argmax, "local index above the expected value"};
            rep.verdict = Verdict::fail;
        }
    }
    if (!g.anchors.empty()) {
        rep.worst_margin = g.anchors.front().margin;
        for (const auto& a : g.anchors) rep.worst_margin = std::min(rep.worst_margin, a.margin);
    }
    ctx.data["anchors"] = rows;
    ctx.add(rep);
}

void cmd_dominate(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const Expr F = cfg.function();
    const LField L = cfg.weights();
    const auto anchors = anchors_from(cfg);
    const double d = cfg.real("dominate.d", 1.0);
    const auto N = opt_int(cfg, "dominate.N");
    const int samples = cfg.integer("dominate.skeleton_samples", 128);
    const int order = cfg.integer("index.order", 24);
    Json rows = Json::array();
    for (const auto& a : anchors) {
        const Jet jet = jet_from_expr(F, a, order);
        const auto cert = dominating_polynomial(jet, L, d, N, static_cast<std::size_t>(samples));
        Json r;
        r["anchor"] = point_json(a);
        r["N"] = cert.N;
        r["c"] = number(cert.c);
        r["m0"] = cert.m0;
        r["k0"] = cert.k0;
        r["r"] = number(cert.r);
        r["eta"] = number(cert.eta);
        r["lhs"] = number(cert.lhs);
        r["rhs"] = number(cert.rhs);
        r["coefficient_sum"] = number(cert.coefficient_sum);
        r["truncation_tail"] = number(cert.truncation_tail);
        r["verdict"] = to_string(cert.report.verdict);
        rows.push_back(r);
        ctx.add(cert.report);
    }
    ctx.data["anchors"] = rows;
}

void cmd_criterion(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const Expr F = cfg.function();
    const LField L = cfg.weights();
    const auto anchors = anchors_from(cfg);
    const auto opt = criteria_options(cfg);
    const std::string name = cfg.str("criterion.name");
    const std::string s = "criterion.";
    if (name == "thm1") {
        ctx.add(check_thm1(F, L, radius_vector(cfg, s + "R", 0.5), anchors, opt_int(cfg, s + "n0"),
                           opt_real(cfg, s + "p0"), opt));
    } else if (name == "thm2") {
        const std::string mode = cfg.str(s + "mode", "necessary");
        if (mode != "necessary" && mode != "axis") throw ConfigError("criterion.mode must be necessary or axis");
        ctx.add(check_thm2(F, L, radius_vector(cfg, s + "R", 0.5), anchors,
                           mode == "necessary" ? Thm2Mode::necessary : Thm2Mode::axis_sufficient, opt_int(cfg, s + "n0"),
                           opt_real(cfg, s + "p"), opt));
    } else if (name == "thm5") {
        ctx.add(check_thm5(F, L, radius_vector(cfg, s + "Rp", 0.5), radius_vector(cfg, s + "Rpp", 1.1), anchors,
                           opt));
    } else if (name == "directional") {
        const int j = cfg.integer(s + "j", 1);
        if (j < 1 || j > cfg.n()) throw ConfigError("criterion.j must lie in 1..n");
        ctx.add(check_directional(F, L, j - 1, cfg.real(s + "r1", 0.5), cfg.real(s + "r2", 1.0), anchors, opt));
    } else if (name == "hayman") {
        ctx.add(check_hayman(F, L, cfg.integer(s + "p", 0), anchors, opt_real(cfg, s + "c"), opt));
    } else if (name == "tail") {
        TailOptions t;
        t.theta = cfg.reals(s + "theta", {});
        t.tail_cap = cfg.integer(s + "tail_cap", t.tail_cap);
        ctx.add(check_tail(F, L, cfg.integer(s + "N", 0), opt_real(cfg, s + "c"), anchors, t, opt));
    } else if (name == "thm3") {
        const LField Lt = cfg.weights("problem.Lt");
        ctx.add(check_thm3_equiv(F, L, Lt, radius_vector(cfg, s + "theta1", 0.5), radius_vector(cfg, s + "theta2", 2.0),
                                 anchors, cfg.integer(s + "p", 0), opt));
    } else if (name == "ball") {
        static const std::map<std::string, BallMode> modes{{"necessary", BallMode::necessary},
                                                           {"sufficient", BallMode::sufficient},
                                                           {"modmax", BallMode::modmax},
                                                           {"modmax_axis", BallMode::modmax_axis}};
        const auto it = modes.find(cfg.str(s + "mode", "necessary"));
        if (it == modes.end())
            throw ConfigError("criterion.mode must be one of necessary, sufficient, modmax, modmax_axis");
        ctx.add(check_ball_variant(F, L, cfg.real(s + "r", 0.5), anchors, it->second, opt_int(cfg, s + "n0"),
                                   opt_real(cfg, s + "p"), opt));
    } else if (name == "index_cap") {
        ctx.add(check_index_cap(F, L, cfg.integer(s + "n0", 0), anchors, cfg.integer("index.order", 16)));
    } else {
        throw ConfigError("unknown criterion.name '" + name +
                          "' (thm1, thm2, thm5, directional, hayman, tail, thm3, ball, index_cap)");
    }
}

GrowthCap growth_cap(const RunConfig& cfg) {
    static const std::map<std::string, GrowthCapKind> kinds{{"none", GrowthCapKind::none},
                                                            {"thm15_C", GrowthCapKind::thm15_C},
                                                            {"thm15_W", GrowthCapKind::thm15_W},
                                                            {"lemma5", GrowthCapKind::lemma5},
                                                            {"lemma6", GrowthCapKind::lemma6}};
    const auto it = kinds.find(cfg.str("growth.cap", "none"));
    if (it == kinds.end()) throw ConfigError("growth.cap must be none, thm15_C, thm15_W, lemma5 or lemma6");
    GrowthCap cap;
    cap.kind = it->second;
    cap.N = cfg.integer("growth.N", 0);
    cap.C = cfg.real("growth.C", 0.0);
    cap.c = cfg.real("growth.c", 0.0);
    cap.p = cfg.integer("growth.p", 0);
    return cap;
}

void cmd_growth(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const std::string mode = cfg.str("growth.mode", "ratio");
    const int n = cfg.n();
    if (mode == "lagrange") {
        const auto r = lagrange_H_max(n);
        CriterionReport rep;
        rep.check = "lagrange_H_max";
        rep.constants["H"] = r.H;
        rep.constants["sqrt_n"] = std::sqrt(static_cast<double>(n));
        rep.constants["kkt_residual"] = r.kkt_residual;
        rep.constants["iterations"] = r.iterations;
        const double tol = cfg.real("growth.tol", 1e-9);
        rep.samples_used = 1;
        rep.worst_margin = tol - std::abs(r.H - std::sqrt(static_cast<double>(n)));
        rep.verdict = rep.worst_margin >= 0.0 ? Verdict::pass : Verdict::fail;
        ctx.data["x"] = r.x;
        ctx.add(rep);
        return;
    }
    if (mode == "gamma") {
        const MultiIndex dir = multi_index(cfg, "growth.direction", MultiIndex(static_cast<std::size_t>(n), 1));
        const MultiIndex K = multi_index(cfg, "growth.K", MultiIndex(static_cast<std::size_t>(n), 0));
        const double r = cfg.real("growth.r", std::sqrt(static_cast<double>(n)));
        const int max_m = cfg.integer("growth.max_m", 200);
        std::string csv = "m,bound\n";
        for (int m = 1; m <= max_m; ++m) {
            MultiIndex S(dir.size());
            for (std::size_t i = 0; i < S.size(); ++i) S[i] = m * dir[i];
            csv += std::to_string(m) + "," + csv_line({gamma_ratio_bound(S, K, n, r)});
        }
        const auto thr = gamma_ratio_threshold(dir, K, n, r, max_m);
        CriterionReport rep;
        rep.check = "gamma_ratio_bound";
        rep.constants["r"] = r;
        rep.samples_used = static_cast<std::size_t>(max_m);
        if (thr) rep.constants["threshold_m"] = *thr;
        rep.verdict = thr ? Verdict::pass : Verdict::fail;
        ctx.add(rep);
        ctx.result.files.push_back({"gamma.csv", csv});
        return;
    }
    const LField L = cfg.weights();
    const auto seq = radius_sequence(cfg, "growth");
    const auto grid = thetas(cfg, "growth");
    if (mode == "ratio") {
        GrowthRatioOptions o;
        o.thetas = grid;
        o.skeleton.require_inside_ball = cfg.integer("skeleton.inside_ball", 1) != 0;
        const auto c = growth_ratio_limsup(cfg.function(), L, seq, growth_cap(cfg), o);
        ctx.data["curve"] = curve_json(c);
        ctx.result.files.push_back({"growth.csv", curve_csv(c)});
        ctx.add(c.report);
    } else if (mode == "lemma4") {
        const auto c = lemma4_divergence(L, seq, grid);
        ctx.data["curve"] = curve_json(c);
        ctx.result.files.push_back({"growth.csv", curve_csv(c)});
        ctx.add(c.report);
    } else if (mode == "W") {
        WConditionOptions o;
        o.t_points = cfg.integer("growth.t_points", o.t_points);
        o.vanish_tol = cfg.real("growth.vanish_tol", o.vanish_tol);
        o.threshold = cfg.real("run.threshold", o.threshold);
        ctx.add(check_W_condition(L, seq, grid, o));
    } else if (mode == "thm15") {
        const auto R = radius_vector(cfg, "growth.R", 0.5 / std::sqrt(static_cast<double>(n)));
        const auto th = cfg.reals("growth.theta", std::vector<double>(static_cast<std::size_t>(n), 0.0));
        if (static_cast<int>(th.size()) != n) throw ConfigError("growth.theta needs n angles");
        ctx.add(thm15_derivative_bound(cfg.function(), L, R, th, cfg.integer("growth.N", 0)));
    } else {
        throw ConfigError("unknown growth.mode '" + mode + "' (ratio, lemma4, W, thm15, lagrange, gamma)");
    }
}

void cmd_lclass(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const std::string cls = cfg.str("lclass.class", "Q");
    const auto anchors = anchors_from(cfg);
    LocalSampling local = criteria_options(cfg).local;
    const double threshold = cfg.real("run.threshold", kDefaultThreshold);
    if (cls == "thm13") {
        std::vector<Expr> raw;
        for (int j = 1; j <= cfg.n(); ++j) raw.push_back(cfg.expression("problem.raw" + std::to_string(j), Grammar::analytic));
        ctx.add(check_theorem13(raw, cfg.real("lclass.c", 1.0), anchors, radius_vector(cfg, "lclass.R", 0.5), anchors,
                                local));
        return;
    }
    const LField L = cfg.weights();
    if (cls == "cone") {
        ctx.add(check_cone_condition(L, anchors));
    } else if (cls == "Q") {
        std::vector<std::vector<double>> grid;
        for (double r : cfg.reals("lclass.R", {0.5, 1.0}))
            grid.push_back(std::vector<double>(static_cast<std::size_t>(cfg.n()), r));
        ctx.add(check_Q_membership(L, grid, anchors, local, threshold));
    } else if (cls == "K") {
        std::vector<std::vector<double>> grid;
        for (double r : cfg.reals("lclass.radii", {0.2, 0.4, 0.6}))
            grid.push_back(std::vector<double>(static_cast<std::size_t>(cfg.n()), r));
        ctx.add(check_K_membership(L, grid, cfg.integer("lclass.angles", 8), threshold));
    } else {
        throw ConfigError("unknown lclass.class '" + cls + "' (cone, Q, K, thm13)");
    }
}

PDESystem system_from(const RunConfig& cfg) {
    PDESystem sys;
    sys.n = cfg.n();
    for (int j = 1; j <= sys.n; ++j) {
        const std::string e = "pde.eq" + std::to_string(j) + "_";
        PDEEquation eq;
        eq.p = cfg.integer(e + "p", 1);
        eq.lead = cfg.expression(e + "lead", Grammar::analytic);
        if (cfg.has(e + "lower")) {
            std::vector<std::string> items;
            const std::string text = cfg.str(e + "lower");
            boost::split(items, text, boost::is_any_of(";"));
            for (const auto& item : items) {
                if (boost::trim_copy(item).empty()) continue;
                const auto colon = item.find(':');
                if (colon == std::string::npos) throw ConfigError(e + "lower: expected 'S : expression'");
                std::vector<std::string> parts;
                const std::string idx = boost::trim_copy(item.substr(0, colon));
                boost::split(parts, idx, boost::is_any_of(", "), boost::token_compress_on);
                MultiIndex S;
                for (const auto& p : parts) {
                    try {
                        S.push_back(std::stoi(p));
                    } catch (const std::exception&) {
                        throw ConfigError(e + "lower: bad index '" + idx + "'");
                    }
                }
                eq.lower.push_back(
                    {S, parse_labeled(e + "lower[" + idx + "]", boost::trim_copy(item.substr(colon + 1)), sys.n,
                                      Grammar::analytic)});
            }
        }
        if (cfg.has(e + "rhs")) eq.rhs = cfg.expression(e + "rhs", Grammar::analytic);
        sys.equations.push_back(eq);
    }
    try {
        sys.validate();
    } catch (const Error& err) {
        throw ConfigError(std::string("pde: ") + err.what());
    }
    return sys;
}

void cmd_pde(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const Expr F = cfg.function();
    const LField L = cfg.weights();
    const PDESystem sys = system_from(cfg);
    static const std::map<std::string, CVariant> variants{{"thm22", CVariant::thm22}, {"thm23", CVariant::thm23},
                                                          {"thm24", CVariant::thm24}, {"thm25", CVariant::thm25},
                                                          {"cor5", CVariant::cor5}};
    VerifyOptions opt;
    if (cfg.has("pde.variant")) {
        const auto it = variants.find(cfg.str("pde.variant"));
        if (it == variants.end()) throw ConfigError("pde.variant must be thm22, thm23, thm24, thm25 or cor5");
        opt.variant = it->second;
    }
    opt.r_prime = cfg.real("pde.r_prime", opt.r_prime);
    opt.residual_tol = cfg.real("pde.residual_tol", opt.residual_tol);
    opt.run_growth = cfg.integer("pde.growth", 1) != 0;
    if (cfg.has("growth.count") || cfg.has("growth.r_first") || cfg.has("growth.r_last"))
        opt.growth_sequence = radius_sequence(cfg, "growth");
    opt.criteria = criteria_options(cfg);
    opt.growth.skeleton.require_inside_ball = cfg.integer("skeleton.inside_ball", 1) != 0;
    if (cfg.integer("growth.angles", 0) > 0) opt.growth.thetas = thetas(cfg, "growth");
    const auto region = pde_region(cfg.n(), static_cast<std::size_t>(cfg.integer("pde.region_count", 200)),
                                   cfg.real("pde.region_radius", 0.9), opt.r_prime, cfg.seed());
    const auto v = verify_solution(F, sys, L, region, opt);

    Json b = Json::array();
    for (std::size_t j = 0; j < v.bounds.equations.size(); ++j) {
        const auto& eb = v.bounds.equations[j];
        Json e;
        e["shell"] = eb.shell;
        Json B = Json::array();
        for (const auto& [key, val] : eb.B) B.push_back({{"S", key.first}, {"M", key.second}, {"value", number(val)}});
        Json lead = Json::array();
        for (const auto& [M, val] : eb.B_lead) lead.push_back({{"M", M}, {"value", number(val)}});
        Json D = Json::array();
        for (const auto& [I, val] : eb.D) D.push_back({{"I", I}, {"value", number(val)}});
        e["B"] = B;
        e["B_lead"] = lead;
        e["D"] = D;
        e["rhs_zero"] = eb.rhs_zero;
        b.push_back(e);
    }
    ctx.data["variant"] = to_string(v.variant);
    ctx.data["c"] = number(v.c);
    ctx.data["residual_max"] = number(v.residual_max);
    ctx.data["bounds"] = b;
    ctx.add(v.hayman);
    if (v.growth) {
        ctx.data["curve"] = curve_json(*v.growth);
        ctx.result.files.push_back({"growth.csv", curve_csv(*v.growth)});
        ctx.add(v.growth->report);
    }
    ctx.add(v.report);
}

}  // namespace

Json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

Json to_json(const CriterionReport& r) {
    Json j;
    j["check"] = r.check;
    j["verdict"] = to_string(r.verdict);
    Json k = Json::object();
    for (const auto& [name, v] : r.constants) k[name] = number(v);
    j["constants"] = k;
    j["worst_margin"] = number(r.worst_margin);
    if (r.witness) {
        j["witness"] = {{"point", point_json(r.witness->point)},
                        {"index", index_json(r.witness->index)},
                        {"detail", r.witness->detail}};
    } else {
        j["witness"] = nullptr;
    }
    j["samples_used"] = r.samples_used;
    j["samples_skipped"] = r.samples_skipped;
    j["notes"] = r.notes;
    return j;
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::pass: return exit_pass;
        case Verdict::fail: return exit_fail;
        case Verdict::indeterminate: return exit_indeterminate;
    }
    return exit_usage;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"index", "dominate", "criterion", "growth", "lclass", "pde"};
    return names;
}

std::string dump(const Json& report) { return report.dump(2) + "\n"; }

RunResult run_command(const std::string& command, const RunConfig& cfg) {
    static const std::map<std::string, std::function<void(Context&)>> table{
        {"index", cmd_index},   {"dominate", cmd_dominate}, {"criterion", cmd_criterion},
        {"growth", cmd_growth}, {"lclass", cmd_lclass},     {"pde", cmd_pde}};
    const auto it = table.find(command);
    if (it == table.end()) throw ConfigError("unknown command '" + command + "'");

    RunResult result;
    Context ctx{cfg, result};
    Json error = nullptr;
    try {
        it->second(ctx);
        result.exit_code = exit_code(ctx.verdict);
    } catch (const ConfigError&) {
        throw;
    } catch (const ResidualFailure& e) {
        error = e.what();
        ctx.verdict = Verdict::fail;
        result.exit_code = exit_fail;
    } catch (const Error& e) {
        error = e.what();
        ctx.verdict = Verdict::indeterminate;
        result.exit_code = exit_usage;
    }

    Json config = Json::object();
    std::istringstream lines(cfg.canonical());
    for (std::string line; std::getline(lines, line);) {
        const auto eq = line.find(" = ");
        config[line.substr(0, eq)] = line.substr(eq + 3);
    }
    Json& rep = result.report;
    rep["tool"] = "lindex";
    rep["command"] = command;
    rep["config_sha256"] = cfg.sha256();
    rep["config"] = config;
    rep["verdict"] = error.is_null() ? to_string(ctx.verdict) : "error";
    rep["exit_code"] = result.exit_code;
    rep["error"] = error;
    rep["checks"] = ctx.checks;
    rep["data"] = ctx.data;
    return result;
}

}  // namespace lindex::app
