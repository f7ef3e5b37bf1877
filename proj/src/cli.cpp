#include "pathheat/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "pathheat/acceptance.hpp"
#include "pathheat/config.hpp"
#include "pathheat/drift.hpp"
#include "pathheat/dynamics.hpp"
#include "pathheat/errors.hpp"
#include "pathheat/functionals.hpp"
#include "pathheat/inequalities.hpp"
#include "pathheat/measures.hpp"
#include "pathheat/parallel.hpp"
#include "pathheat/report.hpp"

namespace pathheat {

using nlohmann::json;

namespace {

// Flags shared by every subcommand; unset ones leave the config untouched.
struct Common {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string manifold;
    int n = 0;
    std::string delta;
    std::size_t N = 0;
    std::vector<CLI::Option*> opts;
};

void add_common(CLI::App* app, Common& c) {
    c.opts.push_back(app->add_option("--config", c.config, "JSON config file"));
    c.opts.push_back(app->add_option("--out", c.out, "output directory"));
    c.opts.push_back(app->add_option("--seed", c.seed, "master seed"));
    c.opts.push_back(app->add_option("--threads", c.threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber));
    c.opts.push_back(app->add_option("--manifold", c.manifold, "e.g. sphere:2:1.0, hyperbolic:2, euclidean:1, torus:1,2"));
    c.opts.push_back(app->add_option("--n", c.n, "partition size")->check(CLI::PositiveNumber));
    c.opts.push_back(app->add_option("--delta", c.delta, "segment bound or 'auto'"));
    c.opts.push_back(app->add_option("--N", c.N, "number of draws")->check(CLI::PositiveNumber));
}

bool given(const CLI::App* app, const std::string& name) { return app->count(name) > 0; }

RunConfig resolve(const CLI::App* app, const Common& c) {
    RunConfig cfg;
    cfg.seed = default_seed(0);
    if (given(app, "--config")) {
        auto seed = cfg.seed;
        cfg = load_config(c.config);
        json raw = json::parse(std::ifstream(c.config), nullptr, false, true);
        if (!raw.is_object() || !raw.contains("seed")) cfg.seed = seed;
    }
    if (given(app, "--out")) cfg.out = c.out;
    if (given(app, "--seed")) cfg.seed = c.seed;
    if (given(app, "--threads")) cfg.threads = c.threads;
    if (given(app, "--manifold")) cfg.manifold = parse_manifold(c.manifold);
    if (given(app, "--n")) cfg.n = c.n;
    if (given(app, "--delta")) {
        if (c.delta == "auto") {
            cfg.delta.reset();
        } else {
            try {
                cfg.delta = std::stod(c.delta);
            } catch (const std::exception&) {
                throw ConfigError("bad value for --delta: '" + c.delta + "'");
            }
        }
    }
    if (given(app, "--N")) cfg.sampler.N = c.N;
    validate(cfg);
    set_threads(cfg.threads);
    return cfg;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& flag) {
    std::vector<int> v;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');) {
        try {
            v.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw ConfigError("bad value for " + flag + ": '" + s + "'");
        }
    }
    if (v.empty()) throw ConfigError("empty list for " + flag);
    return v;
}

Vec parse_vec(const std::string& s, const std::string& flag) {
    std::vector<double> v;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ',');) {
        try {
            v.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("bad value for " + flag + ": '" + s + "'");
        }
    }
    return Eigen::Map<Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// "a:b:h" inclusive of b up to rounding.
std::vector<double> parse_grid(const std::string& s) {
    std::vector<double> parts;
    std::stringstream ss(s);
    for (std::string tok; std::getline(ss, tok, ':');) {
        try {
            parts.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("bad value for --k-grid: '" + s + "'");
        }
    }
    if (parts.size() == 1) return parts;
    if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0])
        throw ConfigError("--k-grid expects lo:hi:step with step > 0");
    std::vector<double> g;
    long count = std::lround(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    if (count > 100000) throw ConfigError("--k-grid has too many points");
    for (long k = 0; k <= count; ++k) g.push_back(parts[0] + k * parts[2]);
    return g;
}

struct Context {
    RunConfig cfg;
    Report report;
    std::ostream& out;
};

int finish(Context& ctx, std::chrono::steady_clock::time_point t0) {
    ctx.report.config = to_json(ctx.cfg);
    ctx.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    OutputDir dir(ctx.cfg.out);
    dir.write_json(ctx.report.command + ".json", ctx.report.to_json());
    for (auto it = ctx.report.criteria.begin(); it != ctx.report.criteria.end(); ++it)
        ctx.out << (it.value().get<bool>() ? "PASS " : "FAIL ") << it.key() << "\n";
    ctx.out << "report: " << (std::filesystem::path(ctx.cfg.out) / (ctx.report.command + ".json")).string() << "\n";
    return ctx.report.passed() ? 0 : 1;
}

// Checks on random points: exp/log round trip, transport isometry, frames, Ricci trace.
void cmd_geom_check(Context& ctx) {
    Manifold m = make_manifold(ctx.cfg.manifold);
    Rng rng = make_stream(ctx.cfg.seed, 0);
    double roundtrip = 0, isometry = 0, frames = 0, ricci = 0;
    const double reach = 0.9 * std::min(m.inj_radius(), 3.0);
    for (int k = 0; k < 200; ++k) {
        Point p = m.random_point(rng);
        Frame u = m.random_frame(p, rng);
        Vec a = gaussian_vec(rng, m.dim());
        Tangent v = u.from_frame(a.normalized() * reach * uniform01(rng));
        Point q = m.exp(p, v);
        roundtrip = std::max(roundtrip, m.norm(p, m.log(p, q) - v));
        Tangent w = u.from_frame(gaussian_vec(rng, m.dim()));
        Tangent tw = m.transport(p, q, w);
        isometry = std::max(isometry, std::abs(m.norm(q, tw) - m.norm(p, w)));
        Mat g(m.dim(), m.dim());
        for (int i = 0; i < m.dim(); ++i)
            for (int j = 0; j < m.dim(); ++j) g(i, j) = m.inner(p, u.columns.col(i), u.columns.col(j));
        frames = std::max(frames, (g - Mat::Identity(m.dim(), m.dim())).cwiseAbs().maxCoeff());
        ricci = std::max(ricci, std::abs(m.ricci_matrix(u).trace() - m.scalar_curvature(p)));
    }
    auto part = Partition::uniform(ctx.cfg.n);
    double delta = resolve_delta(ctx.cfg, m);
    auto adm = admissibility(m, delta);
    ctx.report.results = {{"manifold", m.name()},
                          {"curvature", m.curvature()},
                          {"kappa0", m.kappa0()},
                          {"inj_radius", m.inj_radius()},
                          {"delta", delta},
                          {"eps", part.eps},
                          {"sup_bound_ok", adm.sup_bound_ok},
                          {"expansion_ok", adm.expansion_ok},
                          {"ricci_lower_K", ricci_lower_k(m)},
                          {"exp_log_roundtrip", roundtrip},
                          {"transport_isometry", isometry},
                          {"frame_orthonormality", frames},
                          {"ricci_trace", ricci}};
    ctx.report.criteria = {{"exp_log_roundtrip", roundtrip < 1e-9},
                           {"transport_isometry", isometry < 1e-10},
                           {"frame_orthonormality", frames < 1e-12},
                           {"ricci_trace", ricci < 1e-10},
                           {"delta_admissible", adm.ok()}};
}

void cmd_simulate(Context& ctx, const std::string& stats, int chains) {
    const auto& dyn = ctx.cfg.dynamics;
    OutputDir dir(ctx.cfg.out);
    if (dyn.variant == "flat_dn" || dyn.variant == "flat_dd") {
        FlatBasis basis = dyn.variant == "flat_dn" ? FlatBasis::DirichletNeumann : FlatBasis::DirichletDirichlet;
        const int grid = ctx.cfg.n;
        const std::size_t block = 250;
        const std::size_t blocks = (chains + block - 1) / block;
        std::vector<Eigen::VectorXd> samples(chains);
        parallel_for(blocks, [&](std::size_t b) {
            Rng rng = make_stream(ctx.cfg.seed, b);
            for (std::size_t c = b * block; c < std::min<std::size_t>(chains, (b + 1) * block); ++c) {
                auto st = flat_init(basis, dyn.modes, 1);
                long steps = std::max(1L, std::lround(dyn.t_end / dyn.dt));
                for (long k = 0; k < steps; ++k) flat_she_exact(st, dyn.t_end / steps, rng);
                Eigen::VectorXd x(grid + 1);
                for (int i = 0; i <= grid; ++i) x[i] = st.field(static_cast<double>(i) / grid)[0];
                samples[c] = x;
            }
        });
        CsvTable t({"s", "s2", "covariance", "stderr", "target"});
        double worst = 0;
        for (int i = 0; i <= grid; ++i)
            for (int j = i; j <= grid; ++j) {
                RunningStats prod;
                for (const auto& x : samples) prod.add(x[i] * x[j]);
                double s = static_cast<double>(i) / grid, s2 = static_cast<double>(j) / grid;
                double target = basis == FlatBasis::DirichletNeumann ? std::min(s, s2) : s * (1 - s2);
                t.add({s, s2, prod.mean(), prod.stderr_mean(), target});
                worst = std::max(worst, std::abs(prod.mean() - target) - std::max(3 * prod.stderr_mean(), 0.02));
            }
        dir.write_csv("covariance.csv", t);
        auto probe = flat_init(basis, dyn.modes, 1);
        ctx.report.results = {{"variant", dyn.variant}, {"modes", dyn.modes},    {"chains", chains},
                              {"t_end", dyn.t_end},     {"stats", stats},        {"max_excess", worst},
                              {"truncation_bound", probe.tail_bound()}};
        ctx.report.criteria = {{"covariance", worst <= 0}};
        return;
    }
    Manifold m = make_manifold(ctx.cfg.manifold);
    auto part = Partition::uniform(ctx.cfg.n);
    double delta = resolve_delta(ctx.cfg, m);
    Rng rng = make_stream(ctx.cfg.seed, 0);
    auto start = make_path(m, m.origin(), std::vector<Point>(ctx.cfg.n, m.origin()), part, delta);
    SheSettings s;
    s.variant = dyn.variant == "sigma" ? SheVariant::Sigma : SheVariant::Full;
    s.dt = dyn.dt * part.eps * part.eps;
    auto state = she_init(m, start, m.tangent_frame(m.origin()), s);
    long steps = std::lround(dyn.t_end / s.dt);
    std::vector<std::string> header = {"t", "i"};
    for (int k = 0; k < m.ambient_dim(); ++k) header.push_back("x" + std::to_string(k));
    CsvTable traj(header);
    auto dump = [&] {
        for (int i = 0; i <= ctx.cfg.n; ++i) {
            std::vector<double> row = {state.t, static_cast<double>(i)};
            for (int k = 0; k < m.ambient_dim(); ++k) row.push_back(state.st.path.nodes[i][k]);
            traj.add(row);
        }
    };
    std::vector<RunningStats> dist(ctx.cfg.n + 1);
    if (dyn.save_every > 0) dump();
    for (long k = 1; k <= steps; ++k) {
        she_advance(m, state, rng, s);
        for (int i = 0; i <= ctx.cfg.n; ++i) dist[i].add(m.distance(m.origin(), state.st.path.nodes[i]));
        if (dyn.save_every > 0 && k % dyn.save_every == 0) dump();
    }
    if (dyn.save_every > 0) dir.write_csv("trajectory.csv", traj);
    CsvTable summary({"i", "s", "mean_distance", "stderr"});
    json rows = json::array();
    for (int i = 0; i <= ctx.cfg.n; ++i) {
        summary.add({static_cast<double>(i), part.s(i), dist[i].mean(), dist[i].stderr_mean()});
        rows.push_back(dist[i].mean());
    }
    dir.write_csv("summary.csv", summary);
    ctx.report.results = {{"variant", dyn.variant}, {"manifold", m.name()}, {"n", ctx.cfg.n},
                          {"dt", s.dt},             {"steps", steps},       {"t_end", state.t},
                          {"rejections", state.rejections}, {"mean_distance", rows}};
}

void cmd_sample_nu(Context& ctx, int keep) {
    Manifold m = make_manifold(ctx.cfg.manifold);
    auto part = Partition::uniform(ctx.cfg.n);
    double delta = resolve_delta(ctx.cfg, m);
    ChainConfig cc;
    cc.chains = ctx.cfg.sampler.chains;
    cc.burn_in = ctx.cfg.sampler.burn_in;
    cc.samples = ctx.cfg.sampler.samples;
    cc.thin = ctx.cfg.sampler.thin;
    auto e = nu_sample(m, part, delta, cc, ctx.cfg.seed);
    auto energy_mean = ensemble_mean(e, [&](const DiscretePath& p) { return energy(m, p); });
    OutputDir dir(ctx.cfg.out);
    std::ostringstream os;
    int stored = std::min<int>(keep, static_cast<int>(e.paths.size()));
    for (int k = 0; k < stored; ++k) write_path_csv(os, m, e.paths[k], ctx.cfg.seed);
    dir.write_text("paths.csv", os.str());
    ctx.report.results = {{"sampler", e.sampler},       {"manifold", m.name()},  {"n", ctx.cfg.n},
                          {"delta", delta},             {"chains", e.chains},    {"paths", e.paths.size()},
                          {"acceptance", e.acceptance}, {"ess", e.ess},          {"rhat", e.rhat},
                          {"step", e.step},             {"outside_fraction", e.outside_fraction},
                          {"mean_energy", energy_mean.mean}, {"mean_energy_stderr", energy_mean.stderr_},
                          {"paths_written", stored}};
}

void cmd_mass(Context& ctx, const std::vector<int>& ns) {
    Manifold m = make_manifold(ctx.cfg.manifold);
    json rows = json::array();
    std::vector<double> vals;
    CsvTable t({"n", "mass", "stderr", "ess"});
    for (int n : ns) {
        auto part = Partition::uniform(n);
        double delta = ctx.cfg.delta ? *ctx.cfg.delta : measure_delta(m, part);
        auto est = nu_total_mass(m, part, delta, ctx.cfg.sampler.N, ctx.cfg.seed + n);
        vals.push_back(est.value);
        rows.push_back({{"n", n}, {"mass", est.value}, {"stderr", est.stderr_}, {"ess", est.ess}});
        t.add({static_cast<double>(n), est.value, est.stderr_, est.ess});
    }
    OutputDir(ctx.cfg.out).write_csv("mass.csv", t);
    double reference = std::exp(-m.scalar_curvature(m.origin()) / 6);
    double extrap = ns.size() > 1 ? richardson(ns, vals) : vals.back();
    ctx.report.results = {{"manifold", m.name()}, {"rows", rows}, {"richardson", extrap},
                          {"reference", reference}, {"rel_gap", std::abs(extrap / reference - 1)}};
}

void cmd_convergence(Context& ctx, const std::vector<int>& ns, int axis) {
    Manifold m = make_manifold(ctx.cfg.manifold);
    if (axis < 0 || axis >= m.ambient_dim()) throw ConfigError("--axis out of range");
    auto g = [axis](const Point& x) { return x[axis]; };
    double ref = std::numeric_limits<double>::quiet_NaN();
    if (m.kind() == ManifoldKind::Sphere && m.dim() == 2 && m.radius() == 1.0) ref = weighted_wiener_reference(m, g);
    auto study = convergence_study(m, [&](const DiscretePath& p) { return g(p.nodes.back()); }, ns,
                                   ctx.cfg.sampler.N, ctx.cfg.seed, ref);
    json rows = json::array();
    CsvTable t({"n", "estimate", "stderr", "reference", "gap"});
    for (const auto& r : study.rows) {
        rows.push_back({{"n", r.n}, {"estimate", r.estimate}, {"stderr", r.stderr_}, {"reference", r.reference},
                        {"gap", r.gap}});
        t.add({static_cast<double>(r.n), r.estimate, r.stderr_, r.reference, r.gap});
    }
    OutputDir(ctx.cfg.out).write_csv("convergence.csv", t);
    ctx.report.results = {{"manifold", m.name()}, {"functional", "x" + std::to_string(axis) + "(gamma_1)"},
                          {"rows", rows}, {"extrapolated", study.extrapolated}};
}

void cmd_ibp(Context& ctx) {
    Manifold m = make_manifold(ctx.cfg.manifold);
    int steps = ctx.cfg.sampler.steps;
    auto part = Partition::uniform(steps);
    auto fs = ctx.cfg.functionals, hs = ctx.cfg.directions;
    if (fs.empty()) fs = {"time_integral(0)"};
    if (hs.empty()) hs = {"linear(0)"};
    if (fs.size() != hs.size()) {
        if (hs.size() == 1) hs.resize(fs.size(), hs[0]);
        else if (fs.size() == 1) fs.resize(hs.size(), fs[0]);
        else throw ConfigError("functionals and directions must pair up");
    }
    std::vector<CylinderFunction> F;
    std::vector<DirectionField> H;
    for (std::size_t k = 0; k < fs.size(); ++k) {
        F.push_back(builtin_functional(fs[k], part));
        H.push_back(builtin_direction(hs[k], m.dim()));
    }
    auto reps = ibp_check(m, F, H, ctx.cfg.sampler.N, steps, ctx.cfg.seed);
    json rows = json::array();
    CsvTable t({"pair", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "diff_stderr", "z"});
    for (std::size_t k = 0; k < reps.size(); ++k) {
        const auto& r = reps[k];
        rows.push_back({{"functional", fs[k]}, {"direction", hs[k]}, {"lhs", r.lhs.mean}, {"lhs_stderr", r.lhs.stderr_},
                        {"rhs", r.rhs.mean}, {"rhs_stderr", r.rhs.stderr_}, {"stderr", r.stderr_}, {"z", r.z}});
        t.add({static_cast<double>(k), r.lhs.mean, r.lhs.stderr_, r.rhs.mean, r.rhs.stderr_, r.stderr_, r.z});
        ctx.report.criteria[fs[k] + " / " + hs[k]] = std::abs(r.z) <= 3;
    }
    OutputDir(ctx.cfg.out).write_csv("ibp.csv", t);
    ctx.report.results = {{"manifold", m.name()}, {"draws", ctx.cfg.sampler.N}, {"steps", steps}, {"pairs", rows}};
}

void cmd_qv(Context& ctx, int axis) {
    Manifold m = make_manifold(ctx.cfg.manifold);
    auto part = Partition::uniform(ctx.cfg.n);
    double delta = resolve_delta(ctx.cfg, m);
    if (axis < 0 || axis >= m.ambient_dim()) throw ConfigError("--axis out of range");
    Rng rng = make_stream(ctx.cfg.seed, 0);
    auto start = brownian_path_sample(m, part, delta, rng).path;
    SheSettings s;
    s.variant = ctx.cfg.dynamics.variant == "sigma" ? SheVariant::Sigma : SheVariant::Full;
    s.dt = ctx.cfg.dynamics.dt * part.eps * part.eps;
    auto state = she_init(m, start, m.tangent_frame(m.origin()), s);
    std::vector<Vec> c(ctx.cfg.n + 1, Vec::Zero(m.ambient_dim()));
    c[ctx.cfg.n][axis] = 1;
    auto rep = qv_check(m, state, s, ctx.cfg.dynamics.t_end, c, rng);
    ctx.report.results = {{"manifold", m.name()}, {"n", ctx.cfg.n},          {"dt", s.dt},
                          {"steps", rep.steps},   {"realized", rep.realized}, {"predicted", rep.predicted},
                          {"ratio", rep.ratio}};
    ctx.report.criteria = {{"qv_ratio", rep.ratio >= 0.95 && rep.ratio <= 1.05}};
}

void cmd_drift_limit(Context& ctx, const std::string& curve, const std::vector<int>& ns, double theta) {
    Manifold m = make_manifold(ctx.cfg.manifold);
    SmoothCurve c;
    if (curve == "great_circle") c = great_circle(m);
    else if (curve == "latitude") c = latitude_circle(m, theta);
    else if (curve == "sine") c = flat_sine(m);
    else if (curve == "constant") c = constant_curve(m);
    else throw ConfigError("unknown --curve '" + curve + "'");
    auto study = drift_limit_study(m, c, ns);
    json rows = json::array();
    CsvTable t({"n", "eps", "error"});
    for (const auto& r : study.rows) {
        rows.push_back({{"n", r.n}, {"eps", r.eps}, {"error", r.error}});
        t.add({static_cast<double>(r.n), r.eps, r.error});
    }
    OutputDir(ctx.cfg.out).write_csv("drift_limit.csv", t);
    ctx.report.results = {{"manifold", m.name()}, {"curve", c.name}, {"rows", rows}, {"slope", study.slope}};
}

void cmd_constants(Context& ctx, const std::string& grid, int d, double T, int n, int truncation) {
    CsvTable t({"K", "C", "C0", "Ctilde", "C_einstein", "C1", "C2n"});
    json rows = json::array();
    for (double K : parse_grid(grid)) {
        if (std::abs(K) < 1e-12) K = 0;
        auto r = constant_report(K, d, T, n, truncation);
        t.add({K, r.C, r.C0, r.Ctilde, r.einstein.value, r.gradient.c1, r.gradient.c2n});
        rows.push_back({{"K", K},
                        {"C", r.C},
                        {"C_branch", lsi_exp_term(K) <= lsi_c0(K) ? "exp" : "C0"},
                        {"C0", r.C0},
                        {"Ctilde", r.Ctilde},
                        {"Ctilde_branch", r.ctilde_first_branch ? "sqrt" : "square"},
                        {"C_einstein", r.einstein.value},
                        {"einstein_truncation", r.einstein.terms},
                        {"einstein_error_bound", r.einstein.value_error},
                        {"C1", r.gradient.c1},
                        {"C2n", r.gradient.c2n}});
    }
    OutputDir(ctx.cfg.out).write_csv("constants.csv", t);
    ctx.report.results = {{"d", d}, {"T", T}, {"n", n}, {"rows", rows}};
}

void cmd_lsi(Context& ctx, const std::string& functional, const std::string& energy_mode) {
    Manifold m = make_manifold(ctx.cfg.manifold);
    if (energy_mode != "half" && energy_mode != "full") throw ConfigError("--energy must be half or full");
    int steps = ctx.cfg.sampler.steps;
    auto F = builtin_functional(functional, Partition::uniform(steps));
    double K = ctx.cfg.K ? *ctx.cfg.K : ricci_lower_k(m);
    auto r = lsi_empirical(m, F, K, ctx.cfg.sampler.N, steps, ctx.cfg.seed, energy_mode == "half");
    ctx.report.results = {{"manifold", m.name()}, {"functional", functional}, {"K", K},
                          {"C", r.C},             {"energy", energy_mode},    {"entropy", r.entropy},
                          {"energy_term", r.energy_term}, {"slack", r.slack}, {"stderr", r.stderr_}};
}

void cmd_grad_ineq(Context& ctx, const std::string& kind, const std::string& a, double T1, double T2,
                   const std::string& y) {
    Manifold m = make_manifold(ctx.cfg.manifold);
    Vec av = parse_vec(a, "--a");
    if (av.size() != m.ambient_dim()) throw ConfigError("--a needs " + std::to_string(m.ambient_dim()) + " entries");
    Point p = m.origin();
    if (!y.empty()) {
        Vec v = parse_vec(y, "--y");
        if (v.size() != m.dim()) throw ConfigError("--y needs " + std::to_string(m.dim()) + " entries");
        p = m.exp(p, m.tangent_frame(p).from_frame(v));
    }
    double K = ctx.cfg.K ? *ctx.cfg.K : ricci_lower_k(m);
    auto r = gradient_ineq_check(m, test_function(kind, av), T1, T2, p, K);
    ctx.report.results = {{"manifold", m.name()}, {"f", kind}, {"T1", T1}, {"T2", T2}, {"K", K},
                          {"lhs", r.lhs},          {"rhs", r.rhs}, {"margin", r.margin}, {"quad_error", r.quad_error}};
    ctx.report.criteria = {{"margin", r.margin >= -3 * r.quad_error - 1e-12}};
}

void cmd_verify(Context& ctx, const std::string& profile, const std::string& only) {
    AcceptanceOptions opt;
    opt.profile = profile;
    opt.seed = ctx.cfg.seed;
    opt.threads = ctx.cfg.threads;
    opt.log = &ctx.out;
    if (!only.empty()) opt.only = parse_int_list(only, "--only");
    auto results = run_acceptance(opt);
    ctx.report.results = {{"profile", profile}, {"criteria", acceptance_payload(results)}};
    for (const auto& r : results) ctx.report.criteria["criterion " + std::to_string(r.id)] = r.pass;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete path-space heat flow toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version_stamp());

    std::map<std::string, Common> common;
    auto sub = [&](const std::string& name, const std::string& help) {
        auto* s = app.add_subcommand(name, help);
        add_common(s, common[name]);
        return s;
    };

    sub("geom-check", "geometry self-checks and delta admissibility");

    auto* sim = sub("simulate", "run the discretized heat flow or the flat spectral solver");
    std::string variant, stats = "summary";
    double t_end = 0, dt = 0;
    int modes = 0, chains = 2000, save_every = 0;
    sim->add_option("--variant", variant, "full, sigma, flat_dn or flat_dd");
    sim->add_option("--t", t_end, "final time");
    sim->add_option("--dt", dt, "time step (units of eps^2 for manifold variants)");
    sim->add_option("--modes", modes, "spectral modes");
    sim->add_option("--stats", stats, "covariance or summary");
    sim->add_option("--chains", chains, "independent chains for flat statistics")->check(CLI::PositiveNumber);
    sim->add_option("--save-every", save_every, "trajectory output stride");

    auto* nu = sub("sample-nu", "MALA samples of the discrete path measure");
    int keep = 100;
    nu->add_option("--keep", keep, "paths written to paths.csv");

    auto* mass = sub("mass", "importance-sampled total mass with Richardson extrapolation");
    std::string ns_text = "4,8,16";
    mass->add_option("--ns", ns_text, "partition sizes");

    auto* conv = sub("convergence", "endpoint coordinate against the weighted Wiener reference");
    std::string conv_ns = "4,8,16";
    int axis = 0;
    conv->add_option("--ns", conv_ns, "partition sizes");
    conv->add_option("--axis", axis, "ambient coordinate");

    auto* ibp = sub("ibp", "integration by parts check");
    std::vector<std::string> fs, hs;
    int steps = 0;
    ibp->add_option("--functional", fs, "built-in functional (repeatable)");
    ibp->add_option("--direction", hs, "built-in direction (repeatable)");
    ibp->add_option("--steps", steps, "Brownian steps");

    auto* qv = sub("qv", "quadratic variation of an endpoint coordinate");
    int qv_axis = 1;
    double qv_t = 0, qv_dt = 0;
    qv->add_option("--axis", qv_axis, "ambient coordinate");
    qv->add_option("--t", qv_t, "final time");
    qv->add_option("--dt", qv_dt, "time step in units of eps^2");

    auto* dl = sub("drift-limit", "discrete drift against the continuum drift");
    std::string curve = "great_circle", dl_ns = "8,16,32,64,128";
    double theta = 1.0;
    dl->add_option("--curve", curve, "great_circle, latitude, sine or constant");
    dl->add_option("--ns", dl_ns, "partition sizes");
    dl->add_option("--theta", theta, "polar angle of the latitude circle");

    auto* cst = sub("constants", "log-Sobolev and gradient inequality constants on a K grid");
    std::string grid = "-2:2:0.5";
    int cd = 2, cn = 1, trunc = 10000;
    double cT = 1.0;
    cst->add_option("--k-grid", grid, "lo:hi:step or a single value");
    cst->add_option("--d", cd, "dimension for the Einstein constant")->check(CLI::PositiveNumber);
    cst->add_option("--T", cT, "horizon for the gradient constants");
    cst->add_option("--n-grad", cn, "n in C_2n")->check(CLI::PositiveNumber);
    cst->add_option("--truncation", trunc, "series terms")->check(CLI::Range(1000, 10000000));

    auto* lsi = sub("lsi", "empirical log-Sobolev slack");
    std::string lsi_f = "sin(time_integral(1))", energy_mode = "half";
    double lsi_K = 0;
    lsi->add_option("--functional", lsi_f, "built-in functional");
    lsi->add_option("--energy", energy_mode, "half: 1/2 E|DF|^2, full: E|DF|^2");
    lsi->add_option("--K", lsi_K, "Ricci lower bound constant");
    lsi->add_option("--steps", steps, "Brownian steps");

    auto* gi = sub("grad-ineq", "semigroup gradient inequality");
    std::string gkind = "linear", ga = "0,1,0", gy;
    double T1 = 1.0, T2 = 0.0, gK = 0;
    gi->add_option("--f", gkind, "linear, square or exp");
    gi->add_option("--a", ga, "coefficient vector (ambient)");
    gi->add_option("--T1", T1, "upper time");
    gi->add_option("--T2", T2, "lower time");
    gi->add_option("--y", gy, "base point in normal coordinates at the origin");
    gi->add_option("--K", gK, "Ricci lower bound constant");

    auto* ver = sub("verify", "acceptance suite");
    std::string profile = "desk", only;
    ver->add_option("--profile", profile, "desk or quick");
    ver->add_option("--only", only, "comma-separated criteria");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        for (auto* s : app.get_subcommands()) out << s->help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << version_stamp() << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    auto t0 = std::chrono::steady_clock::now();
    try {
        Context ctx{resolve(chosen, common[name]), Report{}, out};
        ctx.report.command = name;
        auto& cfg = ctx.cfg;
        if (name == "geom-check") {
            cmd_geom_check(ctx);
        } else if (name == "simulate") {
            if (given(sim, "--variant")) cfg.dynamics.variant = variant;
            if (given(sim, "--t")) cfg.dynamics.t_end = t_end;
            if (given(sim, "--dt")) cfg.dynamics.dt = dt;
            if (given(sim, "--modes")) cfg.dynamics.modes = modes;
            if (given(sim, "--save-every")) cfg.dynamics.save_every = save_every;
            if (stats != "covariance" && stats != "summary") throw ConfigError("--stats must be covariance or summary");
            validate(cfg);
            cmd_simulate(ctx, stats, chains);
        } else if (name == "sample-nu") {
            cmd_sample_nu(ctx, keep);
        } else if (name == "mass") {
            cmd_mass(ctx, parse_int_list(ns_text, "--ns"));
        } else if (name == "convergence") {
            cmd_convergence(ctx, parse_int_list(conv_ns, "--ns"), axis);
        } else if (name == "ibp") {
            if (!fs.empty()) cfg.functionals = fs;
            if (!hs.empty()) cfg.directions = hs;
            if (given(ibp, "--steps")) cfg.sampler.steps = steps;
            validate(cfg);
            cmd_ibp(ctx);
        } else if (name == "qv") {
            if (given(qv, "--t")) cfg.dynamics.t_end = qv_t;
            if (given(qv, "--dt")) cfg.dynamics.dt = qv_dt;
            validate(cfg);
            cmd_qv(ctx, qv_axis);
        } else if (name == "drift-limit") {
            cmd_drift_limit(ctx, curve, parse_int_list(dl_ns, "--ns"), theta);
        } else if (name == "constants") {
            cmd_constants(ctx, grid, cd, cT, cn, trunc);
        } else if (name == "lsi") {
            if (given(lsi, "--K")) cfg.K = lsi_K;
            if (given(lsi, "--steps")) cfg.sampler.steps = steps;
            validate(cfg);
            cmd_lsi(ctx, lsi_f, energy_mode);
        } else if (name == "grad-ineq") {
            if (given(gi, "--K")) cfg.K = gK;
            cmd_grad_ineq(ctx, gkind, ga, T1, T2, gy);
        } else if (name == "verify") {
            cmd_verify(ctx, profile, only);
        }
        return finish(ctx, t0);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedFeature& e) {
        err << "unsupported: " << e.what() << "\n";
        return 2;
    } catch (const AdmissibilityError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "failed: " << e.what() << "\n";
        return 1;
    }
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace pathheat
