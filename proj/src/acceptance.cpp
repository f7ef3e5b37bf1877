#include "pathheat/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pathheat/drift.hpp"
#include "pathheat/dynamics.hpp"
#include "pathheat/errors.hpp"
#include "pathheat/functionals.hpp"
#include "pathheat/inequalities.hpp"
#include "pathheat/jacobi.hpp"
#include "pathheat/measures.hpp"
#include "pathheat/parallel.hpp"
#include "pathheat/stats.hpp"

namespace pathheat {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct Sizes {
    std::size_t cov_chains;
    std::size_t ibp_draws;
    int ibp_steps;
    std::size_t mass_draws;
    int random_paths;
    double qv_t_end;
    int gauge_paths;
};

Sizes sizes_for(const std::string& profile) {
    if (profile == "desk") return {20000, 100000, 64, 100000, 1000, 1.0, 20};
    if (profile == "quick") return {2000, 4000, 32, 10000, 100, 0.05, 5};
    throw ConfigError("unknown profile '" + profile + "' (expected desk or quick)");
}

std::uint64_t seed_for(const AcceptanceOptions& opt, int id) { return opt.seed * 1000003ULL + 1000ULL * id; }

// Stationary covariance of the flat spectral solver on the grid i/32 against `target`.
CriterionResult flat_covariance_check(int id, FlatBasis basis, const std::function<double(double, double)>& target,
                                      const Sizes& z, std::uint64_t seed) {
    CriterionResult r;
    r.id = id;
    const int grid = 32, modes = 256;
    const std::size_t block = 500;
    const std::size_t chains = z.cov_chains;
    const std::size_t blocks = (chains + block - 1) / block;
    std::vector<Eigen::VectorXd> samples(chains);
    parallel_for(blocks, [&](std::size_t b) {
        Rng rng = make_stream(seed, b);
        for (std::size_t c = b * block; c < std::min(chains, (b + 1) * block); ++c) {
            auto st = flat_init(basis, modes, 1);
            // Ten exact OU steps from zero; the slowest mode forgets its start by e^{-12}.
            for (int k = 0; k < 10; ++k) flat_she_exact(st, 1.0, rng);
            Eigen::VectorXd x(grid + 1);
            for (int i = 0; i <= grid; ++i) x[i] = st.field(static_cast<double>(i) / grid)[0];
            samples[c] = x;
        }
    });
    double worst = 0, worst_se = 0, worst_s = 0, worst_t = 0;
    int failures = 0;
    for (int i = 0; i <= grid; ++i) {
        for (int j = i; j <= grid; ++j) {
            RunningStats prod;
            for (const auto& x : samples) prod.add(x[i] * x[j]);
            double s = static_cast<double>(i) / grid, t = static_cast<double>(j) / grid;
            double dev = std::abs(prod.mean() - target(s, t));
            double tol = std::max(3 * prod.stderr_mean(), 0.02);
            if (dev > tol) ++failures;
            if (dev > worst) {
                worst = dev;
                worst_se = prod.stderr_mean();
                worst_s = s;
                worst_t = t;
            }
        }
    }
    auto probe = flat_init(basis, modes, 1);
    r.pass = failures == 0;
    r.payload = {{"modes", modes},          {"grid", grid},       {"chains", chains},
                 {"max_abs_dev", worst},    {"stderr_at_max", worst_se}, {"s", worst_s},
                 {"s2", worst_t},           {"pairs_out_of_tolerance", failures},
                 {"truncation_bound", probe.tail_bound()}};
    std::ostringstream os;
    os << "max |cov - target| = " << worst << " at (" << worst_s << ", " << worst_t << "), stderr " << worst_se;
    r.summary = os.str();
    return r;
}

CriterionResult c1(const Sizes& z, std::uint64_t seed) {
    auto r = flat_covariance_check(1, FlatBasis::DirichletNeumann, [](double s, double t) { return std::min(s, t); },
                                   z, seed);
    r.title = "flat path-space invariant covariance min(s, s')";
    return r;
}

CriterionResult c2(const Sizes& z, std::uint64_t seed) {
    auto r = flat_covariance_check(
        2, FlatBasis::DirichletDirichlet,
        [](double s, double t) { return std::min(s, t) * (1 - std::max(s, t)); }, z, seed);
    r.title = "flat loop-space invariant covariance s(1 - s')";
    return r;
}

json ibp_json(const IbpReport& rep) {
    return {{"lhs", rep.lhs.mean}, {"lhs_stderr", rep.lhs.stderr_}, {"rhs", rep.rhs.mean},
            {"rhs_stderr", rep.rhs.stderr_}, {"stderr", rep.stderr_}, {"z", rep.z}};
}

CriterionResult c3(const Sizes& z, std::uint64_t seed) {
    CriterionResult r;
    r.id = 3;
    r.title = "integration by parts on S^2";
    const int steps = z.ibp_steps;
    auto part = Partition::uniform(steps);
    auto s2 = Manifold::sphere(2);
    const std::vector<std::pair<std::string, std::string>> pairs = {
        {"time_integral(1)", "linear(1)"}, {"sin(time_integral(2))", "sine(0)"}, {"squared_integral(1)", "bump(1)"}};
    std::vector<CylinderFunction> Fs;
    std::vector<DirectionField> hs;
    for (const auto& [f, h] : pairs) {
        Fs.push_back(builtin_functional(f, part));
        hs.push_back(builtin_direction(h, 2));
    }
    auto reps = ibp_check(s2, Fs, hs, z.ibp_draws, steps, seed);
    bool ok = true;
    double worst_z = 0;
    json rows = json::array();
    for (std::size_t k = 0; k < reps.size(); ++k) {
        ok = ok && std::abs(reps[k].z) <= 3;
        worst_z = std::max(worst_z, std::abs(reps[k].z));
        json row = ibp_json(reps[k]);
        row["functional"] = pairs[k].first;
        row["direction"] = pairs[k].second;
        rows.push_back(row);
    }
    // Flat: E[cos(I) I] with I ~ N(0, 1/3) is 1/2 e^{-1/6} for h(s) = s.
    auto r1 = Manifold::euclidean(1);
    auto flat = ibp_check(r1, builtin_functional("sin(time_integral(0))", part), builtin_direction("linear(0)", 1),
                          z.ibp_draws, steps, seed + 1);
    double exact = 0.5 * std::exp(-1.0 / 6);
    bool flat_ok = std::abs(flat.z) <= 3 && std::abs(flat.lhs.mean - exact) <= 3 * flat.lhs.stderr_ &&
                   std::abs(flat.rhs.mean - exact) <= 3 * flat.rhs.stderr_;
    json fj = ibp_json(flat);
    fj["exact"] = exact;
    r.pass = ok && flat_ok;
    r.payload = {{"draws", z.ibp_draws}, {"steps", steps}, {"sphere", rows}, {"flat", fj}};
    std::ostringstream os;
    os << "max |z| on S^2 = " << worst_z << "; flat z = " << flat.z << ", lhs " << flat.lhs.mean << " vs " << exact;
    r.summary = os.str();
    return r;
}

CriterionResult c4(const Sizes& z, std::uint64_t seed) {
    CriterionResult r;
    r.id = 4;
    r.title = "mass and cylinder functional convergence on S^2";
    auto s2 = Manifold::sphere(2);
    std::vector<int> ns = {4, 8, 16};
    std::vector<double> vals;
    json rows = json::array();
    for (int n : ns) {
        auto part = Partition::uniform(n);
        auto est = nu_total_mass(s2, part, measure_delta(s2, part), z.mass_draws, seed + n);
        vals.push_back(est.value);
        rows.push_back({{"n", n}, {"mass", est.value}, {"stderr", est.stderr_}, {"ess", est.ess}});
    }
    double target = std::exp(-1.0 / 3);
    double extrap = richardson(ns, vals);
    double mass_gap = std::abs(extrap / target - 1);

    auto g = [](const Point& x) { return x[0]; };
    double ref = weighted_wiener_reference(s2, g);
    auto study = convergence_study(s2, [&](const DiscretePath& p) { return g(p.nodes.back()); }, ns, z.mass_draws,
                                   seed + 100, ref);
    bool monotone = true;
    json srows = json::array();
    for (std::size_t k = 0; k < study.rows.size(); ++k) {
        const auto& row = study.rows[k];
        if (k > 0 && !(row.gap < study.rows[k - 1].gap)) monotone = false;
        srows.push_back({{"n", row.n}, {"estimate", row.estimate}, {"stderr", row.stderr_},
                         {"reference", row.reference}, {"gap", row.gap}});
    }
    double last_gap = study.rows.back().gap;
    r.pass = mass_gap < 0.02 && monotone && last_gap < 0.02;
    r.payload = {{"draws", z.mass_draws},     {"mass", rows},          {"richardson", extrap},
                 {"target", target},          {"mass_rel_gap", mass_gap}, {"functional", "x0(gamma_1)"},
                 {"convergence", srows},      {"monotone", monotone}};
    std::ostringstream os;
    os << "Richardson mass " << extrap << " (gap " << 100 * mass_gap << "%); functional gaps";
    for (const auto& row : study.rows) os << " " << 100 * row.gap << "%";
    r.summary = os.str();
    return r;
}

CriterionResult c5(const Sizes& z, std::uint64_t seed) {
    CriterionResult r;
    r.id = 5;
    r.title = "Jacobi expansion remainder order and sup bound";
    auto s2 = Manifold::sphere(2);
    const double eps = 0.1;
    auto fit = expansion_remainder_fit(s2, eps, 0.02, 0.3, 12);
    bool exponent_ok = fit.exponent >= 2.7 && fit.exponent <= 3.3;

    Rng rng = make_stream(seed, 0);
    int violations = 0;
    double worst_ratio = 0;
    double delta = default_delta(s2);
    for (int t = 0; t < z.random_paths; ++t) {
        int n = 2 + static_cast<int>(uniform01(rng) * 14);
        std::vector<Vec> inc;
        for (int i = 0; i < n; ++i) {
            Vec dir = gaussian_vec(rng, 2).normalized();
            inc.push_back(dir * (0.999 * delta * std::sqrt(uniform01(rng))));
        }
        auto dev = develop(s2, s2.tangent_frame(s2.origin()), inc, delta);
        double bound = jacobi_sup_bound(s2.kappa0(), delta, dev.path.partition.eps);
        int i = 1 + static_cast<int>(uniform01(rng) * n);
        for (int a = 0; a < 2; ++a) {
            double sup = jacobi_basis(s2, dev.path, dev.frames, a, i, 17).sup_norm();
            worst_ratio = std::max(worst_ratio, sup / bound);
            if (sup > bound) ++violations;
        }
    }
    r.pass = exponent_ok && violations == 0;
    r.payload = {{"eps", eps},
                 {"db_norms", fit.db_norms},
                 {"remainders", fit.remainders},
                 {"exponent", fit.exponent},
                 {"exponent_window", {2.7, 3.3}},
                 {"paths", z.random_paths},
                 {"delta", delta},
                 {"sup_bound_violations", violations},
                 {"max_sup_over_bound", worst_ratio}};
    std::ostringstream os;
    os << "remainder exponent " << fit.exponent << " (window [2.7, 3.3]); sup-bound violations " << violations
       << ", max sup/bound " << worst_ratio;
    r.summary = os.str();
    return r;
}

CriterionResult c6(const Sizes&, std::uint64_t) {
    CriterionResult r;
    r.id = 6;
    r.title = "continuum drift limit";
    std::vector<int> ns = {8, 16, 32, 64, 128};
    auto s2 = Manifold::sphere(2);
    auto gc = drift_limit_study(s2, great_circle(s2), ns);
    auto r1 = Manifold::euclidean(1);
    auto sine = drift_limit_study(r1, flat_sine(r1), ns);
    bool decreasing = true;
    json grows = json::array(), srows = json::array();
    for (std::size_t k = 0; k < gc.rows.size(); ++k) {
        if (k > 0 && !(gc.rows[k].error < gc.rows[k - 1].error)) decreasing = false;
        grows.push_back({{"n", gc.rows[k].n}, {"error", gc.rows[k].error}});
        srows.push_back({{"n", sine.rows[k].n}, {"error", sine.rows[k].error}});
    }
    r.pass = decreasing && gc.slope >= 0.8 && std::abs(sine.slope - 2.0) <= 0.2;
    r.payload = {{"great_circle", grows}, {"great_circle_slope", gc.slope}, {"sine", srows},
                 {"sine_slope", sine.slope}, {"decreasing", decreasing}};
    std::ostringstream os;
    os << "great circle slope " << gc.slope << ", flat sine order " << sine.slope;
    r.summary = os.str();
    return r;
}

CriterionResult c7(const Sizes& z, std::uint64_t seed) {
    CriterionResult r;
    r.id = 7;
    r.title = "constants";
    auto ein = einstein_lsi_constant(1e-3, 2, 10000);
    double ein_gap = std::abs(ein.value - 4 / (kPi * kPi));
    bool ein_ok = ein_gap < 1e-4;

    double cont = 0;
    for (double K : {1e-9, -1e-9, 1e-12, -1e-12}) cont = std::max(cont, std::abs(lsi_constant(K) - 0.5));
    bool cont_ok = cont < 1e-8 && lsi_constant(0.0) == 0.5;

    bool order_ok = true;
    json cmp = json::array();
    for (double K : {-2.0, -1.0, -0.5, 0.5, 1.0}) {
        double c = lsi_constant(K), ct = gourcy_wu_constant(K);
        order_ok = order_ok && c <= ct;
        cmp.push_back({{"K", K}, {"C", c}, {"Ctilde", ct}});
    }

    double worst = -1;
    for (const Manifold& m : {Manifold::sphere(2), Manifold::hyperbolic(2)}) {
        double K = ricci_lower_k(m);
        Frame u0 = m.tangent_frame(m.origin());
        for (int p = 0; p < z.random_paths; ++p) {
            Rng rng = make_stream(seed, p);
            auto hb = horizontal_brownian(m, u0, 32, 0.9 * m.inj_radius(), rng);
            std::vector<Mat> ric;
            for (const Frame& u : hb.dev.frames.frames) ric.push_back(m.ricci_matrix(u));
            auto M = ricci_flow_matrix(ric, 1.0 / 32);
            worst = std::max(worst, ricci_flow_bound_excess(M, 1.0 / 32, K));
        }
    }
    bool bound_ok = worst <= 1e-8;
    r.pass = ein_ok && cont_ok && order_ok && bound_ok;
    r.payload = {{"einstein_K", 1e-3},     {"einstein_value", ein.value},  {"einstein_gap", ein_gap},
                 {"einstein_truncation_error", ein.value_error},          {"continuity_dev", cont},
                 {"C_vs_Ctilde", cmp},     {"damping_paths", 2 * z.random_paths},
                 {"damping_max_excess", worst},
                 {"parts", {{"einstein", ein_ok}, {"continuity", cont_ok}, {"ordering", order_ok}, {"damping", bound_ok}}}};
    std::ostringstream os;
    os << "|C_E(1e-3) - 4/pi^2| = " << ein_gap << " (need < 1e-4); continuity " << cont << "; C <= Ctilde "
       << (order_ok ? "yes" : "no") << "; damping excess " << worst;
    r.summary = os.str();
    return r;
}

QvReport qv_run(const Manifold& m, double t_end, std::uint64_t seed) {
    const int n = 16;
    auto part = Partition::uniform(n);
    Rng rng = make_stream(seed, 0);
    auto start = brownian_path_sample(m, part, default_delta(m), rng).path;
    SheSettings s;
    s.dt = 0.01 * part.eps * part.eps;
    auto state = she_init(m, start, m.tangent_frame(m.origin()), s);
    // u = x^1 of the endpoint.
    std::vector<Vec> c(n + 1, Vec::Zero(m.ambient_dim()));
    c[n][1] = 1;
    return qv_check(m, state, s, t_end, c, rng);
}

CriterionResult c8(const Sizes& z, std::uint64_t seed) {
    CriterionResult r;
    r.id = 8;
    r.title = "quadratic variation on S^2";
    // Radius 3: on the unit sphere at n = 16 the delta wall is reached and the
    // step-halving rule gives up (see the unit_sphere entry).
    auto s2 = Manifold::sphere(2, 3.0);
    auto rep = qv_run(s2, z.qv_t_end, seed);
    json unit;
    try {
        auto u = qv_run(Manifold::sphere(2), z.qv_t_end, seed);
        unit = {{"completed", true}, {"ratio", u.ratio}};
    } catch (const DeltaViolation& e) {
        unit = {{"completed", false}, {"error", e.what()}};
    }
    r.pass = rep.ratio >= 0.95 && rep.ratio <= 1.05;
    r.payload = {{"radius", 3.0},
                 {"n", 16},
                 {"dt_over_eps2", 0.01},
                 {"t_end", z.qv_t_end},
                 {"steps", rep.steps},
                 {"realized", rep.realized},
                 {"predicted", rep.predicted},
                 {"ratio", rep.ratio},
                 {"functional", "x^1(gamma_1)"},
                 {"unit_sphere", unit}};
    std::ostringstream os;
    os << "realized/predicted = " << rep.ratio << " over " << rep.steps << " steps (radius 3)";
    r.summary = os.str();
    return r;
}

CriterionResult c9(const Sizes&, std::uint64_t) {
    CriterionResult r;
    r.id = 9;
    r.title = "gradient inequality on S^2";
    auto s2 = Manifold::sphere(2);
    double K = ricci_lower_k(s2);
    Vec e1 = Vec::Zero(3), mix(3);
    e1[1] = 1;
    mix << 0.2, 0.5, -0.3;
    Point y = s2.origin();
    Point y2 = s2.exp(y, Vec((Vec(3) << 0, 0.4, 0.7).finished()));
    struct Case {
        std::string kind;
        Vec a;
        double T1, T2;
        Point y;
    };
    std::vector<Case> cases = {{"linear", e1, 1.0, 0.0, y},
                               {"linear", mix, 0.5, 0.1, y2},
                               {"square", mix, 0.8, 0.0, y2},
                               {"exp", mix, 1.2, 0.3, y},
                               {"square", e1, 0.3, 0.05, y2}};
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    json rows = json::array();
    for (const auto& cs : cases) {
        auto rep = gradient_ineq_check(s2, test_function(cs.kind, cs.a), cs.T1, cs.T2, cs.y, K);
        ok = ok && rep.margin >= -3 * rep.quad_error;
        worst = std::min(worst, rep.margin);
        rows.push_back({{"f", cs.kind}, {"T1", cs.T1}, {"T2", cs.T2}, {"lhs", rep.lhs}, {"rhs", rep.rhs},
                        {"margin", rep.margin}, {"quad_error", rep.quad_error}});
    }
    auto r1 = Manifold::euclidean(1);
    auto flat = gradient_ineq_check(r1, test_function("linear", Vec::Constant(1, 1.7)), 0.8, 0.2,
                                    Vec::Constant(1, 0.3), 0.0);
    bool flat_ok = std::abs(flat.margin) <= 1e-8;
    r.pass = ok && flat_ok;
    r.payload = {{"K", K}, {"cases", rows}, {"flat_lhs", flat.lhs}, {"flat_rhs", flat.rhs}, {"flat_margin", flat.margin}};
    std::ostringstream os;
    os << "min margin on S^2 " << worst << "; flat equality error " << std::abs(flat.margin);
    r.summary = os.str();
    return r;
}

CriterionResult c10(const Sizes& z, std::uint64_t seed) {
    CriterionResult r;
    r.id = 10;
    r.title = "gauge invariance";
    auto s2 = Manifold::sphere(2);
    const int n = 16;
    auto part = Partition::uniform(n);
    double delta = default_delta(s2);
    std::vector<CylinderFunction> Fs = {builtin_functional("sin(time_integral(1))", part),
                                        builtin_functional("squared_integral(2)", part),
                                        builtin_functional("ambient_coord(16, 0)", part)};
    double grad_dev = 0, energy_dev = 0, drift_dev = 0;
    for (int p = 0; p < z.gauge_paths; ++p) {
        Rng rng = make_stream(seed, p);
        auto path = brownian_path_sample(s2, part, delta, rng).path;
        Frame ua = s2.tangent_frame(s2.origin());
        Frame ub = s2.random_frame(s2.origin(), rng);
        auto fa = horizontal_lift(s2, path, ua);
        auto fb = horizontal_lift(s2, path, ub);
        for (const auto& F : Fs) {
            auto ga = l2_gradient(s2, F, path, fa), gb = l2_gradient(s2, F, path, fb);
            for (int i = 0; i <= n; ++i)
                grad_dev = std::max(grad_dev, std::abs(ga[i].squaredNorm() - gb[i].squaredNorm()));
            energy_dev = std::max(energy_dev,
                                  std::abs(energy_density(s2, F, path, fa) - energy_density(s2, F, path, fb)));
        }
        auto da = drift_field_full(s2, path, fa), db = drift_field_full(s2, path, fb);
        for (int i = 0; i <= n; ++i) drift_dev = std::max(drift_dev, (da.vectors[i] - db.vectors[i]).norm());
    }
    r.pass = grad_dev <= 1e-10 && energy_dev <= 1e-10 && drift_dev <= 1e-10;
    r.payload = {{"paths", z.gauge_paths}, {"grad_sq_dev", grad_dev}, {"energy_dev", energy_dev},
                 {"drift_dev", drift_dev}};
    std::ostringstream os;
    os << "max deviations: |DF|^2 " << grad_dev << ", energy " << energy_dev << ", drift " << drift_dev;
    r.summary = os.str();
    return r;
}

CriterionResult dispatch(int id, const Sizes& z, std::uint64_t seed) {
    switch (id) {
        case 1: return c1(z, seed);
        case 2: return c2(z, seed);
        case 3: return c3(z, seed);
        case 4: return c4(z, seed);
        case 5: return c5(z, seed);
        case 6: return c6(z, seed);
        case 7: return c7(z, seed);
        case 8: return c8(z, seed);
        case 9: return c9(z, seed);
        case 10: return c10(z, seed);
        default: throw ConfigError("no criterion " + std::to_string(id));
    }
}

CriterionResult timed(int id, const AcceptanceOptions& opt) {
    Sizes z = sizes_for(opt.profile);
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = dispatch(id, z, seed_for(opt, id));
    } catch (const Error& e) {
        r.id = id;
        r.pass = false;
        r.summary = std::string("error: ") + e.what();
        r.payload = {{"error", e.what()}};
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

CriterionResult determinism(const std::vector<CriterionResult>& first, int first_threads,
                            const AcceptanceOptions& opt) {
    CriterionResult r;
    r.id = 11;
    r.title = "determinism across thread counts";
    int other = first_threads == 3 ? 1 : 3;
    int saved = thread_count();
    set_threads(other);
    std::vector<CriterionResult> second;
    for (const auto& c : first) {
        second.push_back(timed(c.id, opt));
        if (opt.log) *opt.log << "  rerun " << c.id << " at " << other << " threads: " << second.back().seconds << " s\n";
    }
    set_threads(saved);
    json differs = json::array();
    for (std::size_t k = 0; k < first.size(); ++k) {
        json a = {{"pass", first[k].pass}, {"payload", first[k].payload}};
        json b = {{"pass", second[k].pass}, {"payload", second[k].payload}};
        if (a.dump() != b.dump()) differs.push_back(first[k].id);
    }
    std::vector<int> ids;
    for (const auto& c : first) ids.push_back(c.id);
    r.pass = differs.empty() && !first.empty();
    r.payload = {{"threads", {first_threads, other}}, {"criteria", ids}, {"differing", differs}};
    std::ostringstream os;
    os << "payloads of " << first.size() << " criteria at " << first_threads << " and " << other << " threads: "
       << (differs.empty() ? "identical" : "differ in " + differs.dump());
    r.summary = os.str();
    return r;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
    if (id != 11) return timed(id, opt);
    auto t0 = std::chrono::steady_clock::now();
    std::vector<CriterionResult> first;
    for (int k = 1; k <= 10; ++k) first.push_back(timed(k, opt));
    auto r = determinism(first, thread_count(), opt);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
    sizes_for(opt.profile);
    std::vector<int> ids = opt.only;
    if (ids.empty())
        for (int k = 1; k <= 11; ++k) ids.push_back(k);
    for (int id : ids)
        if (id < 1 || id > 11) throw ConfigError("no criterion " + std::to_string(id));
    int saved = thread_count();
    if (opt.threads > 0) set_threads(opt.threads);
    std::vector<CriterionResult> out;
    bool want_determinism = false;
    for (int id : ids) {
        if (id == 11) {
            want_determinism = true;
            continue;
        }
        out.push_back(timed(id, opt));
        if (opt.log) *opt.log << format_result_line(out.back()) << std::flush;
    }
    if (want_determinism) {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<CriterionResult> base = out;
        if (base.empty())
            for (int k = 1; k <= 10; ++k) base.push_back(timed(k, opt));
        auto r = determinism(base, thread_count(), opt);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(r);
        if (opt.log) *opt.log << format_result_line(out.back()) << std::flush;
    }
    set_threads(saved);
    return out;
}

json acceptance_payload(const std::vector<CriterionResult>& results) {
    json j = json::array();
    for (const auto& r : results)
        j.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"summary", r.summary}, {"payload", r.payload}});
    return j;
}

std::string format_result_line(const CriterionResult& r) {
    std::ostringstream os;
    os << (r.pass ? "PASS" : "FAIL") << "  criterion " << r.id << "  " << r.title << "  " << r.summary << "  ["
       << std::fixed;
    os.precision(1);
    os << r.seconds << " s]\n";
    return os.str();
}

}  // namespace pathheat
