#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pathheat/dynamics.hpp"
#include "pathheat/errors.hpp"
#include "pathheat/measures.hpp"
#include "pathheat/parallel.hpp"
#include "pathheat/quadrature.hpp"

using namespace pathheat;

namespace {

// E[g(r) 1{r < delta}] for r the length of a N(0, eps I_2) vector.
double rayleigh_mean(double eps, double delta, const std::function<double(double)>& g) {
    return integrate(gauss_legendre(200), 0, std::min(delta, 12 * std::sqrt(eps)),
                     [&](double r) { return g(r) * r / eps * std::exp(-r * r / (2 * eps)); });
}

std::vector<double> increments(const PathEnsemble& e, int axis) {
    std::vector<double> out;
    for (const auto& p : e.paths)
        for (int i = 1; i <= p.n(); ++i) out.push_back((p.nodes[i] - p.nodes[i - 1])[axis] / std::sqrt(p.partition.eps));
    return out;
}

}  // namespace

TEST_CASE("flat total mass is one") {
    auto r2 = Manifold::euclidean(2);
    auto part = Partition::uniform(5);
    auto est = nu_total_mass(r2, part, measure_delta(r2, part), 1000, 1);
    CHECK(est.value == 1.0);
    CHECK(est.stderr_ == 0.0);
    auto cut = nu_total_mass(r2, part, 8 * std::sqrt(part.eps), 1000, 1);
    CHECK(std::abs(cut.value - 1) < 1e-10);
}

TEST_CASE("importance sampling on the sphere against one-dimensional quadrature") {
    // Per step the weight sin(r)/r is independent of the direction, so the
    // mass is a product of n identical factors; so is E[w x^0(gamma_1)].
    auto s2 = Manifold::sphere(2);
    for (int n : {4, 8}) {
        auto part = Partition::uniform(n);
        double delta = measure_delta(s2, part);
        double factor = rayleigh_mean(part.eps, delta, [](double r) { return std::sin(r) / r; });
        auto est = nu_total_mass(s2, part, delta, 200000, 3);
        INFO("n = " << n);
        CHECK(std::abs(est.value - std::pow(factor, n)) < 3 * est.stderr_);
        CHECK(est.stderr_ < 2e-3);

        double f2 = rayleigh_mean(part.eps, delta, [](double r) { return std::sin(2 * r) / (2 * r); });
        auto fx = weighted_expectation(s2, part, delta, 200000, 4, [](const DiscretePath& p) { return p.nodes.back()[0]; });
        CHECK(std::abs(fx.value - std::pow(f2, n)) < 3 * fx.stderr_);
    }
}

TEST_CASE("mass converges to exp(-Scal/6)") {
    auto s2 = Manifold::sphere(2);
    std::vector<int> ns = {4, 8, 16};
    std::vector<double> vals;
    for (int n : ns) {
        auto part = Partition::uniform(n);
        vals.push_back(nu_total_mass(s2, part, measure_delta(s2, part), 100000, 10 + n).value);
    }
    CHECK(std::abs(richardson(ns, vals) / std::exp(-1.0 / 3) - 1) < 0.02);
    CHECK(richardson({2, 4}, {1.0, 0.5}) == doctest::Approx(0.0));
}

TEST_CASE("convergence study for the endpoint coordinate") {
    auto s2 = Manifold::sphere(2);
    auto g = [](const Point& x) { return x[0]; };
    double ref = weighted_wiener_reference(s2, g);
    CHECK(ref == doctest::Approx(std::exp(-4.0 / 3)).epsilon(1e-8));
    auto study = convergence_study(s2, [&](const DiscretePath& p) { return g(p.nodes.back()); }, {4, 8, 16}, 100000, 5,
                                   ref);
    for (std::size_t k = 1; k < study.rows.size(); ++k) CHECK(study.rows[k].gap < study.rows[k - 1].gap);
    CHECK(study.rows.back().gap < 0.02);

    auto r1 = Manifold::euclidean(1);
    auto flat = convergence_study(r1, [](const DiscretePath& p) {
        double s = 0;
        for (int i = 1; i <= p.n(); ++i) s += 0.5 * (p.nodes[i - 1][0] + p.nodes[i][0]) / p.n();
        return s;
    }, {4, 8}, 20000, 6, 0.0);
    for (const auto& row : flat.rows) CHECK(std::abs(row.estimate) < 3 * row.stderr_);
}

TEST_CASE("Wiener expectations") {
    auto r1 = Manifold::euclidean(1);
    auto part = Partition::uniform(4);
    auto c = wiener_expectation(r1, part, 100.0, [](const DiscretePath&) { return 2.5; }, 500, 1);
    CHECK(c.value.mean == 2.5);
    CHECK(c.value.stderr_ == 0);
    auto sq = wiener_expectation(r1, part, 100.0, [](const DiscretePath& p) { return p.nodes.back()[0] * p.nodes.back()[0]; },
                                 50000, 2, 1);
    CHECK(std::abs(sq.value.mean - 1) < 3 * sq.value.stderr_);
    auto circ = Manifold::circle(2 * std::numbers::pi);
    auto cs = wiener_expectation(circ, part, measure_delta(circ, part),
                                 [](const DiscretePath& p) { return std::cos(p.nodes.back()[0]); }, 50000, 3);
    CHECK(std::abs(cs.value.mean - std::exp(-0.5)) < 3 * cs.value.stderr_);
}

TEST_CASE("MALA on flat space samples Gaussian increments") {
    auto r2 = Manifold::euclidean(2);
    auto part = Partition::uniform(4);
    ChainConfig cfg;
    cfg.chains = 10;
    cfg.burn_in = 1000;
    cfg.samples = 2500;
    cfg.thin = 40;
    auto e = nu_sample(r2, part, measure_delta(r2, part), cfg, 12);
    CHECK(e.paths.size() == 25000);
    CHECK(e.acceptance > 0.4);
    CHECK(e.acceptance < 0.8);
    CHECK(e.rhat < 1.05);
    auto z = increments(e, 0);
    CHECK(z.size() == 100000);
    CHECK(ks_pvalue(ks_statistic(z, normal_cdf), z.size()) > 0.01);
    // Sum of squared increments over a path is chi-square with nd dof.
    RunningStats chi;
    for (const auto& p : e.paths) chi.add(energy(r2, p));
    CHECK(std::abs(chi.mean() - 8) < 4 * chi.stderr_mean());

    Rng rng(3);
    std::vector<double> bm;
    for (int k = 0; k < 25000; ++k) {
        auto b = brownian_path_sample(r2, part, 1e9, rng, 1);
        for (int i = 1; i <= 4; ++i) bm.push_back((b.path.nodes[i] - b.path.nodes[i - 1])[0] / std::sqrt(part.eps));
    }
    double p = 0;
    ks_two_sample(z, bm, &p);
    CHECK(p > 0.01);
}

TEST_CASE("MALA on S^2 with n = 2 matches the quadrature law") {
    auto s2 = Manifold::sphere(2);
    auto part = Partition::uniform(2);
    double delta = measure_delta(s2, part);
    ChainConfig cfg;
    cfg.chains = 8;
    cfg.burn_in = 2000;
    cfg.samples = 25000;
    cfg.thin = 3;
    // In polar coordinates about the previous point the density factorizes:
    // r_1 and r_2 are independent with density e^{-r^2/2 eps} sin r on [0, delta].
    const int bins = 20;
    double top = delta;
    auto dens = [&](double r) { return std::exp(-r * r / (2 * part.eps)) * std::sin(r); };
    const auto& rule = gauss_legendre(32);
    double z = integrate(rule, 0, top, dens);
    std::vector<double> p1(bins);
    for (int b = 0; b < bins; ++b) p1[b] = integrate(rule, top * b / bins, top * (b + 1) / bins, dens) / z;
    // Sampling noise of the binned TV distance is about 0.004 at 2e6 draws.
    std::vector<double> hist(bins * bins, 0);
    double total = 0;
    PathEnsemble e;
    for (std::uint64_t batch = 0; batch < 10; ++batch) {
        e = nu_sample(s2, part, delta, cfg, 21 + batch);
        CHECK(e.rhat < 1.05);
        for (const auto& p : e.paths) {
            int b1 = std::min(bins - 1, static_cast<int>(s2.distance(p.nodes[0], p.nodes[1]) / top * bins));
            int b2 = std::min(bins - 1, static_cast<int>(s2.distance(p.nodes[1], p.nodes[2]) / top * bins));
            hist[b1 * bins + b2] += 1;
            total += 1;
        }
    }
    double tv = 0;
    for (int a = 0; a < bins; ++a)
        for (int b = 0; b < bins; ++b) tv += 0.5 * std::abs(hist[a * bins + b] / total - p1[a] * p1[b]);
    CHECK(tv < 1e-2);

    // Importance-weighted and MCMC normalized expectations agree.
    auto r1 = [&](const DiscretePath& p) { return s2.distance(p.nodes[0], p.nodes[1]); };
    auto mc = ensemble_mean(e, r1);
    auto num = weighted_expectation(s2, part, delta, 200000, 22, r1);
    auto den = nu_total_mass(s2, part, delta, 200000, 22);
    double ratio = num.value / den.value;
    double ratio_err = std::abs(ratio) * std::hypot(num.stderr_ / num.value, den.stderr_ / den.value);
    CHECK(std::abs(mc.mean - ratio) < 3 * std::hypot(mc.stderr_, ratio_err));

    // Doubling the chain length moves the estimate by less than 2 stderr.
    ChainConfig longer = cfg;
    longer.samples *= 2;
    auto e2 = nu_sample(s2, part, delta, longer, 30);
    auto mc2 = ensemble_mean(e2, r1);
    CHECK(std::abs(mc2.mean - mc.mean) < 2 * std::hypot(mc.stderr_, mc2.stderr_));
}

TEST_CASE("sampler diagnostics out of range raise") {
    auto s2 = Manifold::sphere(2);
    auto part = Partition::uniform(2);
    ChainConfig cfg;
    cfg.chains = 1;
    cfg.burn_in = 0;
    cfg.samples = 200;
    cfg.step = 50;
    CHECK_THROWS_AS(nu_sample(s2, part, measure_delta(s2, part), cfg, 1), SamplerError);
    cfg.chains = 0;
    CHECK_THROWS_AS(nu_sample(s2, part, measure_delta(s2, part), cfg, 1), ConfigError);
}

TEST_CASE("heat flow on path space is reversible for nu") {
    double radius = 5;
    auto sph = Manifold::sphere(2, radius);
    auto part = Partition::uniform(2);
    double delta = default_delta(sph);
    auto r1 = [&](const DiscretePath& p) { return sph.distance(p.nodes[0], p.nodes[1]); };
    auto r2 = [&](const DiscretePath& p) { return sph.distance(p.nodes[1], p.nodes[2]); };
    auto turn = [&](const DiscretePath& p) {
        Tangent a = -sph.log(p.nodes[1], p.nodes[0]), b = sph.log(p.nodes[1], p.nodes[2]);
        return a.dot(b);
    };

    ChainConfig cfg;
    cfg.chains = 4;
    cfg.burn_in = 2000;
    cfg.samples = 20000;
    cfg.thin = 2;
    auto mcmc = nu_sample(sph, part, delta, cfg, 31);

    const int chains = 1500;
    SheSettings s;
    s.dt = 0.1 * part.eps * part.eps;
    auto start = make_path(sph, sph.origin(), {sph.origin(), sph.origin()}, part, delta);
    Frame u0 = sph.tangent_frame(sph.origin());
    PathEnsemble she;
    she.paths.resize(chains);
    she.chains = 0;
    parallel_for(chains, [&](std::size_t c) {
        Rng rng = make_stream(32, c);
        auto state = she_init(sph, start, u0, s);
        for (int k = 0; k < 100; ++k) she_step(sph, state, s.dt, rng, s);
        she.paths[c] = state.st.path;
    });
    for (const PathFunctional& f : {PathFunctional(r1), PathFunctional(r2), PathFunctional(turn)}) {
        auto a = ensemble_mean(mcmc, f), b = ensemble_mean(she, f);
        CHECK(std::abs(a.mean - b.mean) < 3 * std::hypot(a.stderr_, b.stderr_));
    }
}
