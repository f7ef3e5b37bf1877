#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pathheat/dynamics.hpp"
#include "pathheat/errors.hpp"
#include "pathheat/heat_kernel.hpp"
#include "pathheat/parallel.hpp"
#include "pathheat/quadrature.hpp"
#include "pathheat/stats.hpp"

using namespace pathheat;

namespace {

DiscretePath constant_path(const Manifold& m, int n, double delta) {
    return make_path(m, m.origin(), std::vector<Point>(n, m.origin()), Partition::uniform(n), delta);
}

Vec flat_laplacian(const DiscretePath& p, int i) {
    int n = p.n();
    Vec next = i < n ? Vec(p.nodes[i + 1]) : Vec(p.nodes[i]);
    return p.nodes[i - 1] + next - 2 * p.nodes[i];
}

}  // namespace

TEST_CASE("flat step is the discretized heat equation") {
    auto r2 = Manifold::euclidean(2);
    int n = 5;
    double eps = 1.0 / n;
    Rng rng(3);
    std::vector<Vec> inc;
    for (int i = 0; i < n; ++i) inc.push_back(gaussian_vec(rng, 2) * 0.3);
    auto dev = develop(r2, r2.tangent_frame(r2.origin()), inc, 10.0);
    SheSettings s;
    s.dt = 0.05 * eps * eps;
    auto state = she_init(r2, dev.path, dev.frames[0], s);
    for (int i = 1; i <= n; ++i)
        CHECK((ito_drift(r2, state, i) - flat_laplacian(dev.path, i) / (2 * eps * eps)).norm() < 1e-10);

    // Heun on a linear SDE with additive noise, written out by hand.
    Rng a(11), b(11);
    she_step(r2, state, s.dt, a, s);
    std::vector<Vec> dw(n + 1);
    for (int i = 1; i <= n; ++i) dw[i] = gaussian_vec(b, 2) * std::sqrt(s.dt);
    const auto& x = dev.path;
    DiscretePath y = x;
    for (int i = 1; i <= n; ++i)
        y.nodes[i] = x.nodes[i] + flat_laplacian(x, i) / (2 * eps * eps) * s.dt + dw[i] / std::sqrt(eps);
    for (int i = 1; i <= n; ++i) {
        Vec z = x.nodes[i] + 0.5 * (flat_laplacian(x, i) + flat_laplacian(y, i)) / (2 * eps * eps) * s.dt +
                dw[i] / std::sqrt(eps);
        CHECK((state.st.path.nodes[i] - z).norm() < 1e-12);
    }
    CHECK(state.t == doctest::Approx(s.dt));

    SheSettings big = s;
    CHECK_THROWS_AS(she_step(r2, state, 0.2 * eps * eps, a, big), ConfigError);
}

TEST_CASE("deterministic flow on the sphere matches an RK4 oracle") {
    auto s2 = Manifold::sphere(2);
    int n = 4;
    double eps = 1.0 / n;
    auto path = sample_curve(s2, great_circle(s2, 1.2), n, default_delta(s2));
    Frame u0 = s2.tangent_frame(path.origin());
    SheSettings s;
    s.noise = false;
    s.dt = 0.01 * eps * eps;
    auto state = she_init(s2, path, u0, s);
    Rng rng(0);
    int steps = static_cast<int>(std::lround(0.1 / s.dt));
    for (int k = 0; k < steps; ++k) she_step(s2, state, s.dt, rng, s);

    auto rhs = [&](const std::vector<Point>& x) {
        DiscretePath p = path;
        p.nodes = x;
        auto f = drift_field_full(s2, path_state(s2, p, u0));
        std::vector<Vec> out(n + 1, Vec::Zero(3));
        for (int i = 1; i <= n; ++i) out[i] = -f.vectors[i];
        return out;
    };
    auto axpy = [&](const std::vector<Point>& x, const std::vector<Vec>& k, double h) {
        auto y = x;
        for (int i = 1; i <= n; ++i) y[i] = s2.retract(x[i] + h * k[i]);
        return y;
    };
    std::vector<Point> x = path.nodes;
    double h = 0.1 / (4 * steps);
    for (int k = 0; k < 4 * steps; ++k) {
        auto k1 = rhs(x);
        auto k2 = rhs(axpy(x, k1, h / 2));
        auto k3 = rhs(axpy(x, k2, h / 2));
        auto k4 = rhs(axpy(x, k3, h));
        std::vector<Vec> mix(n + 1, Vec::Zero(3));
        for (int i = 1; i <= n; ++i) mix[i] = (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) / 6;
        x = axpy(x, mix, h);
    }
    double moved = 0;
    for (int i = 1; i <= n; ++i) {
        CHECK((state.st.path.nodes[i] - x[i]).norm() < 1e-6);
        moved = std::max(moved, (x[i] - path.nodes[i]).norm());
    }
    CHECK(moved > 1e-2);
}

TEST_CASE("one step from a constant path has Gaussian increments") {
    auto s2 = Manifold::sphere(2);
    int n = 3;
    double eps = 1.0 / n;
    SheSettings s;
    s.dt = 1e-4 * eps * eps;
    auto start = constant_path(s2, n, default_delta(s2));
    Frame u0 = s2.tangent_frame(s2.origin());
    std::vector<double> z;
    Rng rng(21);
    for (int k = 0; k < 4000; ++k) {
        auto state = she_init(s2, start, u0, s);
        she_step(s2, state, s.dt, rng, s);
        for (int i = 1; i <= n; ++i) {
            Vec c = s2.frame_coords(u0, s2.log(s2.origin(), state.st.path.nodes[i])) / std::sqrt(s.dt / eps);
            z.push_back(c[0]);
            z.push_back(c[1]);
        }
    }
    double d = ks_statistic(z, normal_cdf);
    CHECK(ks_pvalue(d, z.size()) > 0.01);
    RunningStats var;
    for (double v : z) var.add(v * v);
    CHECK(std::abs(var.mean() - 1) < 4 * var.stderr_mean());
}

TEST_CASE("projection noise has the mean curvature Ito drift") {
    auto s2 = Manifold::sphere(2);
    auto start = constant_path(s2, 1, default_delta(s2));
    Frame u0 = s2.tangent_frame(s2.origin());
    SheSettings s;
    s.variant = SheVariant::Sigma;
    s.drift = false;
    s.cap_factor = 1;
    s.dt = 0.02;
    auto state0 = she_init(s2, start, u0, s);
    Vec expect = ito_drift(s2, state0, 1) * s.dt;
    CHECK((expect + 1.0 * s.dt * s2.origin()).norm() < 1e-14);
    std::vector<RunningStats> comp(3);
    Rng rng(5);
    for (int k = 0; k < 40000; ++k) {
        auto state = state0;
        she_step_sigma(s2, state, s.dt, rng, s);
        Vec dx = state.st.path.nodes[1] - s2.origin();
        for (int c = 0; c < 3; ++c) comp[c].add(dx[c]);
    }
    for (int c = 0; c < 3; ++c) {
        INFO("component " << c);
        // One Heun step has weak error O(dt^2).
        CHECK(std::abs(comp[c].mean() - expect[c]) < 4 * comp[c].stderr_mean() + 3 * s.dt * s.dt);
    }
}

TEST_CASE("projection dynamics with n = 1 equilibrates to the nu marginal") {
    double radius = 8;
    auto sph = Manifold::sphere(2, radius);
    auto start = constant_path(sph, 1, default_delta(sph));
    Frame u0 = sph.tangent_frame(sph.origin());
    SheSettings s;
    s.variant = SheVariant::Sigma;
    s.dt = 0.05;
    const int chains = 3000;
    std::vector<double> r(chains);
    parallel_for(chains, [&](std::size_t c) {
        Rng rng = make_stream(77, c);
        auto state = she_init(sph, start, u0, s);
        for (int k = 0; k < 120; ++k) she_step_sigma(sph, state, s.dt, rng, s);
        r[c] = sph.distance(sph.origin(), state.st.path.nodes[1]);
    });
    // Density of r is proportional to exp(-r^2/2) R sin(r/R).
    double cut = default_delta(sph);
    const auto& rule = gauss_legendre(200);
    auto dens = [&](double x) { return std::exp(-0.5 * x * x) * std::sin(x / radius); };
    double z = integrate(rule, 0, cut, dens);
    std::function<double(double)> cdf = [&](double x) { return integrate(rule, 0, std::min(x, cut), dens) / z; };
    CHECK(ks_pvalue(ks_statistic(r, cdf), r.size()) > 0.01);
}

TEST_CASE("flat Heun dynamics has the Brownian covariance") {
    auto r1 = Manifold::euclidean(1);
    int n = 8;
    double eps = 1.0 / n;
    SheSettings s;
    s.dt = 0.1 * eps * eps;
    auto start = constant_path(r1, n, 100.0);
    Frame u0 = r1.tangent_frame(r1.origin());
    const int chains = 1500;
    std::vector<std::vector<double>> x(n + 1, std::vector<double>(chains));
    parallel_for(chains, [&](std::size_t c) {
        Rng rng = make_stream(9, c);
        auto state = she_init(r1, start, u0, s);
        for (int k = 0; k < 1600; ++k) she_step(r1, state, s.dt, rng, s);
        for (int i = 1; i <= n; ++i) x[i][c] = state.st.path.nodes[i][0];
    });
    for (int i = 1; i <= n; ++i)
        for (int j = i; j <= n; ++j) {
            auto est = covariance_estimate(x[i], x[j]);
            INFO("i = " << i << " j = " << j);
            CHECK(std::abs(est.mean - i * eps) <= std::max(3 * est.stderr_, 0.02));
        }
}

TEST_CASE("flat spectral solver") {
    auto dn = flat_init(FlatBasis::DirichletNeumann, 256, 1);
    CHECK(dn.eigenvalue(0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 4));
    auto dd = flat_init(FlatBasis::DirichletDirichlet, 256, 1);
    CHECK(dd.eigenvalue(0) == doctest::Approx(std::numbers::pi * std::numbers::pi));
    for (double s : {0.1, 0.4, 0.9})
        for (double t : {0.2, 0.5, 1.0}) {
            CHECK(std::abs(flat_covariance(dn, s, t) - std::min(s, t)) <= dn.tail_bound());
            double bridge = std::min(s, t) * (1 - std::max(s, t));
            CHECK(std::abs(flat_covariance(dd, s, t) - bridge) <= dd.tail_bound());
        }
    CHECK(dn.tail_bound() < 1e-3);

    // Exact OU transition: moments after one step from X = 1.
    auto st = flat_init(FlatBasis::DirichletNeumann, 3, 1);
    double dt = 0.3;
    std::vector<RunningStats> m(3), v(3);
    Rng rng(2);
    for (int k = 0; k < 40000; ++k) {
        st.modes.setOnes();
        flat_she_exact(st, dt, rng);
        for (int j = 0; j < 3; ++j) m[j].add(st.modes(j, 0));
    }
    for (int j = 0; j < 3; ++j) {
        double lam = st.eigenvalue(j);
        CHECK(std::abs(m[j].mean() - std::exp(-0.5 * lam * dt)) < 4 * m[j].stderr_mean());
        CHECK(m[j].variance() == doctest::Approx((1 - std::exp(-lam * dt)) / lam).epsilon(0.03));
    }
    // A huge step samples the stationary law.
    std::vector<double> z;
    for (int k = 0; k < 20000; ++k) {
        flat_she_exact(st, 1e6, rng);
        z.push_back(st.modes(1, 0) * std::sqrt(st.eigenvalue(1)));
    }
    CHECK(ks_pvalue(ks_statistic(z, normal_cdf), z.size()) > 0.01);
}

TEST_CASE("geodesic random walk sampler") {
    SUBCASE("flat increments are exact") {
        auto r2 = Manifold::euclidean(2);
        auto part = Partition::uniform(4);
        Rng rng(1);
        std::vector<double> z;
        for (int k = 0; k < 5000; ++k) {
            auto b = brownian_path_sample(r2, part, 100.0, rng, 3);
            for (int i = 1; i <= 4; ++i) z.push_back((b.path.nodes[i] - b.path.nodes[i - 1])[1] / std::sqrt(part.eps));
        }
        CHECK(ks_pvalue(ks_statistic(z, normal_cdf), z.size()) > 0.01);
    }
    SUBCASE("circle marginal is the wrapped Gaussian") {
        double L = 2 * std::numbers::pi;
        auto c = Manifold::circle(L);
        auto part = Partition::uniform(4);
        const int N = 100000;
        std::vector<double> x(N);
        parallel_for(N, [&](std::size_t k) {
            Rng rng = make_stream(4, k);
            x[k] = brownian_path_sample(c, part, default_delta(c), rng, 32).path.nodes[4][0];
        });
        std::function<double(double)> cdf = [&](double t) {
            return integrate(gauss_legendre(64), 0, t, [&](double y) { return circle_heat_kernel(L, 1.0, y); });
        };
        CHECK(ks_pvalue(ks_statistic(x, cdf), x.size()) > 0.01);
    }
    SUBCASE("sphere first coordinate") {
        auto s2 = Manifold::sphere(2);
        auto part = Partition::uniform(64);
        const int N = 20000;
        std::vector<double> f(N);
        std::vector<double> rate(N);
        parallel_for(N, [&](std::size_t k) {
            Rng rng = make_stream(6, k);
            auto b = brownian_path_sample(s2, part, default_delta(s2), rng);
            f[k] = b.path.nodes[64][0];
            rate[k] = b.rejection_rate();
        });
        auto est = mean_estimate(f);
        CHECK(std::abs(est.mean - std::exp(-1.0)) < 3 * est.stderr_);
        CHECK(mean_estimate(rate).mean < 1e-3);
    }
    SUBCASE("too large a grid spacing is refused") {
        auto s2 = Manifold::sphere(2);
        Rng rng(1);
        CHECK_THROWS_AS(brownian_path_sample(s2, Partition::uniform(1), 0.05, rng), ConfigError);
    }
}

TEST_CASE("horizontal Brownian motion") {
    Rng rng(8);
    auto r3 = Manifold::euclidean(3);
    auto hb = horizontal_brownian(r3, r3.tangent_frame(r3.origin()), 100, 10.0, rng);
    for (int i = 1; i <= 100; ++i)
        CHECK((hb.dev.path.nodes[i] - hb.dev.path.nodes[i - 1] - hb.dB[i - 1]).norm() < 1e-14);

    auto s2 = Manifold::sphere(2);
    int steps = 1000;
    auto h = horizontal_brownian(s2, s2.tangent_frame(s2.origin()), steps, default_delta(s2), rng);
    const Frame& u = h.dev.frames.frames.back();
    Mat gram = u.columns.transpose() * u.columns;
    CHECK((gram - Mat::Identity(2, 2)).norm() < 1e-8);
    double qv = 0;
    for (const auto& db : h.dB) qv += db.squaredNorm();
    double dt = 1.0 / steps;
    CHECK(std::abs(qv - 2.0) < 5 * std::sqrt(2.0 * 2 * steps) * dt);
}
