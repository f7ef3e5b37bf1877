#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pathheat/errors.hpp"
#include "pathheat/functionals.hpp"
#include "pathheat/jacobi.hpp"

using namespace pathheat;

namespace {

Development straight(const Manifold& m, int n, const Vec& step) {
    return develop(m, m.tangent_frame(m.origin()), std::vector<Vec>(n, step), 1e9);
}

Development random_path(const Manifold& m, int n, Rng& rng, double scale) {
    std::vector<Vec> inc;
    for (int i = 0; i < n; ++i) inc.push_back(gaussian_vec(rng, m.dim()) * scale);
    return develop(m, m.random_frame(m.origin(), rng), inc, 0.9 * m.inj_radius());
}

CylinderFunction constant_functional(double c) {
    CylinderFunction F;
    F.f = [c](const Eigen::VectorXd&) { return c; };
    F.grad_f = [](const Eigen::VectorXd& I) { return Eigen::VectorXd::Zero(I.size()); };
    F.terms.push_back({[](double, const Point&) { return 1.0; },
                       [](double, const Point& x) { return Vec(Vec::Ones(x.size())); }});
    return F;
}

// sin(a I_1 + b I_2) with I_1 = int <c1, x> ds, I_2 = (x . c2)^2 at s = 1/2.
CylinderFunction random_functional(Rng& rng, int ambient) {
    Vec c1 = gaussian_vec(rng, ambient), c2 = gaussian_vec(rng, ambient);
    double a = gaussian_vec(rng, 1)[0], b = gaussian_vec(rng, 1)[0];
    CylinderFunction F;
    F.f = [a, b](const Eigen::VectorXd& I) { return std::sin(a * I[0] + b * I[1]); };
    F.grad_f = [a, b](const Eigen::VectorXd& I) {
        double c = std::cos(a * I[0] + b * I[1]);
        Eigen::VectorXd g(2);
        g << a * c, b * c;
        return g;
    };
    F.terms.push_back({[c1](double s, const Point& x) { return (1 + s) * c1.dot(x); },
                       [c1](double s, const Point&) { return Vec((1 + s) * c1); }});
    F.terms.push_back({[c2](double, const Point& x) { return std::pow(c2.dot(x), 2); },
                       [c2](double, const Point& x) { return Vec(2 * c2.dot(x) * c2); }, 0.5});
    return F;
}

}  // namespace

TEST_CASE("cylinder evaluation") {
    auto r2 = Manifold::euclidean(2);
    Vec step(2);
    step << 0.25, 0;
    auto dev = straight(r2, 4, step);
    auto one = constant_functional(0);
    one.f = [](const Eigen::VectorXd& I) { return I[0]; };
    CHECK(eval_cylinder(one, dev.path) == doctest::Approx(1.0).epsilon(1e-14));
    auto lin = builtin_functional("time_integral(0)", dev.path.partition);
    CHECK(eval_cylinder(lin, dev.path) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(eval_cylinder(builtin_functional("ambient_coord(2, 0)", dev.path.partition), dev.path) ==
          doctest::Approx(0.5));

    // Trapezoid error of int s^2 ds is O(eps^2).
    std::vector<double> err;
    for (int n : {8, 16, 32}) {
        Vec st(2);
        st << 1.0 / n, 0;
        auto d = straight(r2, n, st);
        err.push_back(std::abs(eval_cylinder(builtin_functional("squared_integral(0)", d.path.partition), d.path) - 1.0 / 3));
    }
    CHECK(err[0] / err[1] == doctest::Approx(4).epsilon(1e-6));
    CHECK(err[1] / err[2] == doctest::Approx(4).epsilon(1e-6));
}

TEST_CASE("L2 gradient") {
    auto r3 = Manifold::euclidean(3);
    Rng rng(1);
    auto dev = random_path(r3, 6, rng, 0.3);
    auto lin = builtin_functional("time_integral(1)", dev.path.partition);
    auto grad = l2_gradient(r3, lin, dev.path, dev.frames);
    Vec e = Vec::Zero(3);
    e[1] = 1;
    for (int i = 0; i <= 6; ++i) CHECK((grad[i] - dev.frames[i].columns.transpose() * e).norm() < 1e-14);
    for (const auto& g : l2_gradient(r3, constant_functional(2), dev.path, dev.frames)) CHECK(g.norm() == 0);

    CylinderFunction sq = lin;
    sq.f = [](const Eigen::VectorXd& I) { return I[0] * I[0]; };
    sq.grad_f = [](const Eigen::VectorXd& I) { return Eigen::VectorXd::Constant(1, 2 * I[0]); };
    double I = eval_cylinder(lin, dev.path);
    auto g2 = l2_gradient(r3, sq, dev.path, dev.frames);
    for (int i = 0; i <= 6; ++i) CHECK((g2[i] - 2 * I * grad[i]).norm() < 1e-12);
}

TEST_CASE("directional derivative") {
    auto r2 = Manifold::euclidean(2);
    Rng rng(2);
    auto dev = random_path(r2, 10, rng, 0.3);
    auto F = builtin_functional("time_integral(0)", dev.path.partition);
    DirectionField zero{"zero", [](double) { return Vec(Vec::Zero(2)); }, [](double) { return Vec(Vec::Zero(2)); }};
    CHECK(directional_derivative(r2, F, dev.path, dev.frames, zero) == 0);
    auto id = straight(r2, 10, Vec::Zero(2));
    CHECK(directional_derivative(r2, F, id.path, id.frames, builtin_direction("linear(0)", 2)) ==
          doctest::Approx(0.5).epsilon(1e-14));

    for (const auto& m : {Manifold::sphere(2), Manifold::hyperbolic(2), Manifold::euclidean(3), Manifold::sphere(3, 2.0)}) {
        int worst = 0;
        for (int k = 0; k < 100; ++k) {
            auto p = random_path(m, 8, rng, 0.2);
            auto G = random_functional(rng, m.ambient_dim());
            auto h = builtin_direction(k % 2 ? "sine(0)" : "linear(1)", m.dim());
            double a = directional_derivative(m, G, p.path, p.frames, h);
            double b = directional_derivative_fd(m, G, p.path, p.frames, h);
            if (std::abs(a - b) > 1e-5 * std::max(1.0, std::abs(a))) ++worst;
        }
        INFO(m.name());
        CHECK(worst == 0);
    }
}

TEST_CASE("Dirichlet energy and gauge invariance") {
    auto r2 = Manifold::euclidean(2);
    Rng rng(3);
    std::vector<DiscretePath> paths;
    std::vector<FramePath> frames;
    for (int k = 0; k < 20; ++k) {
        auto d = random_path(r2, 8, rng, 0.3);
        paths.push_back(d.path);
        frames.push_back(d.frames);
    }
    auto lin = builtin_functional("time_integral(0)", paths[0].partition);
    auto est = dirichlet_energy(r2, lin, paths, frames);
    CHECK(est.mean == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(dirichlet_energy(r2, constant_functional(1), paths, frames).mean == 0);

    auto s2 = Manifold::sphere(2);
    for (int k = 0; k < 20; ++k) {
        auto d = random_path(s2, 8, rng, 0.3);
        auto G = random_functional(rng, 3);
        Frame u1 = s2.random_frame(s2.origin(), rng);
        auto other = horizontal_lift(s2, d.path, u1);
        double e0 = energy_density(s2, G, d.path, d.frames), e1 = energy_density(s2, G, d.path, other);
        CHECK(std::abs(e0 - e1) < 1e-10);
        auto g0 = l2_gradient(s2, G, d.path, d.frames), g1 = l2_gradient(s2, G, d.path, other);
        for (int i = 0; i <= 8; ++i) CHECK(std::abs(g0[i].squaredNorm() - g1[i].squaredNorm()) < 1e-10);
        // h paired with its co-rotated copy.
        Mat R = d.frames[0].columns.transpose() * u1.columns;
        auto h = builtin_direction("sine(1)", 2);
        DirectionField hr{"rot", [&](double s) { return Vec(R.transpose() * h.h(s)); }, {}};
        CHECK(std::abs(directional_derivative(s2, G, d.path, d.frames, h) -
                       directional_derivative(s2, G, d.path, other, hr)) < 1e-10);
    }
}

TEST_CASE("beta_h") {
    Rng rng(4);
    auto r1 = Manifold::euclidean(1);
    auto h = builtin_direction("sine(0)", 1);
    RunningStats sq;
    for (int k = 0; k < 20000; ++k) {
        auto hb = horizontal_brownian(r1, r1.tangent_frame(r1.origin()), 64, 1e9, rng);
        double b = beta_h(r1, hb, h);
        sq.add(b * b);
    }
    double pi = std::numbers::pi;
    CHECK(std::abs(sq.mean() - pi * pi / 8) < 3 * sq.stderr_mean() + 1e-3);

    auto s2 = Manifold::sphere(2);
    DirectionField zero{"zero", [](double) { return Vec(Vec::Zero(2)); }, [](double) { return Vec(Vec::Zero(2)); }};
    auto hb = horizontal_brownian(s2, s2.tangent_frame(s2.origin()), 64, 1.0, rng);
    CHECK(beta_h(s2, hb, zero) == 0);
    RunningStats mean;
    auto lin = builtin_direction("linear(0)", 2);
    for (int k = 0; k < 5000; ++k)
        mean.add(beta_h(s2, horizontal_brownian(s2, s2.tangent_frame(s2.origin()), 64, 1.0, rng), lin));
    CHECK(std::abs(mean.mean()) < 3 * mean.stderr_mean());
    HorizontalBrownian broken = hb;
    broken.dB.pop_back();
    CHECK_THROWS_AS(beta_h(s2, broken, lin), DomainError);
}

TEST_CASE("integration by parts checks") {
    auto r1 = Manifold::euclidean(1);
    auto part = Partition::uniform(64);
    auto F = builtin_functional("sin(time_integral(0))", part);
    auto rep = ibp_check(r1, F, builtin_direction("linear(0)", 1), 20000, 64, 7);
    double exact = 0.5 * std::exp(-1.0 / 6);
    CHECK(std::abs(rep.lhs.mean - exact) < 3 * rep.lhs.stderr_);
    CHECK(std::abs(rep.rhs.mean - exact) < 3 * rep.rhs.stderr_);
    CHECK(std::abs(rep.z) < 3);

    auto s2 = Manifold::sphere(2);
    auto one = ibp_check(s2, constant_functional(1), builtin_direction("linear(0)", 2), 4000, 64, 8);
    CHECK(one.lhs.mean == 0);
    CHECK(std::abs(one.rhs.mean) < 3 * one.rhs.stderr_);

    // Twenty independent pairs: a z-score above 3 should be rare.
    std::vector<CylinderFunction> Fs;
    std::vector<DirectionField> hs;
    const char* fs[] = {"time_integral(1)", "sin(time_integral(2))", "squared_integral(1)", "exp(time_integral(0))",
                        "ambient_coord(64, 1)"};
    const char* dirs[] = {"linear(0)", "sine(1)", "bump(0)", "linear(1)"};
    for (int k = 0; k < 20; ++k) {
        Fs.push_back(builtin_functional(fs[k % 5], part));
        hs.push_back(builtin_direction(dirs[k / 5], 2));
    }
    auto reps = ibp_check(s2, Fs, hs, 4000, 64, 9);
    int big = 0;
    for (const auto& r : reps) big += std::abs(r.z) > 3;
    CHECK(big <= 1);
}

TEST_CASE("quadratic variation") {
    Rng rng(5);
    auto r1 = Manifold::euclidean(1);
    int n = 8;
    double eps = 1.0 / n;
    auto start = make_path(r1, r1.origin(), std::vector<Point>(n, r1.origin()), Partition::uniform(n), 1e9);
    SheSettings s;
    s.dt = 1e-3 * eps * eps;
    auto state = she_init(r1, start, r1.tangent_frame(r1.origin()), s);
    std::vector<Vec> zero(n + 1, Vec::Zero(1));
    auto flat0 = qv_check(r1, state, s, 0.1, zero, rng);
    CHECK(flat0.realized == 0);
    CHECK(flat0.predicted == 0);
    auto c = zero;
    c[3][0] = 1;
    auto flat = qv_check(r1, state, s, 1.0, c, rng);
    CHECK(flat.predicted == doctest::Approx(1 / eps).epsilon(1e-9));
    CHECK(flat.ratio > 0.95);
    CHECK(flat.ratio < 1.05);

    auto sph = Manifold::sphere(2, 3.0);
    auto st = make_path(sph, sph.origin(), std::vector<Point>(n, sph.origin()), Partition::uniform(n), default_delta(sph));
    SheSettings ss;
    ss.dt = 0.01 * eps * eps;
    auto sstate = she_init(sph, st, sph.tangent_frame(sph.origin()), ss);
    std::vector<Vec> cs(n + 1, Vec::Zero(3));
    cs[5][1] = 1;
    auto rep = qv_check(sph, sstate, ss, 1.0, cs, rng);
    CHECK(rep.ratio > 0.95);
    CHECK(rep.ratio < 1.05);
}

TEST_CASE("built-in library parsing") {
    auto part = Partition::uniform(4);
    CHECK_THROWS_AS(builtin_functional("nope(1)", part), ConfigError);
    CHECK_THROWS_AS(builtin_functional("ambient_coord(9, 0)", part), ConfigError);
    CHECK_THROWS_AS(builtin_functional("time_integral(a)", part), ConfigError);
    CHECK_THROWS_AS(builtin_direction("linear(3)", 2), ConfigError);
    CHECK(builtin_direction("bump(1)", 2).loop);
    CHECK(builtin_functional("exp(squared_integral(0))", part).terms.size() == 1);
}
