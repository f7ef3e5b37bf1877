#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pathheat/errors.hpp"
#include "pathheat/inequalities.hpp"

using namespace pathheat;

namespace {

constexpr double kPi = std::numbers::pi;

// Reference values from 30-digit evaluation of the closed forms.
struct Row {
    double K, exp_term, c0, ctilde;
};
const Row kRows[] = {
    {-2.0, 0.283833820809153173, 0.225129946954799426, 0.225129946954799426},
    {-1.0, 0.367879441171442322, 0.322649044208427418, 0.322649044208427418},
    {-0.5, 0.426122638850533694, 0.396341709518080577, 0.396341709518080577},
    {0.5, 0.594885082800512587, 0.645363498597161430, 0.658931978350045975},
    {1.0, 0.718281828459045235, 0.841678574117577883, 0.955895631378684655},
    {2.0, 1.097264024732662557, 1.476246221006279878, 1.476246221006279878},
    {-1e-3, 0.499833374991668055, 0.499750104119815178, 0.499750104119815178},
    {1e-3, 0.500166708341668056, 0.500250072932294358, 0.500250104213565204},
};

// Random symmetric matrix with smallest eigenvalue at least lo.
Mat random_ricci(Rng& rng, int d, double lo) {
    Mat a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = gaussian_vec(rng, 1)[0];
    Mat s = a * a.transpose();
    return s + lo * Mat::Identity(d, d);
}

}  // namespace

TEST_CASE("LSI constants against high precision values") {
    for (const Row& r : kRows) {
        CAPTURE(r.K);
        CHECK(lsi_exp_term(r.K) == doctest::Approx(r.exp_term).epsilon(1e-12));
        CHECK(lsi_c0(r.K) == doctest::Approx(r.c0).epsilon(1e-12));
        CHECK(gourcy_wu_constant(r.K) == doctest::Approx(r.ctilde).epsilon(1e-12));
        CHECK(lsi_constant(r.K) == doctest::Approx(std::min(r.exp_term, r.c0)).epsilon(1e-12));
        CHECK(lsi_constant(r.K) <= gourcy_wu_constant(r.K));
    }
    CHECK(lsi_constant(1.0) == doctest::Approx(std::exp(1.0) - 2).epsilon(1e-14));
    CHECK(lsi_c0(1.0) == doctest::Approx(2 * std::pow(std::sqrt(std::exp(1.0)) - 1, 2)).epsilon(1e-14));
}

TEST_CASE("LSI constants near zero") {
    CHECK(lsi_constant(0.0) == 0.5);
    CHECK(lsi_c0(0.0) == 0.5);
    for (double K : {1e-12, -1e-12, 1e-7, -1e-7, 5e-5, -5e-5, 2e-4, -2e-4}) {
        CAPTURE(K);
        CHECK(std::isfinite(lsi_constant(K)));
        CHECK(lsi_exp_term(K) == doctest::Approx(0.5 + K / 6 + K * K / 24).epsilon(1e-12));
        CHECK(lsi_c0(K) == doctest::Approx(0.5 + K / 4).epsilon(1e-7));
        CHECK(gourcy_wu_constant(K) == doctest::Approx(0.5 + K / 4).epsilon(1e-7));
    }
    // Continuity across the series switch.
    CHECK(lsi_exp_term(0.99999e-4) == doctest::Approx(lsi_exp_term(1.00001e-4)).epsilon(1e-9));
    CHECK_THROWS_AS(lsi_constant(std::nan("")), DomainError);
}

TEST_CASE("Gourcy-Wu branches") {
    // 2e^{K/2} - e^K changes sign at K = 2 log 2.
    double k0 = 2 * std::log(2.0);
    CHECK(gourcy_wu_constant(k0 + 1e-6) == doctest::Approx(lsi_c0(k0 + 1e-6)).epsilon(1e-12));
    CHECK(gourcy_wu_constant(k0 - 1e-6) > lsi_c0(k0 - 1e-6));
    for (double K : {-3.0, -1.0, -0.1}) CHECK(gourcy_wu_constant(K) == doctest::Approx(lsi_c0(K)).epsilon(1e-14));
    for (double K : {0.5, 1.0, 1.3}) CHECK(gourcy_wu_constant(K) >= lsi_c0(K));
}

TEST_CASE("Einstein constant") {
    CHECK(einstein_a(2.0, 0) == doctest::Approx(1 / (1 + kPi * kPi / 4)).epsilon(1e-14));
    CHECK(einstein_a(2.0, 0) == doctest::Approx(0.288400439142).epsilon(1e-10));
    for (int k = 0; k < 50; ++k) CHECK(einstein_a(2.0, k + 1) < einstein_a(2.0, k));

    // mpmath with the full series.
    auto c2 = einstein_lsi_constant(2.0, 2);
    CHECK(c2.value == doctest::Approx(5.86027445646229678).epsilon(1e-4));
    CHECK(std::abs(c2.value - 5.86027445646229678) <= c2.value_error);
    CHECK(einstein_lsi_constant(1.0, 2).value == doctest::Approx(2.17082128985288907).epsilon(1e-4));
    CHECK(einstein_lsi_constant(-1.0, 2).value == doctest::Approx(1.34366259210933475).epsilon(1e-4));
    CHECK(einstein_lsi_constant(1e-3, 2).value == doctest::Approx(0.406256890727641443).epsilon(1e-6));

    // The tail bound covers the change from a longer truncation.
    auto shortc = einstein_lsi_constant(1.0, 3, 1000);
    auto longc = einstein_lsi_constant(1.0, 3, 100000);
    CHECK(longc.value >= shortc.value);
    CHECK(longc.value - shortc.value <= shortc.value_error);

    CHECK(einstein_lsi_constant(0.0, 3).value == doctest::Approx(4 / (kPi * kPi)).epsilon(1e-15));
    CHECK_THROWS_AS(einstein_lsi_constant(1.0, 2, 10), ConfigError);
}

TEST_CASE("gradient inequality constants") {
    auto c = gradient_constants(0.0, 2.0, 3);
    CHECK(c.c1 == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(c.c2n == doctest::Approx(2.0).epsilon(1e-15));
    for (double K : {1e-6, -1e-6, 3e-4, -3e-4}) {
        auto t = gradient_constants(K, 1.0, 1);
        CHECK(t.c1 == doctest::Approx(std::max(0.5, 0.5 + K / 3 + K * K / 8)).epsilon(1e-12));
        CHECK(t.c2n == doctest::Approx(std::expm1(K) / K * std::max(1.0, std::exp(-K))).epsilon(1e-12));
    }
    // Direct evaluation away from zero.
    double K = 0.7, T = 1.5;
    auto t = gradient_constants(K, T, 4);
    double x = K * T;
    CHECK(t.c1 == doctest::Approx((T * K * std::exp(x) - std::exp(x) + 1) / (K * K)).epsilon(1e-13));
    CHECK(t.c2n == doctest::Approx(std::expm1(x) / K).epsilon(1e-14));
    auto tn = gradient_constants(-0.7, 1.5, 4);
    CHECK(tn.c1 == doctest::Approx(T * T / 2).epsilon(1e-15));
    CHECK(tn.c2n == doctest::Approx(std::expm1(-x) / -K * std::exp(0.7 / 4)).epsilon(1e-14));
    // Continuity across the series switch.
    CHECK(gradient_constants(0.999e-3, 1, 1).c1 == doctest::Approx(gradient_constants(1.001e-3, 1, 1).c1).epsilon(1e-6));
    CHECK_THROWS_AS(gradient_constants(1, 0, 1), ConfigError);
}

TEST_CASE("constant report is finite") {
    for (double K : {-2.0, 0.0, 1e-9, 3.0}) {
        auto r = constant_report(K, 2, 1.0, 2);
        for (double v : {r.C, r.C0, r.Ctilde, r.einstein.value, r.gradient.c1, r.gradient.c2n}) {
            CHECK(std::isfinite(v));
            CHECK(v > 0);
        }
    }
}

TEST_CASE("damping matrix") {
    // Constant Ric = c I gives M_t = e^{-ct/2} I.
    for (double c : {1.0, -1.0, 0.3}) {
        std::vector<Mat> ric(101, c * Mat::Identity(2, 2));
        auto M = ricci_flow_matrix(ric, 0.01);
        CHECK(M.back()(0, 0) == doctest::Approx(std::exp(-0.5 * c)).epsilon(1e-10));
        CHECK(std::abs(M.back()(0, 1)) < 1e-14);
        CHECK(std::abs(ricci_flow_bound_excess(M, 0.01, -c)) < 1e-9);
    }
    // Random Ric >= -K with K = 0.5.
    Rng rng = make_stream(11, 0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Mat> ric;
        for (int k = 0; k <= 40; ++k) ric.push_back(random_ricci(rng, 3, -0.5));
        auto M = ricci_flow_matrix(ric, 0.025);
        CHECK(ricci_flow_bound_excess(M, 0.025, 0.5) <= 1e-9);
    }
}

TEST_CASE("damping bound along frame paths") {
    for (const Manifold& m : {Manifold::sphere(2), Manifold::hyperbolic(2)}) {
        double K = ricci_lower_k(m);
        Frame u0 = m.tangent_frame(m.origin());
        double worst = -1;
        for (int p = 0; p < 1000; ++p) {
            Rng rng = make_stream(5, p);
            auto hb = horizontal_brownian(m, u0, 32, 0.9 * m.inj_radius(), rng);
            std::vector<Mat> ric;
            for (const Frame& u : hb.dev.frames.frames) ric.push_back(m.ricci_matrix(u));
            auto M = ricci_flow_matrix(ric, 1.0 / 32);
            worst = std::max(worst, ricci_flow_bound_excess(M, 1.0 / 32, K));
        }
        CAPTURE(m.name());
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("gradient inequality") {
    auto flat = Manifold::euclidean(1);
    Vec a = Vec::Constant(1, 1.7);
    auto r = gradient_ineq_check(flat, test_function("linear", a), 0.8, 0.2, Vec::Constant(1, 0.3), 0.0);
    CHECK(r.lhs == doctest::Approx(1.7 * 0.6).epsilon(1e-8));
    CHECK(std::abs(r.margin) < 1e-8);

    auto flat2 = Manifold::euclidean(2);
    Vec a2(2);
    a2 << 0.3, -0.4;
    auto r2 = gradient_ineq_check(flat2, test_function("square", a2), 1.0, 0.0, Vec::Zero(2), 0.0);
    CHECK(r2.margin >= -3 * r2.quad_error - 1e-9);

    auto same = gradient_ineq_check(flat, test_function("linear", a), 0.5, 0.5, Vec::Zero(1), 0.0);
    CHECK(same.lhs == 0);
    CHECK(same.rhs == 0);

    // Unit S^2: Ric = 1, so K = -1, and p_s of a coordinate is e^{-s} times it.
    auto s2 = Manifold::sphere(2);
    double K = ricci_lower_k(s2);
    CHECK(K == -1);
    Vec e1 = Vec::Zero(3), mix(3);
    e1[1] = 1;
    mix << 0.2, 0.5, -0.3;
    Point y = s2.origin();
    Point y2 = s2.exp(y, Vec((Vec(3) << 0, 0.4, 0.7).finished()));
    auto lin = gradient_ineq_check(s2, test_function("linear", e1), 1.0, 0.0, y, K);
    CHECK(lin.lhs == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-6));
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
    for (const auto& c : cases) {
        auto rep = gradient_ineq_check(s2, test_function(c.kind, c.a), c.T1, c.T2, c.y, K);
        CAPTURE(c.kind);
        CAPTURE(rep.lhs);
        CAPTURE(rep.rhs);
        CAPTURE(rep.quad_error);
        CHECK(rep.margin >= -3 * rep.quad_error - 1e-7);
    }
    CHECK_THROWS_AS(gradient_ineq_check(Manifold::hyperbolic(2), test_function("linear", mix), 1, 0,
                                        Manifold::hyperbolic(2).origin(), 1),
                    UnsupportedFeature);
    CHECK_THROWS_AS(test_function("cubic", mix), ConfigError);
}

TEST_CASE("empirical LSI, flat tilted Gaussian") {
    // F = exp(I) with I the trapezoid integral of a 1-d Brownian path.
    const int n = 16;
    auto part = Partition::uniform(n);
    auto F = builtin_functional("exp(time_integral(0))", part);
    auto w = grid_weights(part);
    double v = 0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) v += w[i] * w[j] * std::min(part.s(i), part.s(j));
    // Entropy of the normalized F is 2 Var(I); DF = F e_1, so E|DF|^2 / E F^2 = 1.
    auto m = Manifold::euclidean(1);
    auto half = lsi_empirical(m, F, 0.0, 100000, n, 3, true);
    auto full = lsi_empirical(m, F, 0.0, 100000, n, 3, false);
    CAPTURE(half.entropy);
    CAPTURE(half.stderr_);
    CHECK(half.C == 0.5);
    CHECK(std::abs(half.entropy - 2 * v) < 4 * half.stderr_);
    CHECK(half.energy_term == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(full.energy_term == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(half.slack - (0.5 - 2 * v)) < 4 * half.stderr_);
    CHECK(std::abs(full.slack - (1.0 - 2 * v)) < 4 * full.stderr_);
    // With the 1/2 in the energy the inequality fails for this F.
    CHECK(half.slack < 0);
    CHECK(full.slack > 0);
}

TEST_CASE("empirical LSI on the unit sphere") {
    const int n = 16;
    auto part = Partition::uniform(n);
    auto I = builtin_functional("time_integral(1)", part);
    CylinderFunction F = I;
    F.name = "1 + 0.2 time_integral(1)";
    F.f = [](const Eigen::VectorXd& x) { return 1 + 0.2 * x[0]; };
    F.grad_f = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(x.size(), 0.2); };
    auto m = Manifold::sphere(2);
    auto full = lsi_empirical(m, F, ricci_lower_k(m), 100000, n, 4, false);
    auto half = lsi_empirical(m, F, ricci_lower_k(m), 100000, n, 4, true);
    MESSAGE("S2 LSI slack: full " << full.slack << " +- " << full.stderr_ << ", half " << half.slack << " +- "
                                  << half.stderr_);
    CHECK(full.slack >= -3 * full.stderr_);
    CHECK(half.C == doctest::Approx(0.322649044208427418).epsilon(1e-12));
}
