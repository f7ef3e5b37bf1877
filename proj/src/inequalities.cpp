#include "pathheat/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pathheat/errors.hpp"
#include "pathheat/heat_kernel.hpp"
#include "pathheat/parallel.hpp"
#include "pathheat/quadrature.hpp"
#include "pathheat/stats.hpp"

namespace pathheat {

namespace {
constexpr double kPi = std::numbers::pi;

// expm1(K/2)/K, continuous at 0.
double half_q(double K) {
    if (std::abs(K) < 1e-8) return 0.5 + K / 8;
    return std::expm1(0.5 * K) / K;
}

// (expm1(x) - x)/x^2.
double exp_second(double x) {
    if (std::abs(x) < 1e-4) return 0.5 + x / 6 + x * x / 24;
    return (std::expm1(x) - x) / (x * x);
}

// expm1(x)/x.
double exp_first(double x) {
    if (std::abs(x) < 1e-8) return 1 + x / 2;
    return std::expm1(x) / x;
}
}  // namespace

double lsi_exp_term(double K) {
    if (!std::isfinite(K)) throw DomainError("K must be finite");
    return exp_second(K);
}

double lsi_c0(double K) {
    if (!std::isfinite(K)) throw DomainError("K must be finite");
    double q = half_q(K);
    if (K >= 0) return 2 * q * q;
    double y = std::expm1(0.5 * K);
    y *= y;
    if (!(y < 1)) throw NumericalError("2e^{K/2} - e^K must be positive for K < 0");
    return 4 * q * q / (1 + std::sqrt(1 - y));
}

double lsi_constant(double K) { return std::min(lsi_exp_term(K), lsi_c0(K)); }

double gourcy_wu_constant(double K) {
    if (!std::isfinite(K)) throw DomainError("K must be finite");
    double q = half_q(K);
    double y = std::expm1(0.5 * K);
    y *= y;
    if (y < 1) return 4 * q * q / (1 + std::sqrt(1 - y));
    return 2 * q * q;
}

double einstein_a(double K, int k) {
    if (K == 0) return 0;
    double kk = k + 0.5;
    return 1.0 / (0.5 * K + 2 * kPi * kPi * kk * kk / K);
}

double einstein_b(double K, int) { return std::max(2 * kPi / (K * K + kPi * kPi), 1 / kPi); }

EinsteinConstant einstein_lsi_constant(double K, int d, int terms) {
    if (!std::isfinite(K)) throw DomainError("K must be finite");
    if (d < 1) throw ConfigError("dimension must be positive");
    if (terms < 1000) throw ConfigError("truncation must be at least 1000 terms");
    EinsteinConstant c;
    c.terms = terms;
    if (K == 0) {
        c.value = 4 / (kPi * kPi);
        return c;
    }
    // Summed from the small end.
    double s = 0;
    for (int k = terms - 1; k >= 0; --k) s += std::abs(einstein_a(K, k));
    c.a0 = einstein_a(K, 0);
    c.sum_abs_a = s;
    // |A_k| <= |K|/(2 pi^2 (k+1/2)^2) and sum_{k>=N} (k+1/2)^{-2} <= 1/(N-1/2).
    c.tail_bound = std::abs(K) / (2 * kPi * kPi) / (terms - 0.5);
    auto assemble = [&](double sum) {
        double inner = 4.0 * d * sum * sum * exp_first(K) + 2 * c.a0 * c.a0;
        double r = std::sqrt(inner) + einstein_b(K, 0);
        return r * r;
    };
    c.value = assemble(s);
    c.value_error = assemble(s + c.tail_bound) - c.value;
    return c;
}

GradientConstants gradient_constants(double K, double T, int n) {
    if (!std::isfinite(K)) throw DomainError("K must be finite");
    if (!(T > 0)) throw ConfigError("T must be positive");
    if (n < 1) throw ConfigError("n must be at least 1");
    GradientConstants c;
    double x = K * T;
    // (x e^x - e^x + 1)/x^2 = sum_{j>=2} (j-1) x^{j-2}/j!.
    double b;
    if (std::abs(x) < 1e-3) {
        b = 0.5 + x / 3 + x * x / 8 + x * x * x / 30;
    } else {
        b = (x * std::exp(x) - std::expm1(x)) / (x * x);
    }
    c.c1 = std::max(T * T * b, 0.5 * T * T);
    c.c2n = T * exp_first(x) * std::max(1.0, std::exp(-K / n));
    return c;
}

ConstantReport constant_report(double K, int d, double T, int n, int terms) {
    ConstantReport r;
    r.K = K;
    r.d = d;
    r.T = T;
    r.n = n;
    r.C = lsi_constant(K);
    r.C0 = lsi_c0(K);
    r.Ctilde = gourcy_wu_constant(K);
    r.ctilde_first_branch = 2 * std::exp(0.5 * K) - std::exp(K) > 0;
    r.einstein = einstein_lsi_constant(K, d, terms);
    r.gradient = gradient_constants(K, T, n);
    return r;
}

std::vector<Mat> ricci_flow_matrix(const std::vector<Mat>& ric, double dt) {
    if (ric.empty()) throw ConfigError("ricci_flow_matrix needs at least one sample");
    if (!(dt > 0)) throw ConfigError("dt must be positive");
    const int d = static_cast<int>(ric[0].rows());
    std::vector<Mat> M(ric.size());
    M[0] = Mat::Identity(d, d);
    auto rhs = [](const Mat& m, const Mat& r) -> Mat { return -0.5 * m * r; };
    for (std::size_t k = 0; k + 1 < ric.size(); ++k) {
        Mat mid = 0.5 * (ric[k] + ric[k + 1]);
        Mat k1 = rhs(M[k], ric[k]);
        Mat k2 = rhs(M[k] + 0.5 * dt * k1, mid);
        Mat k3 = rhs(M[k] + 0.5 * dt * k2, mid);
        Mat k4 = rhs(M[k] + dt * k3, ric[k + 1]);
        M[k + 1] = M[k] + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return M;
}

double ricci_flow_bound_excess(const std::vector<Mat>& M, double dt, double K) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < M.size(); ++s) {
        Mat inv = M[s].inverse();
        for (std::size_t t = s + 1; t < M.size(); ++t) {
            Eigen::JacobiSVD<Mat> svd(inv * M[t]);
            double norm = svd.singularValues()(0);
            worst = std::max(worst, norm - std::exp(0.5 * K * (t - s) * dt));
        }
    }
    return worst;
}

TestFunction test_function(const std::string& kind, const Vec& a) {
    TestFunction f;
    f.name = kind;
    if (kind == "linear") {
        f.f = [a](const Point& x) { return a.dot(x); };
        f.grad = [a](const Point&) -> Vec { return a; };
    } else if (kind == "square") {
        f.f = [a](const Point& x) { return a.dot(x) * a.dot(x); };
        f.grad = [a](const Point& x) -> Vec { return 2 * a.dot(x) * a; };
    } else if (kind == "exp") {
        f.f = [a](const Point& x) { return std::exp(a.dot(x)); };
        f.grad = [a](const Point& x) -> Vec { return std::exp(a.dot(x)) * a; };
    } else {
        throw ConfigError("unknown test function '" + kind + "'");
    }
    return f;
}

namespace {

// E[g(B_s)] started at y, at quadrature resolution level 0 or 1.
double semigroup(const Manifold& m, double s, const Point& y, const std::function<double(const Point&)>& g,
                 int level) {
    if (s <= 0) return g(y);
    if (m.kind() == ManifoldKind::Sphere) {
        if (m.dim() != 2) throw UnsupportedFeature("gradient inequality check supports the 2-sphere only");
        return level == 0 ? sphere_expectation(m, s, y, g, 96, 128) : sphere_expectation(m, s, y, g, 64, 96);
    }
    if (m.kind() != ManifoldKind::Euclidean || m.dim() > 2)
        throw UnsupportedFeature("gradient inequality check supports R^1, R^2 and S^2");
    const GaussRule& rule = gauss_legendre(level == 0 ? 64 : 48);
    double L = 9 * std::sqrt(s);
    double norm = 1 / std::sqrt(2 * kPi * s);
    auto dens = [&](double z) { return norm * std::exp(-z * z / (2 * s)); };
    if (m.dim() == 1) {
        return integrate(rule, -L, L, [&](double z) { return dens(z) * g(y + Vec::Constant(1, z)); });
    }
    return integrate(rule, -L, L, [&](double z1) {
        return integrate(rule, -L, L, [&](double z2) {
            Vec v(2);
            v << z1, z2;
            return dens(z1) * dens(z2) * g(y + v);
        });
    });
}

GradIneqReport grad_ineq_level(const Manifold& m, const TestFunction& f, double T1, double T2, const Point& y,
                               double K, int level) {
    const double h = 1e-4;
    Frame u = m.tangent_frame(y);
    const int d = m.dim();
    const GaussRule& rule = gauss_legendre(level == 0 ? 24 : 16);
    auto grad_norm = [&](const Point& x) {
        Tangent g = m.gradient(x, f.grad(x));
        return m.norm(x, g);
    };
    Vec lhs = Vec::Zero(d);
    double rhs = 0;
    double a = T2, b = T1;
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        double s = mid + half * rule.nodes[q], w = half * rule.weights[q];
        for (int k = 0; k < d; ++k) {
            Tangent e = u.columns.col(k);
            double fp = semigroup(m, s, m.exp(y, h * e), f.f, level);
            double fm = semigroup(m, s, m.exp(y, -h * e), f.f, level);
            lhs[k] += w * (fp - fm) / (2 * h);
        }
        rhs += w * std::exp(0.5 * K * s) * semigroup(m, s, y, grad_norm, level);
    }
    GradIneqReport r;
    r.lhs = lhs.norm();
    r.rhs = rhs;
    r.margin = r.rhs - r.lhs;
    return r;
}

}  // namespace

GradIneqReport gradient_ineq_check(const Manifold& m, const TestFunction& f, double T1, double T2, const Point& y,
                                   double K) {
    if (!(T1 >= T2) || T2 < 0) throw ConfigError("need T1 >= T2 >= 0");
    m.check_point(y);
    if (T1 == T2) return {};
    GradIneqReport fine = grad_ineq_level(m, f, T1, T2, y, K, 0);
    GradIneqReport coarse = grad_ineq_level(m, f, T1, T2, y, K, 1);
    fine.quad_error = std::abs(fine.margin - coarse.margin);
    return fine;
}

LsiReport lsi_empirical(const Manifold& m, const CylinderFunction& F, double K, std::size_t N, int steps,
                        std::uint64_t seed, bool half) {
    if (N < 2) throw ConfigError("lsi_empirical needs N >= 2");
    constexpr std::size_t kBlock = 256;
    const std::size_t blocks = (N + kBlock - 1) / kBlock;
    std::vector<double> a(N), b(N), e(N);
    Frame u0 = m.tangent_frame(m.origin());
    double delta = 0.9 * m.inj_radius();
    parallel_for(blocks, [&](std::size_t blk) {
        Rng rng = make_stream(seed, blk);
        for (std::size_t k = blk * kBlock; k < std::min(N, (blk + 1) * kBlock); ++k) {
            auto hb = horizontal_brownian(m, u0, steps, delta, rng);
            double v = eval_cylinder(F, hb.dev.path);
            double v2 = v * v;
            a[k] = v2 > 0 ? v2 * std::log(v2) : 0.0;
            b[k] = v2;
            double en = energy_density(m, F, hb.dev.path, hb.dev.frames);
            e[k] = half ? en : 2 * en;
        }
    });
    double A = 0, B = 0, D = 0;
    for (std::size_t k = 0; k < N; ++k) {
        A += a[k];
        B += b[k];
        D += e[k];
    }
    A /= N;
    B /= N;
    D /= N;
    if (!(B > 0)) throw NumericalError("lsi_empirical: F vanishes on every sample");
    LsiReport r;
    r.C = lsi_constant(K);
    // Normalizing F by sqrt(B) turns the entropy into A/B - log B.
    r.entropy = A / B - std::log(B);
    r.energy_term = 2 * r.C * D / B;
    r.slack = r.energy_term - r.entropy;
    // Delta method on (A, B, D).
    double gA = -1 / B, gB = (A - 2 * r.C * D) / (B * B) + 1 / B, gD = 2 * r.C / B;
    RunningStats z;
    for (std::size_t k = 0; k < N; ++k) z.add(gA * a[k] + gB * b[k] + gD * e[k]);
    r.stderr_ = z.stderr_mean();
    return r;
}

double ricci_lower_k(const Manifold& m) {
    switch (m.kind()) {
        case ManifoldKind::Euclidean:
        case ManifoldKind::Torus:
            return 0;
        case ManifoldKind::Sphere:
            return -(m.dim() - 1) / (m.radius() * m.radius());
        case ManifoldKind::Hyperbolic:
            return (m.dim() - 1) / (m.radius() * m.radius());
    }
    return 0;
}

}  // namespace pathheat
