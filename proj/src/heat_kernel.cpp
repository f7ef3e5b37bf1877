#include "pathheat/heat_kernel.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <functional>
#include <numbers>

#include "pathheat/errors.hpp"
#include "pathheat/quadrature.hpp"

namespace pathheat {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTol = 1e-14;
}  // namespace

double circle_heat_kernel(double period, double t, double x) {
    if (!(t > 0)) throw DomainError("heat kernel time must be positive");
    // Theta series converges fast for t small against the period, Fourier otherwise.
    if (t < 0.25 * period * period) {
        double s = 0;
        double norm = 1.0 / std::sqrt(2 * kPi * t);
        double x0 = x - period * std::round(x / period);
        for (int k = 0;; ++k) {
            double a = norm * std::exp(-(x0 + k * period) * (x0 + k * period) / (2 * t));
            double b = k > 0 ? norm * std::exp(-(x0 - k * period) * (x0 - k * period) / (2 * t)) : 0.0;
            s += a + b;
            if (k > 0 && a + b < kTol * s) break;
            if (k > 10000) break;
        }
        return s;
    }
    double s = 1.0 / period;
    for (int k = 1; k < 100000; ++k) {
        double w = 2 * kPi * k / period;
        double term = (2.0 / period) * std::exp(-0.5 * w * w * t);
        s += term * std::cos(w * x);
        if (term < kTol * s) break;
    }
    return s;
}

double sphere_heat_kernel(int d, double radius, double t, double theta) {
    if (!(t > 0)) throw DomainError("heat kernel time must be positive");
    if (d == 1) return circle_heat_kernel(2 * kPi * radius, t, radius * theta);
    double alpha = 0.5 * (d - 1);
    double vol = 2 * std::pow(kPi, 0.5 * (d + 1)) / boost::math::tgamma(0.5 * (d + 1)) * std::pow(radius, d);
    double x = std::cos(theta);
    // Gegenbauer recurrence: n C_n = 2x(n + a - 1) C_{n-1} - (n + 2a - 2) C_{n-2}.
    double c_prev = 1.0, c = 2 * alpha * x;
    double s = 1.0;
    double tr2 = t / (radius * radius);
    int quiet = 0;
    for (int l = 1; l < 200000; ++l) {
        if (l > 1) {
            double cn = (2 * x * (l + alpha - 1) * c - (l + 2 * alpha - 2) * c_prev) / l;
            c_prev = c;
            c = cn;
        }
        double decay = std::exp(-0.5 * l * (l + d - 1) * tr2);
        double weight = (1 + l / alpha) * decay;
        double term = weight * c;
        s += term;
        // |C_l^a(x)| <= C_l^a(1) bounds the tail term.
        double bound = weight * std::exp(std::lgamma(l + 2 * alpha) - std::lgamma(2 * alpha) - std::lgamma(l + 1.0));
        if (bound < kTol * std::abs(s)) {
            if (++quiet >= 3) break;
        } else {
            quiet = 0;
        }
    }
    return s / vol;
}

double heat_kernel(const Manifold& m, double t, const Point& p, const Point& q) {
    if (!(t > 0)) throw DomainError("heat kernel time must be positive");
    switch (m.kind()) {
        case ManifoldKind::Euclidean: {
            double r2 = (q - p).squaredNorm();
            return std::pow(2 * kPi * t, -0.5 * m.dim()) * std::exp(-r2 / (2 * t));
        }
        case ManifoldKind::Torus: {
            double s = 1.0;
            for (int k = 0; k < m.dim(); ++k) s *= circle_heat_kernel(m.periods()[k], t, q[k] - p[k]);
            return s;
        }
        case ManifoldKind::Sphere:
            return sphere_heat_kernel(m.dim(), m.radius(), t, m.distance(p, q) / m.radius());
        case ManifoldKind::Hyperbolic:
            throw UnsupportedFeature("heat kernel is not implemented on hyperbolic space");
    }
    return 0;
}

double volume(const Manifold& m) {
    switch (m.kind()) {
        case ManifoldKind::Sphere: {
            int d = m.dim();
            return 2 * std::pow(kPi, 0.5 * (d + 1)) / boost::math::tgamma(0.5 * (d + 1)) *
                   std::pow(m.radius(), d);
        }
        case ManifoldKind::Torus: {
            double v = 1;
            for (double L : m.periods()) v *= L;
            return v;
        }
        default:
            throw UnsupportedFeature("volume of a noncompact manifold");
    }
}

double sphere_expectation(const Manifold& m, double t, const Point& p,
                          const std::function<double(const Point&)>& f, int n_theta, int n_phi) {
    if (m.kind() != ManifoldKind::Sphere || m.dim() != 2)
        throw UnsupportedFeature("sphere_expectation is implemented on S^2 only");
    double R = m.radius();
    Frame u = m.tangent_frame(p);
    const GaussRule& rule = gauss_legendre(n_theta);
    // The kernel is below e^-72 of its peak beyond 12 sqrt(t).
    double theta_max = std::min(kPi, 12.0 * std::sqrt(t) / R);
    double s = 0;
    double h = 0.5 * theta_max;
    for (std::size_t a = 0; a < rule.nodes.size(); ++a) {
        double th = h * (rule.nodes[a] + 1);
        double k = sphere_heat_kernel(2, R, t, th);
        double ring = 0;
        for (int b = 0; b < n_phi; ++b) {
            double ph = 2 * kPi * b / n_phi;
            Vec dir = std::cos(ph) * u.columns.col(0) + std::sin(ph) * u.columns.col(1);
            ring += f(m.exp(p, (R * th) * dir));
        }
        ring *= 2 * kPi / n_phi;
        s += rule.weights[a] * h * k * ring * R * R * std::sin(th);
    }
    return s;
}

}  // namespace pathheat
