#include "pathheat/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pathheat/errors.hpp"

namespace pathheat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// sin(x)/x and sinh(x)/x without cancellation near zero.
double sinc(double x) {
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
    return std::sin(x) / x;
}

double sinhc(double x) {
    if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0 + x * x * x * x / 120.0;
    return std::sinh(x) / x;
}

double wrap(double x, double period) {
    double y = std::fmod(x, period);
    if (y < 0) y += period;
    if (y >= period) y -= period;
    return y;
}

// Representative of x in (-period/2, period/2].
double wrap_centered(double x, double period) {
    double y = x - period * std::round(x / period);
    if (y <= -0.5 * period) y += period;
    return y;
}

}  // namespace

const char* kind_name(ManifoldKind k) {
    switch (k) {
        case ManifoldKind::Euclidean: return "euclidean";
        case ManifoldKind::Torus: return "torus";
        case ManifoldKind::Sphere: return "sphere";
        case ManifoldKind::Hyperbolic: return "hyperbolic";
    }
    return "?";
}

Manifold::Manifold(ManifoldKind kind, int dim, int ambient, double radius,
                   std::vector<double> periods)
    : kind_(kind), dim_(dim), ambient_(ambient), radius_(radius), periods_(std::move(periods)) {
    if (dim_ < 1 || dim_ > kMaxDim)
        throw DomainError("manifold dimension must lie in 1.." + std::to_string(kMaxDim));
    if (!(radius_ > 0) || !std::isfinite(radius_))
        throw DomainError("manifold radius must be positive and finite");
}

Manifold Manifold::euclidean(int d) { return Manifold(ManifoldKind::Euclidean, d, d, 1.0, {}); }

Manifold Manifold::torus(std::vector<double> periods) {
    for (double L : periods)
        if (!(L > 0) || !std::isfinite(L)) throw DomainError("torus periods must be positive");
    int d = static_cast<int>(periods.size());
    return Manifold(ManifoldKind::Torus, d, d, 1.0, std::move(periods));
}

Manifold Manifold::circle(double circumference) { return torus({circumference}); }

Manifold Manifold::sphere(int d, double radius) {
    return Manifold(ManifoldKind::Sphere, d, d + 1, radius, {});
}

Manifold Manifold::hyperbolic(int d, double radius) {
    return Manifold(ManifoldKind::Hyperbolic, d, d + 1, radius, {});
}

bool Manifold::operator==(const Manifold& o) const {
    return kind_ == o.kind_ && dim_ == o.dim_ && radius_ == o.radius_ && periods_ == o.periods_;
}

double Manifold::curvature() const {
    switch (kind_) {
        case ManifoldKind::Sphere: return 1.0 / (radius_ * radius_);
        case ManifoldKind::Hyperbolic: return -1.0 / (radius_ * radius_);
        default: return 0.0;
    }
}

double Manifold::kappa0() const { return std::abs(curvature()); }

double Manifold::inj_radius() const {
    switch (kind_) {
        case ManifoldKind::Sphere: return std::numbers::pi * radius_;
        case ManifoldKind::Torus: {
            double m = kInf;
            for (double L : periods_) m = std::min(m, 0.5 * L);
            return m;
        }
        default: return kInf;
    }
}

std::string Manifold::name() const {
    std::ostringstream os;
    os << kind_name(kind_) << "(dim=" << dim_;
    if (kind_ == ManifoldKind::Sphere || kind_ == ManifoldKind::Hyperbolic) os << ", radius=" << radius_;
    if (kind_ == ManifoldKind::Torus) {
        os << ", periods=[";
        for (std::size_t k = 0; k < periods_.size(); ++k) os << (k ? "," : "") << periods_[k];
        os << "]";
    }
    os << ")";
    return os.str();
}

double Manifold::minkowski(const Vec& v, const Vec& w) const {
    return -v[0] * w[0] + v.tail(ambient_ - 1).dot(w.tail(ambient_ - 1));
}

bool Manifold::contains(const Point& p, double tol) const {
    if (p.size() != ambient_ || !p.allFinite()) return false;
    switch (kind_) {
        case ManifoldKind::Sphere:
            return std::abs(p.norm() - radius_) <= tol * radius_;
        case ManifoldKind::Hyperbolic:
            return p[0] > 0 &&
                   std::abs(minkowski(p, p) + radius_ * radius_) <= tol * std::max(1.0, p.squaredNorm());
        case ManifoldKind::Torus:
            for (int k = 0; k < dim_; ++k)
                if (p[k] < 0 || p[k] >= periods_[k]) return false;
            return true;
        default:
            return true;
    }
}

void Manifold::check_point(const Point& p) const {
    if (!contains(p, 1e-9)) throw DomainError("point is not on " + name());
}

bool Manifold::is_tangent(const Point& p, const Tangent& v, double tol) const {
    if (v.size() != ambient_) return false;
    switch (kind_) {
        case ManifoldKind::Sphere: return std::abs(p.dot(v)) <= tol * radius_ * std::max(1.0, v.norm());
        case ManifoldKind::Hyperbolic:
            return std::abs(minkowski(p, v)) <= tol * std::max(1.0, p.norm() * v.norm());
        default: return true;
    }
}

double Manifold::inner(const Point&, const Tangent& v, const Tangent& w) const {
    if (kind_ == ManifoldKind::Hyperbolic) return minkowski(v, w);
    return v.dot(w);
}

double Manifold::norm(const Point& p, const Tangent& v) const {
    return std::sqrt(std::max(0.0, inner(p, v, v)));
}

Tangent Manifold::project_tangent(const Point& p, const Vec& a) const {
    double r2 = radius_ * radius_;
    switch (kind_) {
        case ManifoldKind::Sphere: return a - (p.dot(a) / r2) * p;
        case ManifoldKind::Hyperbolic: return a + (minkowski(a, p) / r2) * p;
        default: return a;
    }
}

Tangent Manifold::gradient(const Point& p, const Vec& dual) const {
    if (kind_ != ManifoldKind::Hyperbolic) return project_tangent(p, dual);
    Vec a = dual;
    a[0] = -a[0];
    return project_tangent(p, a);
}

Point Manifold::retract(const Vec& a) const {
    switch (kind_) {
        case ManifoldKind::Sphere: {
            double n = a.norm();
            if (n == 0) throw DomainError("cannot retract the origin onto a sphere");
            return (radius_ / n) * a;
        }
        case ManifoldKind::Hyperbolic: {
            Point p = a;
            p[0] = std::sqrt(radius_ * radius_ + a.tail(ambient_ - 1).squaredNorm());
            return p;
        }
        case ManifoldKind::Torus: {
            Point p = a;
            for (int k = 0; k < dim_; ++k) p[k] = wrap(a[k], periods_[k]);
            return p;
        }
        default: return a;
    }
}

Point Manifold::origin() const {
    Point p = Point::Zero(ambient_);
    if (kind_ == ManifoldKind::Sphere || kind_ == ManifoldKind::Hyperbolic) p[0] = radius_;
    return p;
}

Frame Manifold::tangent_frame(const Point& p) const {
    Frame u{p, Mat::Zero(ambient_, dim_)};
    if (kind_ == ManifoldKind::Euclidean || kind_ == ManifoldKind::Torus) {
        u.columns.setIdentity();
        return u;
    }
    // Gram-Schmidt on projected coordinate axes, most tangential first.
    int filled = 0;
    int worst = 0;
    for (int k = 1; k < ambient_; ++k)
        if (std::abs(p[k]) > std::abs(p[worst])) worst = k;
    for (int k = 0; k < ambient_; ++k) {
        if (k == worst) continue;
        Vec e = Vec::Zero(ambient_);
        e[k] = 1.0;
        Vec v = project_tangent(p, e);
        for (int j = 0; j < filled; ++j) v -= inner(p, u.columns.col(j), v) * u.columns.col(j);
        double n = norm(p, v);
        if (n < 1e-8) continue;
        u.columns.col(filled++) = v / n;
        if (filled == dim_) break;
    }
    if (filled < dim_) throw NumericalError("tangent frame construction failed");
    return u;
}

Vec Manifold::frame_coords(const Frame& u, const Tangent& v) const {
    if (kind_ == ManifoldKind::Hyperbolic) {
        Vec a(dim_);
        for (int k = 0; k < dim_; ++k) a[k] = minkowski(u.columns.col(k), v);
        return a;
    }
    return u.columns.transpose() * v;
}

double Manifold::distance(const Point& p, const Point& q) const {
    if (p.size() != ambient_ || q.size() != ambient_)
        throw DomainError("distance: point dimension does not match " + name());
    switch (kind_) {
        case ManifoldKind::Euclidean: return (q - p).norm();
        case ManifoldKind::Torus: {
            double s = 0;
            for (int k = 0; k < dim_; ++k) {
                double x = wrap_centered(q[k] - p[k], periods_[k]);
                s += x * x;
            }
            return std::sqrt(s);
        }
        case ManifoldKind::Sphere: {
            double r2 = radius_ * radius_;
            Vec dq = q - p;
            Vec w = dq - (p.dot(dq) / r2) * p;
            double c = p.dot(q) / r2;
            return radius_ * std::atan2(w.norm() / radius_, c);
        }
        case ManifoldKind::Hyperbolic: {
            double r2 = radius_ * radius_;
            Vec dq = q - p;
            Vec w = dq + (minkowski(p, dq) / r2) * p;
            return radius_ * std::asinh(std::sqrt(std::max(0.0, minkowski(w, w))) / radius_);
        }
    }
    return 0;
}

Point Manifold::exp(const Point& p, const Tangent& v) const {
    switch (kind_) {
        case ManifoldKind::Euclidean: return p + v;
        case ManifoldKind::Torus: return retract(p + v);
        case ManifoldKind::Sphere: {
            double r = v.norm() / radius_;
            Point q = std::cos(r) * p + sinc(r) * v;
            return (radius_ / q.norm()) * q;
        }
        case ManifoldKind::Hyperbolic: {
            double r = std::sqrt(std::max(0.0, minkowski(v, v))) / radius_;
            Point q = std::cosh(r) * p + sinhc(r) * v;
            return retract(q);
        }
    }
    return p;
}

Tangent Manifold::log(const Point& p, const Point& q) const {
    switch (kind_) {
        case ManifoldKind::Euclidean: return q - p;
        case ManifoldKind::Torus: {
            Tangent v(dim_);
            for (int k = 0; k < dim_; ++k) v[k] = wrap_centered(q[k] - p[k], periods_[k]);
            for (int k = 0; k < dim_; ++k)
                if (std::abs(std::abs(v[k]) - 0.5 * periods_[k]) < 1e-12 * periods_[k])
                    throw CutLocusError("log: points are conjugate across the torus");
            return v;
        }
        case ManifoldKind::Sphere: {
            double r2 = radius_ * radius_;
            Vec dq = q - p;
            Vec w = dq - (p.dot(dq) / r2) * p;
            double wn = w.norm();
            double theta = std::atan2(wn / radius_, p.dot(q) / r2);
            if (theta >= std::numbers::pi * (1 - 1e-12) || (wn < 1e-14 * radius_ && p.dot(q) < 0))
                throw CutLocusError("log: points are antipodal on " + name());
            if (wn == 0) return Tangent::Zero(ambient_);
            return (radius_ * theta / wn) * w;
        }
        case ManifoldKind::Hyperbolic: {
            double r2 = radius_ * radius_;
            Vec dq = q - p;
            Vec w = dq + (minkowski(p, dq) / r2) * p;
            double wn = std::sqrt(std::max(0.0, minkowski(w, w)));
            if (wn == 0) return Tangent::Zero(ambient_);
            double theta = std::asinh(wn / radius_);
            return (radius_ * theta / wn) * w;
        }
    }
    return q - p;
}

Tangent Manifold::transport(const Point& p, const Point& q, const Tangent& v) const {
    switch (kind_) {
        case ManifoldKind::Sphere: {
            double den = radius_ * radius_ + p.dot(q);
            if (den <= 1e-14 * radius_ * radius_)
                throw CutLocusError("transport: points are antipodal on " + name());
            return v - (q.dot(v) / den) * (p + q);
        }
        case ManifoldKind::Hyperbolic: {
            double den = radius_ * radius_ - minkowski(p, q);
            return v + (minkowski(q, v) / den) * (p + q);
        }
        default: return v;
    }
}

Frame Manifold::transport(const Frame& u, const Point& q) const {
    Frame out{q, Mat(ambient_, dim_)};
    if (kind_ == ManifoldKind::Euclidean || kind_ == ManifoldKind::Torus) {
        out.columns = u.columns;
        return out;
    }
    for (int k = 0; k < dim_; ++k) out.columns.col(k) = transport(u.base, q, u.columns.col(k));
    return out;
}

Tangent Manifold::riemann(const Point& p, const Tangent& x, const Tangent& y, const Tangent& z) const {
    double k = curvature();
    if (k == 0) return Tangent::Zero(ambient_);
    return k * (inner(p, y, z) * x - inner(p, x, z) * y);
}

Mat Manifold::curvature_op(const Frame& u, const Vec& a, const Vec& b) const {
    (void)u;
    double k = curvature();
    if (k == 0) return Mat::Zero(dim_, dim_);
    // Frame-free on constant curvature: u^{-1} R(ua, ub) u = k (a b^T - b a^T).
    return k * (a * b.transpose() - b * a.transpose());
}

Tangent Manifold::ricci(const Frame& u, const Tangent& v) const {
    Tangent out = Tangent::Zero(ambient_);
    for (int i = 0; i < dim_; ++i) {
        Tangent e = u.columns.col(i);
        out += riemann(u.base, v, e, e);
    }
    return out;
}

Tangent Manifold::ricci(const Point& p, const Tangent& v) const { return ricci(tangent_frame(p), v); }

Mat Manifold::ricci_matrix(const Frame& u) const {
    Mat r(dim_, dim_);
    for (int j = 0; j < dim_; ++j) r.col(j) = frame_coords(u, ricci(u, u.columns.col(j)));
    return r;
}

double Manifold::scalar_curvature(const Point& p) const {
    Frame u = tangent_frame(p);
    double s = 0;
    for (int i = 0; i < dim_; ++i) s += inner(p, ricci(u, u.columns.col(i)), u.columns.col(i));
    return s;
}

Tangent Manifold::grad_scalar(const Point&) const { return Tangent::Zero(ambient_); }

double Manifold::exp_jacobian(double r) const {
    if (dim_ == 1) return 1.0;
    switch (kind_) {
        case ManifoldKind::Sphere: return std::pow(sinc(r / radius_), dim_ - 1);
        case ManifoldKind::Hyperbolic: return std::pow(sinhc(r / radius_), dim_ - 1);
        default: return 1.0;
    }
}

Point Manifold::random_point(Rng& rng, double spread) const {
    switch (kind_) {
        case ManifoldKind::Sphere: return retract(gaussian_vec(rng, ambient_));
        case ManifoldKind::Torus: {
            Point p(dim_);
            for (int k = 0; k < dim_; ++k) p[k] = periods_[k] * uniform01(rng);
            return p;
        }
        default: {
            Frame u = tangent_frame(origin());
            return exp(origin(), u.from_frame((spread * radius_) * gaussian_vec(rng, dim_)));
        }
    }
}

Frame Manifold::random_frame(const Point& p, Rng& rng) const {
    Frame u = tangent_frame(p);
    // Random orthogonal matrix from QR of a Gaussian matrix, sign-fixed.
    Eigen::MatrixXd g(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) g(i, j) = gaussian_vec(rng, 1)[0];
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim_; ++j)
        if (r(j, j) < 0) q.col(j) *= -1;
    u.columns = u.columns * Mat(q);
    return u;
}

}  // namespace pathheat
