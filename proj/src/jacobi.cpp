#include "pathheat/jacobi.hpp"

#include <cmath>
#include <numbers>

#include "pathheat/errors.hpp"
#include "pathheat/stats.hpp"

namespace pathheat {

DeltaAdmissibility admissibility(double kappa0, double delta) {
    DeltaAdmissibility d;
    d.kappa0 = kappa0;
    d.delta = delta;
    double kd2 = kappa0 == 0 ? 0.0 : kappa0 * delta * delta;
    d.sup_bound_ok = kappa0 == 0 || std::cosh(std::sqrt(kappa0) * delta) * kd2 < 1.0;
    d.expansion_ok = kd2 < 1.0 / 3.0;
    return d;
}

DeltaAdmissibility admissibility(const Manifold& m, double delta) {
    return admissibility(m.kappa0(), delta);
}

double default_delta(const Manifold& m) {
    double cap = 0.9 * m.inj_radius();
    double k = m.kappa0();
    if (k == 0) return cap;
    auto good = [k](double d) {
        double kd2 = k * d * d;
        return std::cosh(std::sqrt(k) * d) * kd2 < 0.99 && kd2 < 0.99 / 3.0;
    };
    double lo = 0, hi = 1.0 / std::sqrt(k);
    while (good(hi)) hi *= 2;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (good(mid) ? lo : hi) = mid;
    }
    return std::min(cap, lo);
}

void require_admissible(const Manifold& m, double delta) {
    auto a = admissibility(m, delta);
    if (!a.ok())
        throw AdmissibilityError("delta = " + std::to_string(delta) + " violates the curvature conditions on " +
                                 m.name());
}

namespace {

Mat sine_series(const Mat& a0, double r) {
    int d = static_cast<int>(a0.rows());
    Mat term = r * Mat::Identity(d, d);
    Mat sum = term;
    double r2 = r * r;
    for (int n = 1; n < 200; ++n) {
        term = (term * a0) * (r2 / ((2.0 * n) * (2.0 * n + 1)));
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-15 * sum.cwiseAbs().maxCoeff()) break;
    }
    return sum;
}

Mat invert_d0(const Mat& d0) {
    Eigen::FullPivLU<Mat> lu(d0);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-300)
        throw NumericalError("degenerate Jacobi interval: D0 is singular");
    return lu.inverse();
}

Mat jacobi_a(const Manifold& m, const Frame& u, const Vec& bprime) {
    int d = m.dim();
    Mat a(d, d);
    for (int c = 0; c < d; ++c) {
        Vec e = Vec::Unit(d, c);
        a.col(c) = m.curvature_op(u, bprime, e) * bprime;
    }
    return a;
}

}  // namespace

Mat jacobi_series(const Mat& a0, double eps, double r) {
    return sine_series(a0, r) * invert_d0(sine_series(a0, eps));
}

Point Segment::point_at(const Manifold& m, double r) const { return m.exp(start, (r / eps) * velocity); }

Frame Segment::frame_at(const Manifold& m, double r) const {
    if (r == 0) return frame;
    return m.transport(frame, point_at(m, r));
}

Segment segment(const Manifold&, const DiscretePath& path, const FramePath& frames,
                const AntiDevelopment& b, int i) {
    Segment s;
    s.i = i;
    s.eps = path.partition.eps;
    s.start = path.nodes[i - 1];
    s.frame = frames[i - 1];
    s.velocity = s.frame.from_frame(b.db(i));
    s.bprime = b.db(i) / s.eps;
    return s;
}

ChebyshevBvp::ChebyshevBvp(const std::function<Mat(double)>& a, const std::function<Mat(double)>& f,
                           double eps, int rows, int cols, int order) {
    const int n = order;
    Eigen::VectorXd x(n + 1);
    for (int k = 0; k <= n; ++k) x[k] = std::cos(std::numbers::pi * k / n);
    Eigen::MatrixXd dx(n + 1, n + 1);
    auto cw = [n](int k) { return (k == 0 || k == n) ? 2.0 : 1.0; };
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            if (i == j) continue;
            double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            dx(i, j) = cw(i) / cw(j) * sign / (x[i] - x[j]);
        }
        dx(i, i) = 0;
        dx(i, i) = -dx.row(i).sum();
    }
    // r = eps (1 - x) / 2, so d/dr = -(2/eps) d/dx.
    Eigen::MatrixXd d2 = (4.0 / (eps * eps)) * (dx * dx);
    nodes_.resize(n + 1);
    for (int k = 0; k <= n; ++k) nodes_[k] = 0.5 * eps * (1 - x[k]);

    const int m = n - 1;
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(m * rows, m * rows);
    Eigen::MatrixXd rhs(m * rows, cols);
    std::vector<Mat> ak(n + 1), fk(n + 1);
    for (int k = 1; k < n; ++k) {
        ak[k] = a(nodes_[k]);
        fk[k] = f(nodes_[k]);
    }
    for (int k = 1; k < n; ++k) {
        for (int l = 1; l < n; ++l)
            lhs.block((k - 1) * rows, (l - 1) * rows, rows, rows) =
                d2(k, l) * Eigen::MatrixXd::Identity(rows, rows);
        lhs.block((k - 1) * rows, (k - 1) * rows, rows, rows) -= Eigen::MatrixXd(ak[k]);
        rhs.block((k - 1) * rows, 0, rows, cols) = Eigen::MatrixXd(fk[k]);
    }
    Eigen::MatrixXd sol = lhs.partialPivLu().solve(rhs);
    values_.assign(n + 1, Mat::Zero(rows, cols));
    for (int k = 1; k < n; ++k) values_[k] = sol.block((k - 1) * rows, 0, rows, cols);

    residual_ = 0;
    for (int k = 1; k < n; ++k) {
        Mat acc = Mat::Zero(rows, cols);
        for (int l = 0; l <= n; ++l) acc += d2(k, l) * values_[l];
        acc -= ak[k] * values_[k] + fk[k];
        residual_ = std::max(residual_, acc.cwiseAbs().maxCoeff());
    }
    bary_.resize(n + 1);
    for (int k = 0; k <= n; ++k) bary_[k] = ((k % 2) ? -1.0 : 1.0) / cw(k);
}

Mat ChebyshevBvp::operator()(double r) const {
    Mat num = Mat::Zero(values_[0].rows(), values_[0].cols());
    double den = 0;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        double diff = r - nodes_[k];
        if (diff == 0) return values_[k];
        double w = bary_[k] / diff;
        num += w * values_[k];
        den += w;
    }
    return num / den;
}

JacobiInterval::JacobiInterval(const Manifold& m, const Segment& seg, const JacobiOptions& opt)
    : eps_(seg.eps), dim_(m.dim()) {
    build([&](double r) { return jacobi_a(m, seg.frame_at(m, r), seg.bprime); }, opt);
}

JacobiInterval::JacobiInterval(const std::function<Mat(double)>& a_of_r, double eps, const JacobiOptions& opt)
    : eps_(eps), dim_(static_cast<int>(a_of_r(0).rows())) {
    build(a_of_r, opt);
}

Mat JacobiInterval::series(double r) const { return sine_series(a0_, r) * d0_inv_; }

void JacobiInterval::build(const std::function<Mat(double)>& a_of_r, const JacobiOptions& opt) {
    a0_ = a_of_r(0);
    d0_inv_ = invert_d0(sine_series(a0_, eps_));
    // The series solves the frozen problem exactly; the true-ODE defect is
    // (A(r) - A0) J(r).
    const int probes = 9;
    double defect = 0;
    std::vector<Mat> a_probe(probes);
    for (int k = 0; k < probes; ++k) {
        double r = 0.5 * eps_ * (1 - std::cos(std::numbers::pi * k / (probes - 1)));
        a_probe[k] = a_of_r(r);
        defect = std::max(defect, ((a_probe[k] - a0_) * series(r)).cwiseAbs().maxCoeff());
    }
    residual_ = defect * eps_ * eps_;
    if (residual_ > 1e-2 * opt.residual_tol || opt.force_correction) {
        correction_.emplace(
            a_of_r, [&](double r) -> Mat { return (a_of_r(r) - a0_) * series(r); }, eps_, dim_, dim_,
            opt.collocation_order);
        residual_ = correction_->residual() * eps_ * eps_;
        if (residual_ > opt.residual_tol)
            throw NumericalError("Jacobi defect correction did not reach the residual tolerance");
    }
}

Mat JacobiInterval::operator()(double r) const {
    if (r <= 0) return Mat::Zero(dim_, dim_);
    if (r >= eps_) return Mat::Identity(dim_, dim_);
    Mat j = series(r);
    if (correction_) j += (*correction_)(r);
    return j;
}

Vec JacobiBasisField::at(double s) const {
    int d = static_cast<int>(a0.rows());
    if (s <= s_start) return Vec::Zero(d);
    if (s > s_end + 1e-12) throw DomainError("Jacobi basis field is only materialized up to s_i");
    double local = s - s_start;
    double step = r.back() / (r.size() - 1);
    std::size_t k = std::min<std::size_t>(r.size() - 2, static_cast<std::size_t>(local / step));
    double t = (local - r[k]) / step;
    return (1 - t) * values[k] + t * values[k + 1];
}

double JacobiBasisField::sup_norm() const {
    double s = 0;
    for (const auto& v : values) s = std::max(s, v.norm());
    return s;
}

JacobiBasisField jacobi_basis(const Manifold& m, const DiscretePath& path, const FramePath& frames, int a,
                              int i, int samples, const JacobiOptions& opt) {
    if (i < 1 || i > path.n()) throw DomainError("jacobi_basis: interval index out of range");
    if (a < 0 || a >= m.dim()) throw DomainError("jacobi_basis: direction index out of range");
    require_admissible(m, path.delta);
    AntiDevelopment b = anti_development(m, path, frames);
    Segment seg = segment(m, path, frames, b, i);
    JacobiInterval jac(m, seg, opt);
    JacobiBasisField f;
    f.a = a;
    f.i = i;
    f.s_start = path.partition.s(i - 1);
    f.s_end = path.partition.s(i);
    f.a0 = jac.a0();
    f.residual = jac.residual();
    f.corrected = jac.corrected();
    double eps = path.partition.eps;
    double scale = 1.0 / std::sqrt(eps);
    for (int k = 0; k < samples; ++k) {
        double r = eps * k / (samples - 1);
        f.r.push_back(r);
        f.values.push_back(jac(r).col(a) * scale);
    }
    f.values.front().setZero();
    f.values.back() = Vec::Unit(m.dim(), a) * scale;
    return f;
}

ExpansionTerm jacobi_expansion(const Manifold& m, const Frame& u0, const Vec& db, double eps, double r, int a) {
    int d = m.dim();
    Mat x(d, d);
    for (int c = 0; c < d; ++c) x.col(c) = m.curvature_op(u0, db, Vec::Unit(d, c)) * db;
    Mat id = Mat::Identity(d, d);
    Mat main = (r * id + x * (r * r * r / (6 * eps * eps))) * (id - x / 6.0);
    ExpansionTerm t;
    t.main = std::pow(eps, -1.5) * main.col(a);
    t.scale = std::pow(db.norm(), 3) / std::sqrt(eps);
    return t;
}

RemainderFit expansion_remainder_fit(const Manifold& m, double eps, double lo, double hi, int points) {
    RemainderFit fit;
    Point o = m.origin();
    Frame u0 = m.tangent_frame(o);
    int d = m.dim();
    Vec dir = Vec::Zero(d);
    dir[0] = std::cos(0.3);
    if (d > 1) dir[1] = std::sin(0.3);
    std::vector<double> lx, ly;
    for (int p = 0; p < points; ++p) {
        double nb = lo * std::pow(hi / lo, points > 1 ? double(p) / (points - 1) : 0.0);
        Vec db = nb * dir;
        Segment seg;
        seg.i = 1;
        seg.eps = eps;
        seg.start = o;
        seg.frame = u0;
        seg.velocity = u0.from_frame(db);
        seg.bprime = db / eps;
        JacobiInterval jac(m, seg);
        double rem = 0, scale = 0;
        for (int a = 0; a < d; ++a) {
            for (int k = 1; k <= 32; ++k) {
                double r = eps * k / 32.0;
                ExpansionTerm t = jacobi_expansion(m, u0, db, eps, r, a);
                Vec h = jac(r).col(a) / std::sqrt(eps);
                rem = std::max(rem, (h - t.main).norm());
                scale = t.scale;
            }
        }
        fit.db_norms.push_back(nb);
        fit.remainders.push_back(rem);
        fit.constant = std::max(fit.constant, rem / scale);
        lx.push_back(std::log(nb));
        ly.push_back(std::log(std::max(rem, 1e-300)));
    }
    fit.exponent = points > 1 ? fit_slope(lx, ly) : 0.0;
    return fit;
}

double jacobi_sup_bound(double kappa0, double delta, double eps) {
    return 2.0 / std::sqrt(eps) * std::cosh(std::sqrt(kappa0) * delta);
}

Mat q_operator(const Manifold& m, const DiscretePath& path, const FramePath& frames, const AntiDevelopment& b,
               const SegmentField& x, int j, int order) {
    int d = m.dim();
    Mat q = Mat::Zero(d, d);
    for (int k = 1; k <= j; ++k) {
        Segment seg = segment(m, path, frames, b, k);
        q += integrate_segment(
            seg.eps,
            [&](double r) -> Mat { return m.curvature_op(seg.frame_at(m, r), seg.bprime, x(k, r)); }, order);
    }
    return q;
}

}  // namespace pathheat
