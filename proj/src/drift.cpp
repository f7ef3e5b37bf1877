#include "pathheat/drift.hpp"

#include <cmath>
#include <numbers>

#include "pathheat/errors.hpp"
#include "pathheat/stats.hpp"

namespace pathheat {

PathState path_state(const Manifold& m, const DiscretePath& path, const Frame& u0) {
    PathState st{path, horizontal_lift(m, path, u0), {}};
    st.b = anti_development(m, st.path, st.frames);
    return st;
}

Vec curvature_correction(const Manifold& m, const PathState& st, int j, const DriftOptions& opt) {
    const int d = m.dim();
    if (m.curvature() == 0) return Vec::Zero(d);
    Segment seg = segment(m, st.path, st.frames, st.b, j);
    double eps = seg.eps;
    double scale = 1.0 / std::sqrt(eps);
    std::optional<JacobiInterval> jac;
    if (!opt.main_term_only) jac.emplace(m, seg, opt.jacobi);
    auto integrand = [&](double r) -> Vec {
        Frame u = seg.frame_at(m, r);
        Mat jr(d, d);
        if (jac) {
            jr = (*jac)(r);
        } else {
            for (int a = 0; a < d; ++a)
                jr.col(a) = jacobi_expansion(m, seg.frame, st.b.db(j), eps, r, a).main * std::sqrt(eps);
        }
        Vec c = Vec::Zero(d);
        for (int a1 = 0; a1 < d; ++a1) c += m.curvature_op(u, seg.bprime, jr.col(a1) * scale).col(a1);
        return c;
    };
    return integrate_segment(eps, integrand, opt.quadrature_order);
}

Vec beta_coefficients(const Manifold& m, const PathState& st, int j, const DriftOptions& opt) {
    double eps = st.path.partition.eps;
    Vec first = (st.b.db(j) - st.b.db(j + 1)) / (eps * std::sqrt(eps));
    return first + curvature_correction(m, st, j, opt);
}

double beta_coefficient(const Manifold& m, const DiscretePath& path, const FramePath& frames, int a, int j,
                        const DriftOptions& opt) {
    require_admissible(m, path.delta);
    if (j < 1 || j > path.n()) throw DomainError("beta_coefficient: grid index out of range");
    PathState st{path, frames, anti_development(m, path, frames)};
    return beta_coefficients(m, st, j, opt)[a];
}

DriftField drift_field_full(const Manifold& m, const PathState& st, const DriftOptions& opt) {
    require_admissible(m, st.path.delta);
    DriftField f;
    f.variant = DriftVariant::Full;
    f.eps = st.path.partition.eps;
    f.delta = st.path.delta;
    f.vectors.assign(st.path.n() + 1, Tangent::Zero(m.ambient_dim()));
    double pre = 0.5 / std::sqrt(f.eps);
    for (int i = 1; i <= st.path.n(); ++i)
        f.vectors[i] = st.frames[i].from_frame(pre * beta_coefficients(m, st, i, opt));
    return f;
}

DriftField drift_field_full(const Manifold& m, const DiscretePath& path, const FramePath& frames,
                            const DriftOptions& opt) {
    PathState st{path, frames, anti_development(m, path, frames)};
    return drift_field_full(m, st, opt);
}

DriftField drift_field_simple(const Manifold& m, const DiscretePath& path) {
    DriftField f;
    f.variant = DriftVariant::Simple;
    f.eps = path.partition.eps;
    f.delta = path.delta;
    f.vectors.assign(path.n() + 1, Tangent::Zero(m.ambient_dim()));
    double pre = 0.5 / (f.eps * f.eps);
    for (int i = 1; i <= path.n(); ++i) {
        Tangent v = -m.log(path.nodes[i], path.nodes[i - 1]);
        if (i < path.n()) v -= m.log(path.nodes[i], path.nodes[i + 1]);
        f.vectors[i] = pre * v;
    }
    return f;
}

SmoothCurve great_circle(const Manifold& m, double speed) {
    if (m.kind() != ManifoldKind::Sphere) throw UnsupportedFeature("great_circle needs a sphere");
    double R = m.radius();
    Point o = m.origin();
    Vec e = Vec::Unit(m.ambient_dim(), 1) * R;
    double w = speed / R;
    return {"great_circle",
            [=](double s) { return Point(std::cos(w * s) * o + std::sin(w * s) * e); },
            [=](double s) { return Vec(w * (-std::sin(w * s) * o + std::cos(w * s) * e)); },
            [=](double s) { return Vec(-w * w * (std::cos(w * s) * o + std::sin(w * s) * e)); }};
}

SmoothCurve latitude_circle(const Manifold& m, double theta, double turns) {
    if (m.kind() != ManifoldKind::Sphere) throw UnsupportedFeature("latitude_circle needs a sphere");
    double R = m.radius();
    int D = m.ambient_dim();
    Vec pole = Vec::Unit(D, D - 1) * R, a = Vec::Unit(D, 0) * R, b = Vec::Unit(D, 1) * R;
    double w = 2 * std::numbers::pi * turns, st = std::sin(theta), ct = std::cos(theta);
    return {"latitude_circle",
            [=](double s) { return Point(ct * pole + st * (std::cos(w * s) * a + std::sin(w * s) * b)); },
            [=](double s) { return Vec(st * w * (-std::sin(w * s) * a + std::cos(w * s) * b)); },
            [=](double s) { return Vec(-st * w * w * (std::cos(w * s) * a + std::sin(w * s) * b)); }};
}

SmoothCurve flat_sine(const Manifold& m, double amplitude) {
    if (m.kind() != ManifoldKind::Euclidean) throw UnsupportedFeature("flat_sine needs Euclidean space");
    int d = m.dim();
    const double pi = std::numbers::pi;
    return {"flat_sine",
            [=](double s) { return Point(Vec::Unit(d, 0) * (amplitude * std::sin(pi * s))); },
            [=](double s) { return Vec(Vec::Unit(d, 0) * (amplitude * pi * std::cos(pi * s))); },
            [=](double s) { return Vec(Vec::Unit(d, 0) * (-amplitude * pi * pi * std::sin(pi * s))); }};
}

SmoothCurve constant_curve(const Manifold& m) {
    Point o = m.origin();
    int D = m.ambient_dim();
    return {"constant", [=](double) { return o; }, [=](double) { return Vec(Vec::Zero(D)); },
            [=](double) { return Vec(Vec::Zero(D)); }};
}

Tangent continuum_drift(const Manifold& m, const SmoothCurve& c, double s) {
    Point p = c.x(s);
    Tangent v = m.project_tangent(p, c.dx(s));
    Tangent acc = m.project_tangent(p, c.ddx(s));
    return -0.5 * acc + 0.25 * m.ricci(p, v) - m.grad_scalar(p) / 12.0;
}

DiscretePath sample_curve(const Manifold& m, const SmoothCurve& c, int n, double delta) {
    auto part = Partition::uniform(n);
    std::vector<Point> pts;
    for (int i = 1; i <= n; ++i) pts.push_back(m.retract(c.x(part.s(i))));
    return make_path(m, m.retract(c.x(0)), pts, part, delta);
}

DriftLimitStudy drift_limit_study(const Manifold& m, const SmoothCurve& c, const std::vector<int>& ns,
                                  const DriftOptions& opt) {
    DriftLimitStudy study;
    double delta = default_delta(m);
    std::vector<double> lx, ly;
    for (int n : ns) {
        auto path = sample_curve(m, c, n, delta);
        auto st = path_state(m, path, m.tangent_frame(path.origin()));
        auto field = drift_field_full(m, st, opt);
        double err = 0;
        for (int i = 1; i < n; ++i) {
            Tangent diff = field.vectors[i] - continuum_drift(m, c, path.partition.s(i));
            err = std::max(err, m.norm(path.nodes[i], diff));
        }
        study.rows.push_back({n, 1.0 / n, err});
        if (err > 0) {
            lx.push_back(std::log(1.0 / n));
            ly.push_back(std::log(err));
        }
    }
    study.slope = lx.size() >= 2 ? fit_slope(lx, ly) : 0.0;
    return study;
}

}  // namespace pathheat
