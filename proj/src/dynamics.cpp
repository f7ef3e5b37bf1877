#include "pathheat/dynamics.hpp"

#include <cmath>
#include <numbers>

#include "pathheat/errors.hpp"

namespace pathheat {

namespace {

DriftField drift_at(const Manifold& m, const PathState& st, const SheSettings& s) {
    if (!s.drift) {
        DriftField f;
        f.eps = st.path.partition.eps;
        f.delta = st.path.delta;
        f.vectors.assign(st.path.n() + 1, Tangent::Zero(m.ambient_dim()));
        return f;
    }
    if (s.variant == SheVariant::Sigma) return drift_field_simple(m, st.path);
    return drift_field_full(m, st, s.drift_options);
}

// Noise columns at x_i applied to xi.
Tangent diffusion(const Manifold& m, const PathState& st, int i, const Vec& xi, SheVariant v) {
    double scale = 1.0 / std::sqrt(st.path.partition.eps);
    if (v == SheVariant::Sigma) return scale * m.project_tangent(st.path.nodes[i], xi);
    return scale * st.frames[i].from_frame(xi);
}

void check_cap(const SheState& state, double dt, const SheSettings& s) {
    double eps = state.st.path.partition.eps;
    if (dt > s.cap_factor * eps * eps * (1 + 1e-12))
        throw ConfigError("dt = " + std::to_string(dt) + " exceeds the stability cap " +
                          std::to_string(s.cap_factor) + " * eps^2");
}

void heun(const Manifold& m, SheState& state, double dt, Rng& rng, const SheSettings& s, SheVariant v,
          int level) {
    const PathState& x = state.st;
    const int n = x.path.n();
    const int width = v == SheVariant::Sigma ? m.ambient_dim() : m.dim();
    std::vector<Vec> xi(n + 1);
    for (int i = 1; i <= n; ++i)
        xi[i] = s.noise ? Vec(gaussian_vec(rng, width) * std::sqrt(dt)) : Vec(Vec::Zero(width));

    auto retry = [&](int interval) {
        if (level >= s.max_halvings)
            throw DeltaViolation("step left H^delta at segment " + std::to_string(interval) + " after " +
                                     std::to_string(level) + " halvings",
                                 interval);
        ++state.rejections;
        heun(m, state, 0.5 * dt, rng, s, v, level + 1);
        heun(m, state, 0.5 * dt, rng, s, v, level + 1);
    };

    std::vector<Vec> fx(n + 1), gx(n + 1);
    DiscretePath ypath = x.path;
    for (int i = 1; i <= n; ++i) {
        fx[i] = -state.drift.vectors[i];
        gx[i] = diffusion(m, x, i, xi[i], v);
        ypath.nodes[i] = m.retract(x.path.nodes[i] + fx[i] * dt + gx[i]);
    }
    if (int bad = first_violation(m, ypath)) return retry(bad);
    PathState y = path_state(m, ypath, x.frames[0]);
    DriftField fy = drift_at(m, y, s);

    DiscretePath zpath = x.path;
    for (int i = 1; i <= n; ++i) {
        Vec step = 0.5 * (fx[i] - fy.vectors[i]) * dt + 0.5 * (gx[i] + diffusion(m, y, i, xi[i], v));
        zpath.nodes[i] = m.retract(x.path.nodes[i] + step);
    }
    if (int bad = first_violation(m, zpath)) return retry(bad);
    state.st = path_state(m, zpath, x.frames[0]);
    state.drift = drift_at(m, state.st, s);
    state.t += dt;
}

}  // namespace

SheState she_init(const Manifold& m, const DiscretePath& path, const Frame& u0, const SheSettings& s) {
    if (s.variant == SheVariant::Sigma && m.kind() == ManifoldKind::Hyperbolic)
        throw UnsupportedFeature("projection noise needs a Euclidean embedding");
    SheState state;
    state.st = path_state(m, path, u0);
    state.drift = drift_at(m, state.st, s);
    return state;
}

void she_step(const Manifold& m, SheState& state, double dt, Rng& rng, const SheSettings& s) {
    check_cap(state, dt, s);
    heun(m, state, dt, rng, s, SheVariant::Full, 0);
}

void she_step_sigma(const Manifold& m, SheState& state, double dt, Rng& rng, const SheSettings& s) {
    check_cap(state, dt, s);
    heun(m, state, dt, rng, s, SheVariant::Sigma, 0);
}

void she_advance(const Manifold& m, SheState& state, Rng& rng, const SheSettings& s) {
    if (s.variant == SheVariant::Sigma)
        she_step_sigma(m, state, s.dt, rng, s);
    else
        she_step(m, state, s.dt, rng, s);
}

Vec ito_drift(const Manifold& m, const SheState& state, int i) {
    const Point& x = state.st.path.nodes[i];
    double eps = state.st.path.partition.eps;
    double r2 = m.radius() * m.radius();
    Vec lap = Vec::Zero(m.ambient_dim());
    if (m.kind() == ManifoldKind::Sphere) lap = -(m.dim() / r2) * x;
    if (m.kind() == ManifoldKind::Hyperbolic) lap = (m.dim() / r2) * x;
    return -state.drift.vectors[i] + lap / (2 * eps);
}

BrownianSample brownian_path_sample(const Manifold& m, const Partition& part, double delta, Rng& rng,
                                    int substeps) {
    if (substeps < 1) throw ConfigError("substeps must be at least 1");
    BrownianSample out;
    out.path.partition = part;
    out.path.delta = delta;
    out.path.nodes.push_back(m.origin());
    double h = std::sqrt(part.eps / substeps);
    for (int i = 1; i <= part.n; ++i) {
        const Point start = out.path.nodes.back();
        for (;;) {
            ++out.drawn;
            Point y = start;
            for (int k = 0; k < substeps; ++k) y = m.exp(y, m.tangent_frame(y).from_frame(h * gaussian_vec(rng, m.dim())));
            if (m.distance(start, y) < delta) {
                out.path.nodes.push_back(y);
                break;
            }
            ++out.rejected;
            if (out.drawn > 256 && out.rejection_rate() > 0.5)
                throw ConfigError("brownian_path_sample: more than half of the increments leave the delta ball; "
                                  "eps is too large for delta");
        }
    }
    return out;
}

HorizontalBrownian horizontal_brownian(const Manifold& m, const Frame& u0, int steps, double delta, Rng& rng) {
    if (steps < 1) throw ConfigError("horizontal_brownian needs at least one step");
    HorizontalBrownian hb;
    double sdt = std::sqrt(1.0 / steps);
    hb.dB.reserve(steps);
    for (int i = 0; i < steps; ++i) hb.dB.push_back(gaussian_vec(rng, m.dim()) * sdt);
    hb.dev = develop(m, u0, hb.dB, delta);
    return hb;
}

double FlatSpectralState::eigenvalue(int k) const {
    double w = basis == FlatBasis::DirichletNeumann ? (k + 0.5) * std::numbers::pi : (k + 1) * std::numbers::pi;
    return w * w;
}

double FlatSpectralState::basis_fn(int k, double s) const {
    return std::numbers::sqrt2 * std::sin(std::sqrt(eigenvalue(k)) * s);
}

Eigen::VectorXd FlatSpectralState::field(double s) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(modes.cols());
    for (int k = 0; k < K(); ++k) v += basis_fn(k, s) * modes.row(k).transpose();
    return v;
}

double FlatSpectralState::tail_bound() const {
    double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = basis == FlatBasis::DirichletNeumann ? 1.0 / (K() - 0.5) : 1.0 / K();
    return 2.0 * sum / pi2;
}

FlatSpectralState flat_init(FlatBasis basis, int modes, int d) {
    if (modes < 1 || d < 1) throw ConfigError("flat solver needs modes >= 1 and d >= 1");
    FlatSpectralState st;
    st.basis = basis;
    st.modes = Eigen::MatrixXd::Zero(modes, d);
    return st;
}

void flat_she_exact(FlatSpectralState& state, double dt, Rng& rng) {
    std::normal_distribution<double> normal;
    for (int k = 0; k < state.K(); ++k) {
        double lam = state.eigenvalue(k);
        double decay = std::exp(-0.5 * lam * dt);
        double sd = std::sqrt(-std::expm1(-lam * dt) / lam);
        for (int c = 0; c < state.modes.cols(); ++c) state.modes(k, c) = decay * state.modes(k, c) + sd * normal(rng);
    }
    state.t += dt;
}

double flat_covariance(const FlatSpectralState& state, double s, double s2) {
    double c = 0;
    for (int k = 0; k < state.K(); ++k) c += state.basis_fn(k, s) * state.basis_fn(k, s2) / state.eigenvalue(k);
    return c;
}

}  // namespace pathheat
