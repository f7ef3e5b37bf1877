#pragma once

#include <vector>

#include "pathheat/drift.hpp"
#include "pathheat/rng.hpp"

namespace pathheat {

enum class SheVariant { Full, Sigma };

struct SheSettings {
    SheVariant variant = SheVariant::Full;
    double dt = 0;
    // dt larger than cap_factor * eps^2 is refused.
    double cap_factor = 0.1;
    int max_halvings = 8;
    bool drift = true;
    bool noise = true;
    DriftOptions drift_options;
};

// Path, frames and clock of the approximating diffusion. The frame at the
// origin is fixed; the rest are re-transported after every accepted step.
struct SheState {
    PathState st;
    double t = 0;
    // Drift at the current path, kept so diagnostics need not recompute it.
    DriftField drift;
    int rejections = 0;
};

SheState she_init(const Manifold& m, const DiscretePath& path, const Frame& u0, const SheSettings& s);

// One Heun step of dx_i = sum_a X^{h_{a,i}} o dW^{a,i} - X^{beta}(x)_i dt.
// A step leaving H^delta is redone as two half steps with fresh noise.
void she_step(const Manifold& m, SheState& state, double dt, Rng& rng, const SheSettings& s);

// Same with the projection fields sigma_a(x) = P_x e_a and the simple drift.
void she_step_sigma(const Manifold& m, SheState& state, double dt, Rng& rng, const SheSettings& s);

// Dispatches on s.variant with dt = s.dt.
void she_advance(const Manifold& m, SheState& state, Rng& rng, const SheSettings& s);

// Drift of the generator applied to the ambient coordinate functions at x_i,
// i.e. the Ito drift: -X^{beta} plus (1/2eps) Delta of the coordinates.
Vec ito_drift(const Manifold& m, const SheState& state, int i);

// Geodesic random walk with `substeps` steps per grid interval; an interval
// whose aggregate leaves the delta ball is redrawn.
struct BrownianSample {
    DiscretePath path;
    long rejected = 0;
    long drawn = 0;
    double rejection_rate() const { return drawn ? static_cast<double>(rejected) / drawn : 0.0; }
};
BrownianSample brownian_path_sample(const Manifold& m, const Partition& part, double delta, Rng& rng,
                                    int substeps = 16);

// Horizontal Brownian motion on [0, 1] with `steps` Euler steps of the frame
// bundle SDE, returned with its driving increments dB_1..dB_steps.
struct HorizontalBrownian {
    Development dev;
    std::vector<Vec> dB;
};
HorizontalBrownian horizontal_brownian(const Manifold& m, const Frame& u0, int steps, double delta, Rng& rng);

// Flat Ornstein-Uhlenbeck modes of the path (Dirichlet-Neumann) or loop
// (Dirichlet-Dirichlet) heat equation.
enum class FlatBasis { DirichletNeumann, DirichletDirichlet };

struct FlatSpectralState {
    FlatBasis basis = FlatBasis::DirichletNeumann;
    // K x d mode coefficients.
    Eigen::MatrixXd modes;
    double t = 0;

    int K() const { return static_cast<int>(modes.rows()); }
    double eigenvalue(int k) const;
    double basis_fn(int k, double s) const;
    // Field value at s.
    Eigen::VectorXd field(double s) const;
    // Sum over dropped modes of phi_k(s)^2 / lambda_k, bounded uniformly in s.
    double tail_bound() const;
};

FlatSpectralState flat_init(FlatBasis basis, int modes, int d);
void flat_she_exact(FlatSpectralState& state, double dt, Rng& rng);
// Stationary covariance of the truncated field.
double flat_covariance(const FlatSpectralState& state, double s, double s2);

}  // namespace pathheat
