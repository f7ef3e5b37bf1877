#pragma once

#include <functional>
#include <vector>

#include "pathheat/jacobi.hpp"

namespace pathheat {

enum class DriftVariant { Full, Simple };

struct DriftOptions {
    JacobiOptions jacobi;
    int quadrature_order = 8;
    // Replace the Jacobi field inside the q-integral by its small-increment main term.
    bool main_term_only = false;
};

// Vectors at x_0..x_n; entry 0 is zero since the origin is pinned.
struct DriftField {
    std::vector<Tangent> vectors;
    DriftVariant variant = DriftVariant::Full;
    double eps = 0;
    double delta = 0;
};

// Everything the drift needs about one path, computed once.
struct PathState {
    DiscretePath path;
    FramePath frames;
    AntiDevelopment b;
};
PathState path_state(const Manifold& m, const DiscretePath& path, const Frame& u0);

// sum_{a1} q(X^{h_{a1,j}}) e_{a1}: the curvature part of beta for all a at once.
Vec curvature_correction(const Manifold& m, const PathState& st, int j, const DriftOptions& opt = {});

// beta_P(h_{a,j}) for a = 0..d-1.
Vec beta_coefficients(const Manifold& m, const PathState& st, int j, const DriftOptions& opt = {});
double beta_coefficient(const Manifold& m, const DiscretePath& path, const FramePath& frames, int a, int j,
                        const DriftOptions& opt = {});

DriftField drift_field_full(const Manifold& m, const PathState& st, const DriftOptions& opt = {});
DriftField drift_field_full(const Manifold& m, const DiscretePath& path, const FramePath& frames,
                            const DriftOptions& opt = {});
DriftField drift_field_simple(const Manifold& m, const DiscretePath& path);

// A smooth curve with ambient first and second derivatives.
struct SmoothCurve {
    std::string name;
    std::function<Point(double)> x;
    std::function<Vec(double)> dx;
    std::function<Vec(double)> ddx;
};

SmoothCurve great_circle(const Manifold& m, double speed = 1.0);
// Circle at polar angle theta about the axis through e_{d}; starts on the
// e_0 meridian and turns through `turns` full revolutions over [0, 1].
SmoothCurve latitude_circle(const Manifold& m, double theta, double turns = 1.0);
// x(s) = amplitude sin(pi s) e_0 in flat space.
SmoothCurve flat_sine(const Manifold& m, double amplitude = 1.0);
SmoothCurve constant_curve(const Manifold& m);

// -1/2 D_s dgamma + 1/4 Ric(dgamma) - 1/12 grad Scal.
Tangent continuum_drift(const Manifold& m, const SmoothCurve& c, double s);

DiscretePath sample_curve(const Manifold& m, const SmoothCurve& c, int n, double delta);

struct DriftLimitRow {
    int n = 0;
    double eps = 0;
    double error = 0;
};
struct DriftLimitStudy {
    std::vector<DriftLimitRow> rows;
    double slope = 0;
};

// Sup over interior grid points i = 1..n-1 of |X^{beta_P}(s_i) - continuum|.
DriftLimitStudy drift_limit_study(const Manifold& m, const SmoothCurve& c, const std::vector<int>& ns,
                                  const DriftOptions& opt = {});

}  // namespace pathheat
