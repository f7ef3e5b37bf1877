#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pathheat/dynamics.hpp"
#include "pathheat/stats.hpp"

namespace pathheat {

// g(s, x) with its ambient gradient; the tangential part is taken on use.
struct InnerTerm {
    std::function<double(double, const Point&)> g;
    std::function<Vec(double, const Point&)> grad;
    // Negative: trapezoid integral over [0, 1]. Otherwise evaluation at the
    // grid time `at`.
    double at = -1;
};

// F(gamma) = f(I_1, ..., I_m).
struct CylinderFunction {
    std::string name;
    std::function<double(const Eigen::VectorXd&)> f;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_f;
    std::vector<InnerTerm> terms;
};

// h: [0, 1] -> R^d with h(0) = 0.
struct DirectionField {
    std::string name;
    std::function<Vec(double)> h;
    std::function<Vec(double)> dh;
    bool loop = false;
};

// Trapezoid weights of the grid.
std::vector<double> grid_weights(const Partition& part);

Eigen::VectorXd inner_values(const CylinderFunction& F, const DiscretePath& path);
double eval_cylinder(const CylinderFunction& F, const DiscretePath& path);

// DF(s_i) in frame coordinates, i = 0..n. A point evaluation at s_j shows up
// as a spike of mass one at j, i.e. divided by the trapezoid weight there.
std::vector<Vec> l2_gradient(const Manifold& m, const CylinderFunction& F, const DiscretePath& path,
                             const FramePath& frames);

// sum_i w_i <DF(s_i), h(s_i)>.
double directional_derivative(const Manifold& m, const CylinderFunction& F, const DiscretePath& path,
                              const FramePath& frames, const DirectionField& h);

// Central difference of F along x_i -> exp(x_i, tau u_i h(s_i)).
double directional_derivative_fd(const Manifold& m, const CylinderFunction& F, const DiscretePath& path,
                                 const FramePath& frames, const DirectionField& h, double tau = 1e-4);

// 1/2 sum_i w_i |DF(s_i)|^2 for one path.
double energy_density(const Manifold& m, const CylinderFunction& F, const DiscretePath& path,
                      const FramePath& frames);
Estimate dirichlet_energy(const Manifold& m, const CylinderFunction& F, const std::vector<DiscretePath>& paths,
                          const std::vector<FramePath>& frames);

// sum_i <(h(s_i) - h(s_{i-1}))/dt + 1/2 Ric_{u(s_{i-1})} h(s_{i-1}), dB_i>.
double beta_h(const Manifold& m, const HorizontalBrownian& hb, const DirectionField& h, bool use_ricci = true);

struct IbpReport {
    Estimate lhs;
    Estimate rhs;
    // Stderr of the paired difference.
    double stderr_ = 0;
    double z = 0;
};
IbpReport ibp_check(const Manifold& m, const CylinderFunction& F, const DirectionField& h, std::size_t N,
                    int steps, std::uint64_t seed);

// Several (F, h) pairs over the same draws.
std::vector<IbpReport> ibp_check(const Manifold& m, const std::vector<CylinderFunction>& Fs,
                                 const std::vector<DirectionField>& hs, std::size_t N, int steps,
                                 std::uint64_t seed);

struct QvReport {
    double realized = 0;
    double predicted = 0;
    double ratio = 0;
    long steps = 0;
};
// u(x) = sum_i <c_i, x_i> along a trajectory of the discretized heat flow
// over [0, t_end]. Realized: sum of squared martingale increments
// du - Au dt. Predicted: (1/eps) sum_i |P_{x_i} c_i|^2 dt.
QvReport qv_check(const Manifold& m, SheState state, const SheSettings& s, double t_end,
                  const std::vector<Vec>& c, Rng& rng);

// Built-in library: ambient_coord(j, axis), time_integral(axis),
// squared_integral(axis), each optionally wrapped as sin(...) or exp(...).
CylinderFunction builtin_functional(const std::string& spec, const Partition& part);
// linear(a): s e_a; sine(a): sin(pi s / 2) e_a; bump(a): sin(pi s) e_a.
DirectionField builtin_direction(const std::string& spec, int d);

}  // namespace pathheat
