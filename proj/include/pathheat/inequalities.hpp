#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pathheat/functionals.hpp"

namespace pathheat {

// K throughout is the constant with Ric >= -K.
double lsi_constant(double K);
double lsi_c0(double K);
// (e^K - 1 - K) / K^2.
double lsi_exp_term(double K);
double gourcy_wu_constant(double K);

struct EinsteinConstant {
    double value = 0;
    double a0 = 0;
    double sum_abs_a = 0;
    // Bound on the dropped tail of sum |A_k|, and its effect on the value.
    double tail_bound = 0;
    double value_error = 0;
    int terms = 0;
};
double einstein_a(double K, int k);
double einstein_b(double K, int k);
EinsteinConstant einstein_lsi_constant(double K, int d, int terms = 10000);

struct GradientConstants {
    double c1 = 0;
    double c2n = 0;
};
GradientConstants gradient_constants(double K, double T, int n);

struct ConstantReport {
    double K = 0;
    int d = 0;
    double T = 1;
    int n = 1;
    double C = 0;
    double C0 = 0;
    double Ctilde = 0;
    bool ctilde_first_branch = true;
    EinsteinConstant einstein;
    GradientConstants gradient;
};
ConstantReport constant_report(double K, int d, double T, int n, int terms = 10000);

// M_k at times k dt solving dM/dt = -1/2 M Ric(t), M_0 = I, by RK4 with
// Ric linearly interpolated between samples.
std::vector<Mat> ricci_flow_matrix(const std::vector<Mat>& ric, double dt);
// max over s < tau on the grid of |M_s^{-1} M_tau| - e^{K (tau - s)/2}.
double ricci_flow_bound_excess(const std::vector<Mat>& M, double dt, double K);

// A smooth test function on the ambient space with its Euclidean gradient.
struct TestFunction {
    std::string name;
    std::function<double(const Point&)> f;
    std::function<Vec(const Point&)> grad;
};
// linear: <a, x>; square: <a, x>^2; exp: e^{<a, x>}.
TestFunction test_function(const std::string& kind, const Vec& a);

struct GradIneqReport {
    double lhs = 0;
    double rhs = 0;
    double margin = 0;
    // Change of the margin between two quadrature resolutions.
    double quad_error = 0;
};
// |int_{T2}^{T1} grad p_s f(y) ds| against int_{T2}^{T1} e^{Ks/2} p_s|grad f|(y) ds
// on S^2 (heat-kernel quadrature) or R^1, R^2 (Gaussian quadrature).
GradIneqReport gradient_ineq_check(const Manifold& m, const TestFunction& f, double T1, double T2, const Point& y,
                                   double K);

struct LsiReport {
    double entropy = 0;
    // 2 C(K) times the Dirichlet energy of the normalized F.
    double energy_term = 0;
    double slack = 0;
    double stderr_ = 0;
    double C = 0;
};
// With half = true the Dirichlet energy is 1/2 E|DF|^2; otherwise E|DF|^2.
LsiReport lsi_empirical(const Manifold& m, const CylinderFunction& F, double K, std::size_t N, int steps,
                        std::uint64_t seed, bool half = true);

// Ricci lower bound constant of the shipped constant-curvature manifolds.
double ricci_lower_k(const Manifold& m);

}  // namespace pathheat
