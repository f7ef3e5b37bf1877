#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pathheat/pathgrid.hpp"
#include "pathheat/quadrature.hpp"

namespace pathheat {

struct DeltaAdmissibility {
    double kappa0 = 0;
    double delta = 0;
    bool sup_bound_ok = false;  // cosh(sqrt(k0) d) k0 d^2 < 1
    bool expansion_ok = false;  // k0 d^2 < 1/3
    bool ok() const { return sup_bound_ok && expansion_ok; }
};

DeltaAdmissibility admissibility(double kappa0, double delta);
DeltaAdmissibility admissibility(const Manifold& m, double delta);

// Largest delta <= 0.9 inj with both conditions holding at 0.99 of their bounds.
double default_delta(const Manifold& m);

void require_admissible(const Manifold& m, double delta);

// B(r) D0^{-1} with B(r) = sum A0^n r^{2n+1}/(2n+1)! and D0 = B(eps).
Mat jacobi_series(const Mat& a0, double eps, double r);

// Geodesic segment i of a path: x_{i-1} -> x_i with the transported frame.
struct Segment {
    int i = 0;
    double eps = 0;
    Point start;
    Tangent velocity;  // ambient log_{x_{i-1}} x_i, traversed over local time [0, eps]
    Frame frame;       // u(s_{i-1})
    Vec bprime;        // db_i / eps

    Point point_at(const Manifold& m, double r) const;
    Frame frame_at(const Manifold& m, double r) const;
};

Segment segment(const Manifold& m, const DiscretePath& path, const FramePath& frames,
                const AntiDevelopment& b, int i);

// Chebyshev collocation solution of C'' = A(r) C + F(r) on [0, eps] with
// C(0) = C(eps) = 0, for matrix-valued C.
class ChebyshevBvp {
public:
    ChebyshevBvp(const std::function<Mat(double)>& a, const std::function<Mat(double)>& f,
                 double eps, int rows, int cols, int order = 24);
    Mat operator()(double r) const;
    const std::vector<double>& nodes() const { return nodes_; }
    // max_k |C'' - A C - F| at the collocation nodes
    double residual() const { return residual_; }

private:
    std::vector<double> nodes_;
    std::vector<double> bary_;
    std::vector<Mat> values_;
    double residual_ = 0;
};

struct JacobiOptions {
    double residual_tol = 1e-8;
    int collocation_order = 24;
    bool force_correction = false;
};

// Fundamental matrix of the Jacobi equation on one segment: h_{a,i}(s_{i-1}+r)
// = J(r) e_a / sqrt(eps) in the transported frame.
class JacobiInterval {
public:
    JacobiInterval(const Manifold& m, const Segment& seg, const JacobiOptions& opt = {});
    JacobiInterval(const std::function<Mat(double)>& a_of_r, double eps, const JacobiOptions& opt = {});

    Mat operator()(double r) const;
    const Mat& a0() const { return a0_; }
    double eps() const { return eps_; }
    bool corrected() const { return correction_.has_value(); }
    // Residual |J'' - A J| (scaled by eps^2) of the returned solution.
    double residual() const { return residual_; }

private:
    void build(const std::function<Mat(double)>& a_of_r, const JacobiOptions& opt);
    Mat series(double r) const;

    double eps_;
    int dim_;
    Mat a0_;
    Mat d0_inv_;
    std::optional<ChebyshevBvp> correction_;
    double residual_ = 0;
};

struct JacobiBasisField {
    int a = 0;
    int i = 0;
    double s_start = 0;
    double s_end = 0;
    Mat a0;
    std::vector<double> r;       // local sample times in [0, eps]
    std::vector<Vec> values;     // h(s_{i-1} + r) in the transported frame
    double residual = 0;
    bool corrected = false;
    // Value at global time s (zero before s_{i-1}; defined up to s_i only).
    Vec at(double s) const;
    double sup_norm() const;
};

JacobiBasisField jacobi_basis(const Manifold& m, const DiscretePath& path, const FramePath& frames,
                              int a, int i, int samples = 33, const JacobiOptions& opt = {});

// Small-increment main term for h_{a} at local time r, and the constant-free bound
// |db|^3 / sqrt(eps) against which the remainder is compared.
struct ExpansionTerm {
    Vec main;
    double scale;
};
ExpansionTerm jacobi_expansion(const Manifold& m, const Frame& u0, const Vec& db, double eps,
                                double r, int a);

struct RemainderFit {
    std::vector<double> db_norms;
    std::vector<double> remainders;
    double exponent = 0;
    double constant = 0;  // max remainder / (|db|^3 / sqrt(eps))
};
// Sweeps |db| geometrically over [lo, hi] along a fixed direction.
RemainderFit expansion_remainder_fit(const Manifold& m, double eps, double lo, double hi, int points);

// Sup bound (2/sqrt(eps)) cosh(sqrt(kappa0) delta).
double jacobi_sup_bound(double kappa0, double delta, double eps);

// Adaptive Gauss-Legendre over [0, eps]: doubles the order while two
// successive orders differ by more than tol.
template <class F>
auto integrate_segment(double eps, F&& f, int order = 8, double tol = 1e-9, int* used = nullptr) {
    auto run = [&](int n) {
        const GaussRule& g = gauss_legendre(n);
        double h = 0.5 * eps;
        auto acc = f(h * (g.nodes[0] + 1));
        acc *= g.weights[0];
        for (std::size_t k = 1; k < g.nodes.size(); ++k) acc += g.weights[k] * f(h * (g.nodes[k] + 1));
        acc *= h;
        return acc;
    };
    auto coarse = run(order);
    for (;;) {
        auto fine = run(2 * order);
        double diff = (fine - coarse).cwiseAbs().maxCoeff();
        order *= 2;
        coarse = fine;
        if (diff <= tol || order >= 128) break;
    }
    if (used) *used = order;
    return coarse;
}

// Field in frame coordinates on segment k at local time r.
using SegmentField = std::function<Vec(int k, double r)>;

// q_s(X) at s = s_j: sum over segments k <= j of int R_{u(r)}(gamma', X) dr.
Mat q_operator(const Manifold& m, const DiscretePath& path, const FramePath& frames,
               const AntiDevelopment& b, const SegmentField& x, int j, int order = 8);

}  // namespace pathheat
