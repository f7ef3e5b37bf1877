#pragma once

#include <string>
#include <vector>

#include "pathheat/linalg.hpp"
#include "pathheat/rng.hpp"

namespace pathheat {

enum class ManifoldKind { Euclidean, Torus, Sphere, Hyperbolic };

// Points and tangent vectors are ambient coordinate vectors: R^{d+1} for the
// sphere, the Minkowski hyperboloid <x,x>_L = -R^2 with x_0 > 0, angle vectors
// for the flat torus. A tangent vector's base point is the point argument
// passed alongside it.
using Point = Vec;
using Tangent = Vec;

// Orthonormal tangent frame: ambient x d matrix whose columns span T_pM.
struct Frame {
    Point base;
    Mat columns;

    Tangent from_frame(const Vec& a) const { return columns * a; }
};

class Manifold {
public:
    static Manifold euclidean(int d);
    static Manifold torus(std::vector<double> periods);
    static Manifold circle(double circumference);
    static Manifold sphere(int d, double radius = 1.0);
    static Manifold hyperbolic(int d, double radius = 1.0);

    ManifoldKind kind() const { return kind_; }
    int dim() const { return dim_; }
    int ambient_dim() const { return ambient_; }
    double radius() const { return radius_; }
    const std::vector<double>& periods() const { return periods_; }
    // Constant sectional curvature.
    double curvature() const;
    double kappa0() const;
    double inj_radius() const;
    std::string name() const;

    bool contains(const Point& p, double tol = 1e-12) const;
    void check_point(const Point& p) const;
    bool is_tangent(const Point& p, const Tangent& v, double tol = 1e-10) const;

    double inner(const Point& p, const Tangent& v, const Tangent& w) const;
    double norm(const Point& p, const Tangent& v) const;
    Tangent project_tangent(const Point& p, const Vec& ambient) const;
    // Riemannian gradient of a function whose ambient Euclidean gradient is `dual`.
    Tangent gradient(const Point& p, const Vec& dual) const;
    Point retract(const Vec& ambient) const;
    Point origin() const;
    Frame tangent_frame(const Point& p) const;
    // u^{-1} v: components of v in the frame.
    Vec frame_coords(const Frame& u, const Tangent& v) const;

    double distance(const Point& p, const Point& q) const;
    Point exp(const Point& p, const Tangent& v) const;
    Tangent log(const Point& p, const Point& q) const;
    Tangent transport(const Point& p, const Point& q, const Tangent& v) const;
    Frame transport(const Frame& u, const Point& q) const;

    // R(X,Y)Z with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
    Tangent riemann(const Point& p, const Tangent& x, const Tangent& y,
                    const Tangent& z) const;
    Mat curvature_op(const Frame& u, const Vec& a, const Vec& b) const;
    Tangent ricci(const Point& p, const Tangent& v) const;
    Tangent ricci(const Frame& u, const Tangent& v) const;
    // Ricci in frame coordinates.
    Mat ricci_matrix(const Frame& u) const;
    double scalar_curvature(const Point& p) const;
    Tangent grad_scalar(const Point& p) const;

    // Density of exp_p pulled back to T_pM at |v| = r, relative to Lebesgue.
    double exp_jacobian(double r) const;

    Point random_point(Rng& rng, double spread = 1.0) const;
    Frame random_frame(const Point& p, Rng& rng) const;

    bool operator==(const Manifold& o) const;

private:
    Manifold(ManifoldKind kind, int dim, int ambient, double radius,
             std::vector<double> periods);

    double minkowski(const Vec& v, const Vec& w) const;

    ManifoldKind kind_;
    int dim_;
    int ambient_;
    double radius_;
    std::vector<double> periods_;
};

const char* kind_name(ManifoldKind k);

}  // namespace pathheat
