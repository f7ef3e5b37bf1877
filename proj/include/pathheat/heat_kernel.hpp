#pragma once

#include <functional>

#include "pathheat/geometry.hpp"

namespace pathheat {

// Transition density of Brownian motion (generator ½Δ) after time t, with
// respect to Riemannian volume.
double heat_kernel(const Manifold& m, double t, const Point& p, const Point& q);

// Same kernel as a function of geodesic distance (spheres) or of the
// coordinate difference (flat spaces, one coordinate at a time on a torus).
double sphere_heat_kernel(int d, double radius, double t, double theta);
double circle_heat_kernel(double period, double t, double x);

// Total volume of the compact instances.
double volume(const Manifold& m);

// E[f(B_t)] for Brownian motion on a sphere started at p, by product
// Gauss-Legendre quadrature in polar coordinates about p (d = 2 only).
double sphere_expectation(const Manifold& m, double t, const Point& p,
                          const std::function<double(const Point&)>& f, int n_theta = 96,
                          int n_phi = 128);

}  // namespace pathheat
