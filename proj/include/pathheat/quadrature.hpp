#pragma once

#include <vector>

namespace pathheat {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1]; cached, safe to call from any thread.
const GaussRule& gauss_legendre(int n);

// The same rule mapped to [a, b].
GaussRule gauss_legendre(int n, double a, double b);

template <class F>
double integrate(const GaussRule& rule, double a, double b, F&& f) {
    double h = 0.5 * (b - a), m = 0.5 * (a + b), s = 0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * f(m + h * rule.nodes[k]);
    return h * s;
}

}  // namespace pathheat
