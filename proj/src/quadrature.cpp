#include "pathheat/quadrature.hpp"

#include <boost/math/special_functions/legendre.hpp>
#include <map>
#include <memory>
#include <mutex>

#include "pathheat/errors.hpp"

namespace pathheat {

namespace {

GaussRule build_rule(int n) {
    GaussRule r;
    auto zeros = boost::math::legendre_p_zeros<double>(n);
    for (double z : zeros) {
        double dp = boost::math::legendre_p_prime(n, z);
        double w = 2.0 / ((1 - z * z) * dp * dp);
        if (z == 0) {
            r.nodes.push_back(0);
            r.weights.push_back(w);
        } else {
            r.nodes.push_back(-z);
            r.weights.push_back(w);
            r.nodes.push_back(z);
            r.weights.push_back(w);
        }
    }
    return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw NumericalError("Gauss-Legendre order must be positive");
    static std::mutex mu;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussRule>(build_rule(n));
    return *slot;
}

GaussRule gauss_legendre(int n, double a, double b) {
    GaussRule r = gauss_legendre(n);
    double h = 0.5 * (b - a), m = 0.5 * (a + b);
    for (std::size_t k = 0; k < r.nodes.size(); ++k) {
        r.nodes[k] = m + h * r.nodes[k];
        r.weights[k] *= h;
    }
    return r;
}

}  // namespace pathheat
