#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "pathheat/pathgrid.hpp"
#include "pathheat/stats.hpp"

namespace pathheat {

using PathFunctional = std::function<double(const DiscretePath&)>;

struct PathEnsemble {
    std::vector<DiscretePath> paths;
    // Empty for an unweighted ensemble.
    std::vector<double> weights;
    std::string sampler;
    std::uint64_t seed = 0;
    // Paths are stored chain after chain, each chain of equal length.
    int chains = 1;
    double acceptance = 0;
    double ess = 0;
    double rhat = 0;
    double step = 0;
    // Fraction of proposals that left H^delta.
    double outside_fraction = 0;
};

struct ChainConfig {
    int chains = 4;
    int burn_in = 2000;
    int samples = 5000;
    int thin = 1;
    // Langevin step h; 0 starts from 0.5 eps^2 and tunes during burn-in.
    double step = 0;
    double target_accept = 0.57;
};

// Metropolis-adjusted Langevin chains on M^n targeting e^{-E/2} dVol
// restricted to H^delta, normalized. The proposal moves every x_i to
// exp(x_i, -h X^{beta0}_i + sqrt(h/eps) xi_i).
PathEnsemble nu_sample(const Manifold& m, const Partition& part, double delta, const ChainConfig& cfg,
                       std::uint64_t seed);

// Sample mean and stderr of f over an unweighted ensemble, the stderr
// inflated by the ensemble's effective sample size.
Estimate ensemble_mean(const PathEnsemble& e, const PathFunctional& f);

struct MassEstimate {
    double value = 0;
    double stderr_ = 0;
    int n = 0;
    double eps = 0;
    std::string manifold;
    double ess = 0;
    double outside_fraction = 0;
};

// Weighted draws from the sequential exp-Gaussian proposal; weight
// prod_i J(r_i) 1{r_i < delta} is the density of Z_P^{-1} e^{-E/2} dVol
// against the proposal.
PathEnsemble weighted_sample(const Manifold& m, const Partition& part, double delta, std::size_t N,
                             std::uint64_t seed, bool keep_paths = true);

// Weighted mean of f w; with f = 1 this is the total mass.
MassEstimate weighted_expectation(const Manifold& m, const Partition& part, double delta, std::size_t N,
                                  std::uint64_t seed, const PathFunctional& f);
MassEstimate nu_total_mass(const Manifold& m, const Partition& part, double delta, std::size_t N,
                           std::uint64_t seed);

// Richardson extrapolation assuming an O(1/n) leading error, from the two
// finest rows.
double richardson(const std::vector<int>& ns, const std::vector<double>& values);

struct ConvergenceRow {
    int n = 0;
    double estimate = 0;
    double stderr_ = 0;
    double reference = 0;
    double gap = 0;
};
struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double extrapolated = 0;
};

ConvergenceStudy convergence_study(const Manifold& m, const PathFunctional& f, const std::vector<int>& ns,
                                   std::size_t N, std::uint64_t seed, double reference);

// e^{-(1/6) int Scal} E_mu[g(gamma_1)] for single-time g, by heat-kernel quadrature.
double weighted_wiener_reference(const Manifold& m, const std::function<double(const Point&)>& g);

struct WienerEstimate {
    Estimate value;
    double rejection_rate = 0;
};
WienerEstimate wiener_expectation(const Manifold& m, const Partition& part, double delta, const PathFunctional& f,
                                  std::size_t N, std::uint64_t seed, int substeps = 16);

// delta used for measure computations: 0.9 inj.
double measure_delta(const Manifold& m, const Partition& part);

}  // namespace pathheat
