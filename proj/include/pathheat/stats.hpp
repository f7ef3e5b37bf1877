#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pathheat {

struct Estimate {
    double mean = 0;
    double stderr_ = 0;
    std::size_t n = 0;
};

// Welford accumulator.
class RunningStats {
public:
    void add(double x);
    void merge(const RunningStats& o);
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const;
    double stderr_mean() const;
    Estimate estimate() const { return {mean_, stderr_mean(), n_}; }

private:
    std::size_t n_ = 0;
    double mean_ = 0;
    double m2_ = 0;
};

Estimate mean_estimate(const std::vector<double>& xs);

// Covariance estimate of paired samples with the stderr of the product mean.
Estimate covariance_estimate(const std::vector<double>& x, const std::vector<double>& y);

// Asymptotic Kolmogorov-Smirnov p-value for statistic D at sample size n.
double ks_pvalue(double d, std::size_t n);

// One-sample KS statistic against a continuous CDF.
double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf);

// Two-sample KS statistic and p-value.
double ks_two_sample(std::vector<double> a, std::vector<double> b, double* pvalue = nullptr);

// Upper tail of the chi-square distribution.
double chi2_sf(double x, double dof);

double normal_cdf(double x);

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// Initial-positive-sequence effective sample size of a chain.
double effective_sample_size(const std::vector<double>& chain);

// Potential scale reduction factor across equal-length chains.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

}  // namespace pathheat
