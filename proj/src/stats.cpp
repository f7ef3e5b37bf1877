#include "pathheat/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>

#include "pathheat/errors.hpp"

namespace pathheat {

void RunningStats::add(double x) {
    ++n_;
    double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    double n = static_cast<double>(n_ + o.n_);
    double d = o.mean_ - mean_;
    mean_ += d * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
}

double RunningStats::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double RunningStats::stderr_mean() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

Estimate mean_estimate(const std::vector<double>& xs) {
    RunningStats s;
    for (double x : xs) s.add(x);
    return s.estimate();
}

Estimate covariance_estimate(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t n = x.size();
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    RunningStats s;
    for (std::size_t k = 0; k < n; ++k) s.add((x[k] - mx) * (y[k] - my));
    Estimate e = s.estimate();
    e.mean *= static_cast<double>(n) / static_cast<double>(n - 1);
    return e;
}

double ks_pvalue(double d, std::size_t n) {
    double sn = std::sqrt(static_cast<double>(n));
    double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 0.2) return 1.0;
    double sum = 0, sign = 1;
    for (int k = 1; k <= 100; ++k) {
        double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    double n = static_cast<double>(xs.size()), d = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        double f = cdf(xs[k]);
        d = std::max({d, f - k / n, (k + 1) / n - f});
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b, double* pvalue) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0, na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    if (pvalue) {
        double ne = na * nb / (na + nb);
        *pvalue = ks_pvalue(d, static_cast<std::size_t>(std::max(1.0, std::round(ne))));
    }
    return d;
}

double chi2_sf(double x, double dof) {
    boost::math::chi_squared dist(dof);
    return boost::math::cdf(boost::math::complement(dist, std::max(0.0, x)));
}

double normal_cdf(double x) { return boost::math::cdf(boost::math::normal(), x); }

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw NumericalError("fit_slope needs two or more points");
    double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxy / sxx;
}

double effective_sample_size(const std::vector<double>& chain) {
    std::size_t n = chain.size();
    if (n < 4) return static_cast<double>(n);
    double m = std::accumulate(chain.begin(), chain.end(), 0.0) / n;
    double c0 = 0;
    for (double x : chain) c0 += (x - m) * (x - m);
    c0 /= n;
    if (c0 == 0) return static_cast<double>(n);
    auto rho = [&](std::size_t lag) {
        double c = 0;
        for (std::size_t k = 0; k + lag < n; ++k) c += (chain[k] - m) * (chain[k + lag] - m);
        return c / (n * c0);
    };
    double tau = 1.0;
    for (std::size_t lag = 1; lag + 1 < n; lag += 2) {
        double pair = rho(lag) + rho(lag + 1);
        if (pair <= 0) break;
        tau += 2 * pair;
    }
    return n / tau;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
    std::size_t m = chains.size();
    if (m < 2) return 1.0;
    std::size_t n = chains[0].size();
    std::vector<double> means(m), vars(m);
    for (std::size_t c = 0; c < m; ++c) {
        RunningStats s;
        for (double x : chains[c]) s.add(x);
        means[c] = s.mean();
        vars[c] = s.variance();
    }
    RunningStats between;
    for (double x : means) between.add(x);
    double b = n * between.variance();
    double w = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
    if (w == 0) return 1.0;
    double var_plus = (n - 1.0) / n * w + b / n;
    return std::sqrt(var_plus / w);
}

}  // namespace pathheat
