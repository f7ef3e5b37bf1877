#include "pathheat/measures.hpp"

#include <algorithm>
#include <cmath>

#include "pathheat/dynamics.hpp"
#include "pathheat/errors.hpp"
#include "pathheat/heat_kernel.hpp"
#include "pathheat/parallel.hpp"
#include "pathheat/rng.hpp"

namespace pathheat {

namespace {

constexpr std::size_t kBlock = 4096;

struct Chain {
    std::vector<Point> x;
    std::vector<Tangent> drift;
    double energy = 0;
};

// Energy and the simple drift X^{beta0} = grad E / (4 eps); false if some
// segment is not shorter than delta.
bool evaluate(const Manifold& m, Chain& c, double eps, double delta) {
    int n = static_cast<int>(c.x.size()) - 1;
    std::vector<Tangent> fwd(n + 1), back(n + 1);
    c.energy = 0;
    for (int i = 1; i <= n; ++i) {
        double r = m.distance(c.x[i - 1], c.x[i]);
        if (!(r < delta)) return false;
        c.energy += r * r / eps;
        back[i] = m.log(c.x[i], c.x[i - 1]);
        if (i > 1) fwd[i - 1] = m.log(c.x[i - 1], c.x[i]);
    }
    c.drift.assign(n + 1, Tangent::Zero(m.ambient_dim()));
    for (int i = 1; i <= n; ++i) {
        Tangent s = -back[i];
        if (i < n) s -= fwd[i];
        c.drift[i] = s / (2 * eps * eps);
    }
    return true;
}

DiscretePath to_path(const Chain& c, const Partition& part, double delta) {
    DiscretePath p;
    p.nodes = c.x;
    p.partition = part;
    p.delta = delta;
    return p;
}

Chain initial_chain(const Manifold& m, const Partition& part, double delta, Rng& rng) {
    Chain c;
    c.x.push_back(m.origin());
    double sd = std::sqrt(part.eps);
    for (int i = 1; i <= part.n; ++i) {
        for (;;) {
            Vec v = gaussian_vec(rng, m.dim()) * sd;
            if (v.norm() < std::min(delta, 0.99 * m.inj_radius())) {
                c.x.push_back(m.exp(c.x.back(), m.tangent_frame(c.x.back()).from_frame(v)));
                break;
            }
        }
    }
    if (!evaluate(m, c, part.eps, delta)) throw SamplerError("could not place an initial path inside H^delta");
    return c;
}

struct ChainResult {
    std::vector<DiscretePath> paths;
    std::vector<double> energies;
    long accepted = 0, proposed = 0, outside = 0;
    double step = 0;
};

ChainResult run_chain(const Manifold& m, const Partition& part, double delta, const ChainConfig& cfg, Rng rng) {
    const double eps = part.eps;
    const int n = part.n;
    Chain cur = initial_chain(m, part, delta, rng);
    double log_h = std::log(cfg.step > 0 ? cfg.step : 0.5 * eps * eps);
    ChainResult out;
    Chain prop;
    auto log_q = [&](const std::vector<Tangent>& v, const std::vector<Tangent>& drift, double h) {
        double s = 0;
        for (int i = 1; i <= n; ++i) s += -(v[i] + h * drift[i]).squaredNorm() * eps / (2 * h) -
                                          std::log(m.exp_jacobian(v[i].norm()));
        return s;
    };
    const int total = cfg.burn_in + cfg.samples * cfg.thin;
    std::vector<Tangent> v(n + 1), w(n + 1);
    for (int it = 0; it < total; ++it) {
        const bool burning = it < cfg.burn_in;
        double h = std::exp(log_h);
        prop.x = cur.x;
        bool valid = true;
        for (int i = 1; i <= n && valid; ++i) {
            Vec xi = gaussian_vec(rng, m.dim());
            v[i] = -h * cur.drift[i] + std::sqrt(h / eps) * m.tangent_frame(cur.x[i]).from_frame(xi);
            if (!(m.norm(cur.x[i], v[i]) < m.inj_radius())) valid = false;
            else prop.x[i] = m.exp(cur.x[i], v[i]);
        }
        double accept = 0;
        bool moved = false;
        if (valid && evaluate(m, prop, eps, delta)) {
            for (int i = 1; i <= n; ++i) w[i] = m.log(prop.x[i], cur.x[i]);
            double la = -0.5 * (prop.energy - cur.energy) + log_q(w, prop.drift, h) - log_q(v, cur.drift, h);
            accept = la >= 0 ? 1.0 : std::exp(la);
            if (uniform01(rng) < accept) {
                std::swap(cur, prop);
                moved = true;
            }
        } else if (!burning) {
            ++out.outside;
        }
        if (burning) {
            log_h += (accept - cfg.target_accept) / std::pow(it + 10.0, 0.6);
            continue;
        }
        ++out.proposed;
        if (moved) ++out.accepted;
        if ((it - cfg.burn_in) % cfg.thin == 0) {
            out.paths.push_back(to_path(cur, part, delta));
            out.energies.push_back(cur.energy);
        }
    }
    out.step = std::exp(log_h);
    return out;
}

double weight_of(const Manifold& m, const std::vector<double>& radii, double delta) {
    double w = 1;
    for (double r : radii) {
        if (!(r < delta)) return 0;
        w *= m.exp_jacobian(r);
    }
    return w;
}

}  // namespace

double measure_delta(const Manifold& m, const Partition&) { return 0.9 * m.inj_radius(); }

PathEnsemble nu_sample(const Manifold& m, const Partition& part, double delta, const ChainConfig& cfg,
                       std::uint64_t seed) {
    if (cfg.chains < 1 || cfg.samples < 1 || cfg.thin < 1 || cfg.burn_in < 0)
        throw ConfigError("chain config needs chains, samples, thin >= 1 and burn_in >= 0");
    std::vector<ChainResult> res(cfg.chains);
    parallel_for(cfg.chains, [&](std::size_t c) { res[c] = run_chain(m, part, delta, cfg, make_stream(seed, c)); });
    PathEnsemble e;
    e.sampler = "mala";
    e.seed = seed;
    e.chains = cfg.chains;
    long accepted = 0, proposed = 0, outside = 0;
    std::vector<std::vector<double>> traces;
    for (auto& r : res) {
        accepted += r.accepted;
        proposed += r.proposed;
        outside += r.outside;
        e.step += r.step / cfg.chains;
        e.ess += effective_sample_size(r.energies);
        traces.push_back(r.energies);
        for (auto& p : r.paths) e.paths.push_back(std::move(p));
    }
    e.acceptance = proposed ? static_cast<double>(accepted) / proposed : 0;
    e.outside_fraction = proposed ? static_cast<double>(outside) / proposed : 0;
    e.rhat = cfg.chains > 1 ? gelman_rubin(traces) : 1.0;
    if (e.acceptance < 0.1 || e.acceptance > 0.9)
        throw SamplerError("MALA acceptance rate " + std::to_string(e.acceptance) + " outside [0.1, 0.9] after tuning");
    return e;
}

Estimate ensemble_mean(const PathEnsemble& e, const PathFunctional& f) {
    std::vector<double> vals(e.paths.size());
    for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = f(e.paths[k]);
    Estimate est = mean_estimate(vals);
    if (e.chains < 1 || vals.size() < 4) return est;
    std::size_t len = vals.size() / e.chains;
    double ess = 0;
    for (int c = 0; c < e.chains; ++c) {
        std::vector<double> chain(vals.begin() + c * len, vals.begin() + (c + 1) * len);
        ess += effective_sample_size(chain);
    }
    if (ess > 0 && ess < static_cast<double>(vals.size()))
        est.stderr_ *= std::sqrt(static_cast<double>(vals.size()) / ess);
    return est;
}

PathEnsemble weighted_sample(const Manifold& m, const Partition& part, double delta, std::size_t N,
                             std::uint64_t seed, bool keep_paths) {
    PathEnsemble e;
    e.sampler = "importance";
    e.seed = seed;
    e.chains = 0;
    e.weights.assign(N, 0.0);
    if (keep_paths) e.paths.resize(N);
    const double sd = std::sqrt(part.eps);
    const double reach = std::min(delta, m.inj_radius());
    std::size_t blocks = (N + kBlock - 1) / kBlock;
    parallel_for(blocks, [&](std::size_t b) {
        Rng rng = make_stream(seed, b);
        std::vector<double> radii(part.n);
        for (std::size_t k = b * kBlock; k < std::min(N, (b + 1) * kBlock); ++k) {
            DiscretePath p;
            p.partition = part;
            p.delta = delta;
            p.nodes.push_back(m.origin());
            bool inside = true;
            for (int i = 1; i <= part.n; ++i) {
                Vec v = gaussian_vec(rng, m.dim()) * sd;
                radii[i - 1] = v.norm();
                if (!(radii[i - 1] < reach)) inside = false;
                p.nodes.push_back(m.exp(p.nodes.back(), m.tangent_frame(p.nodes.back()).from_frame(v)));
            }
            e.weights[k] = inside ? weight_of(m, radii, delta) : 0.0;
            if (keep_paths) e.paths[k] = std::move(p);
        }
    });
    std::size_t zero = std::count(e.weights.begin(), e.weights.end(), 0.0);
    e.outside_fraction = N ? static_cast<double>(zero) / N : 0;
    double s1 = 0, s2 = 0;
    for (double w : e.weights) {
        s1 += w;
        s2 += w * w;
    }
    e.ess = s2 > 0 ? s1 * s1 / s2 : 0;
    return e;
}

MassEstimate weighted_expectation(const Manifold& m, const Partition& part, double delta, std::size_t N,
                                  std::uint64_t seed, const PathFunctional& f) {
    if (N < 2) throw ConfigError("importance sampling needs N >= 2");
    const double sd = std::sqrt(part.eps);
    const double reach = std::min(delta, m.inj_radius());
    std::size_t blocks = (N + kBlock - 1) / kBlock;
    std::vector<RunningStats> wf(blocks), ww(blocks);
    std::vector<double> w2(blocks, 0.0);
    std::vector<std::size_t> outside(blocks, 0);
    parallel_for(blocks, [&](std::size_t b) {
        Rng rng = make_stream(seed, b);
        std::vector<double> radii(part.n);
        DiscretePath p;
        p.partition = part;
        p.delta = delta;
        for (std::size_t k = b * kBlock; k < std::min(N, (b + 1) * kBlock); ++k) {
            p.nodes.assign(1, m.origin());
            bool inside = true;
            for (int i = 1; i <= part.n; ++i) {
                Vec v = gaussian_vec(rng, m.dim()) * sd;
                radii[i - 1] = v.norm();
                if (!(radii[i - 1] < reach)) inside = false;
                p.nodes.push_back(m.exp(p.nodes.back(), m.tangent_frame(p.nodes.back()).from_frame(v)));
            }
            double w = inside ? weight_of(m, radii, delta) : 0.0;
            if (w == 0) ++outside[b];
            ww[b].add(w);
            w2[b] += w * w;
            wf[b].add(w == 0 ? 0.0 : w * f(p));
        }
    });
    RunningStats all, wsum;
    double sq = 0;
    std::size_t out = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        all.merge(wf[b]);
        wsum.merge(ww[b]);
        sq += w2[b];
        out += outside[b];
    }
    MassEstimate est;
    est.value = all.mean();
    est.stderr_ = all.stderr_mean();
    est.n = part.n;
    est.eps = part.eps;
    est.manifold = m.name();
    double s1 = wsum.mean() * static_cast<double>(N);
    est.ess = sq > 0 ? s1 * s1 / sq : 0;
    est.outside_fraction = static_cast<double>(out) / N;
    if (est.ess < 0.01 * N)
        throw SamplerError("importance weights degenerate: ESS " + std::to_string(est.ess) + " < 0.01 N");
    return est;
}

MassEstimate nu_total_mass(const Manifold& m, const Partition& part, double delta, std::size_t N,
                           std::uint64_t seed) {
    return weighted_expectation(m, part, delta, N, seed, [](const DiscretePath&) { return 1.0; });
}

double richardson(const std::vector<int>& ns, const std::vector<double>& values) {
    if (ns.size() != values.size() || ns.empty()) throw DomainError("richardson: size mismatch");
    if (ns.size() == 1) return values[0];
    std::size_t k = ns.size() - 1;
    double r = static_cast<double>(ns[k]) / ns[k - 1];
    return (r * values[k] - values[k - 1]) / (r - 1);
}

ConvergenceStudy convergence_study(const Manifold& m, const PathFunctional& f, const std::vector<int>& ns,
                                   std::size_t N, std::uint64_t seed, double reference) {
    ConvergenceStudy study;
    std::vector<double> vals;
    for (int n : ns) {
        auto part = Partition::uniform(n);
        auto est = weighted_expectation(m, part, measure_delta(m, part), N, seed + static_cast<std::uint64_t>(n), f);
        ConvergenceRow row{n, est.value, est.stderr_, reference, 0};
        row.gap = reference != 0 ? std::abs(est.value - reference) / std::abs(reference) : std::abs(est.value);
        study.rows.push_back(row);
        vals.push_back(est.value);
    }
    study.extrapolated = richardson(ns, vals);
    return study;
}

double weighted_wiener_reference(const Manifold& m, const std::function<double(const Point&)>& g) {
    double tilt = std::exp(-m.scalar_curvature(m.origin()) / 6.0);
    if (m.kind() == ManifoldKind::Sphere && m.dim() == 2) return tilt * sphere_expectation(m, 1.0, m.origin(), g);
    throw UnsupportedFeature("Wiener reference by quadrature is available on S^2 only");
}

WienerEstimate wiener_expectation(const Manifold& m, const Partition& part, double delta, const PathFunctional& f,
                                  std::size_t N, std::uint64_t seed, int substeps) {
    std::size_t blocks = (N + kBlock - 1) / kBlock;
    std::vector<RunningStats> acc(blocks);
    std::vector<long> drawn(blocks, 0), rejected(blocks, 0);
    parallel_for(blocks, [&](std::size_t b) {
        Rng rng = make_stream(seed, b);
        for (std::size_t k = b * kBlock; k < std::min(N, (b + 1) * kBlock); ++k) {
            auto s = brownian_path_sample(m, part, delta, rng, substeps);
            drawn[b] += s.drawn;
            rejected[b] += s.rejected;
            acc[b].add(f(s.path));
        }
    });
    RunningStats all;
    long d = 0, r = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        all.merge(acc[b]);
        d += drawn[b];
        r += rejected[b];
    }
    WienerEstimate out{all.estimate(), d ? static_cast<double>(r) / d : 0.0};
    if (out.rejection_rate > 0.5) throw ConfigError("Brownian sampler rejects more than half of the increments");
    return out;
}

}  // namespace pathheat
