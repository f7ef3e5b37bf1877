#include "pathheat/functionals.hpp"

#include <cmath>
#include <numbers>
#include <regex>
#include <sstream>

#include "pathheat/errors.hpp"
#include "pathheat/parallel.hpp"

namespace pathheat {

namespace {

constexpr std::size_t kBlock = 256;

int grid_index(const Partition& part, double at) {
    int i = static_cast<int>(std::lround(at * part.n));
    if (i < 0 || i > part.n || std::abs(part.s(i) - at) > 1e-12)
        throw DomainError("point evaluation at s = " + std::to_string(at) + " is not on the grid");
    return i;
}

}  // namespace

std::vector<double> grid_weights(const Partition& part) {
    std::vector<double> w(part.n + 1, part.eps);
    w.front() = w.back() = 0.5 * part.eps;
    return w;
}

Eigen::VectorXd inner_values(const CylinderFunction& F, const DiscretePath& path) {
    const auto& part = path.partition;
    auto w = grid_weights(part);
    Eigen::VectorXd I(F.terms.size());
    for (std::size_t j = 0; j < F.terms.size(); ++j) {
        const auto& t = F.terms[j];
        if (t.at >= 0) {
            int i = grid_index(part, t.at);
            I[j] = t.g(part.s(i), path.nodes[i]);
            continue;
        }
        double s = 0;
        for (int i = 0; i <= part.n; ++i) s += w[i] * t.g(part.s(i), path.nodes[i]);
        I[j] = s;
    }
    return I;
}

double eval_cylinder(const CylinderFunction& F, const DiscretePath& path) { return F.f(inner_values(F, path)); }

std::vector<Vec> l2_gradient(const Manifold& m, const CylinderFunction& F, const DiscretePath& path,
                             const FramePath& frames) {
    const auto& part = path.partition;
    auto w = grid_weights(part);
    Eigen::VectorXd df = F.grad_f(inner_values(F, path));
    std::vector<Vec> out(part.n + 1, Vec::Zero(m.dim()));
    auto coords = [&](const InnerTerm& t, int i) {
        const Point& x = path.nodes[i];
        return m.frame_coords(frames[i], m.gradient(x, t.grad(part.s(i), x)));
    };
    for (std::size_t j = 0; j < F.terms.size(); ++j) {
        const auto& t = F.terms[j];
        if (df[j] == 0) continue;
        if (t.at >= 0) {
            int i = grid_index(part, t.at);
            out[i] += df[j] / w[i] * coords(t, i);
            continue;
        }
        for (int i = 0; i <= part.n; ++i) out[i] += df[j] * coords(t, i);
    }
    return out;
}

double directional_derivative(const Manifold& m, const CylinderFunction& F, const DiscretePath& path,
                              const FramePath& frames, const DirectionField& h) {
    auto grad = l2_gradient(m, F, path, frames);
    auto w = grid_weights(path.partition);
    double s = 0;
    for (int i = 0; i <= path.n(); ++i) s += w[i] * grad[i].dot(h.h(path.partition.s(i)));
    return s;
}

double directional_derivative_fd(const Manifold& m, const CylinderFunction& F, const DiscretePath& path,
                                 const FramePath& frames, const DirectionField& h, double tau) {
    DiscretePath plus = path, minus = path;
    for (int i = 0; i <= path.n(); ++i) {
        Tangent v = frames[i].from_frame(h.h(path.partition.s(i)));
        plus.nodes[i] = m.exp(path.nodes[i], tau * v);
        minus.nodes[i] = m.exp(path.nodes[i], -tau * v);
    }
    return (eval_cylinder(F, plus) - eval_cylinder(F, minus)) / (2 * tau);
}

double energy_density(const Manifold& m, const CylinderFunction& F, const DiscretePath& path,
                      const FramePath& frames) {
    auto grad = l2_gradient(m, F, path, frames);
    auto w = grid_weights(path.partition);
    double s = 0;
    for (int i = 0; i <= path.n(); ++i) s += w[i] * grad[i].squaredNorm();
    return 0.5 * s;
}

Estimate dirichlet_energy(const Manifold& m, const CylinderFunction& F, const std::vector<DiscretePath>& paths,
                          const std::vector<FramePath>& frames) {
    if (paths.size() != frames.size()) throw DomainError("dirichlet_energy: paths and frames differ in length");
    std::vector<double> vals(paths.size());
    for (std::size_t k = 0; k < paths.size(); ++k) vals[k] = energy_density(m, F, paths[k], frames[k]);
    return mean_estimate(vals);
}

double beta_h(const Manifold& m, const HorizontalBrownian& hb, const DirectionField& h, bool use_ricci) {
    const auto& part = hb.dev.path.partition;
    if (static_cast<int>(hb.dB.size()) != part.n)
        throw DomainError("beta_h needs the driving increments of the path");
    double dt = part.eps, s = 0;
    for (int i = 1; i <= part.n; ++i) {
        Vec h0 = h.h(part.s(i - 1));
        Vec v = (h.h(part.s(i)) - h0) / dt;
        if (use_ricci) v += 0.5 * m.ricci_matrix(hb.dev.frames[i - 1]) * h0;
        s += v.dot(hb.dB[i - 1]);
    }
    return s;
}

std::vector<IbpReport> ibp_check(const Manifold& m, const std::vector<CylinderFunction>& Fs,
                                 const std::vector<DirectionField>& hs, std::size_t N, int steps,
                                 std::uint64_t seed) {
    if (Fs.size() != hs.size()) throw ConfigError("ibp_check: functionals and directions differ in number");
    if (N < 2) throw ConfigError("ibp_check needs N >= 2");
    const std::size_t K = Fs.size();
    const std::size_t blocks = (N + kBlock - 1) / kBlock;
    std::vector<std::vector<RunningStats>> lhs(blocks, std::vector<RunningStats>(K)), rhs = lhs, diff = lhs;
    Frame u0 = m.tangent_frame(m.origin());
    double delta = 0.9 * m.inj_radius();
    parallel_for(blocks, [&](std::size_t b) {
        Rng rng = make_stream(seed, b);
        for (std::size_t k = b * kBlock; k < std::min(N, (b + 1) * kBlock); ++k) {
            auto hb = horizontal_brownian(m, u0, steps, delta, rng);
            for (std::size_t p = 0; p < K; ++p) {
                double l = directional_derivative(m, Fs[p], hb.dev.path, hb.dev.frames, hs[p]);
                double r = eval_cylinder(Fs[p], hb.dev.path) * beta_h(m, hb, hs[p]);
                lhs[b][p].add(l);
                rhs[b][p].add(r);
                diff[b][p].add(l - r);
            }
        }
    });
    std::vector<IbpReport> out(K);
    for (std::size_t p = 0; p < K; ++p) {
        RunningStats L, R, D;
        for (std::size_t b = 0; b < blocks; ++b) {
            L.merge(lhs[b][p]);
            R.merge(rhs[b][p]);
            D.merge(diff[b][p]);
        }
        out[p].lhs = L.estimate();
        out[p].rhs = R.estimate();
        out[p].stderr_ = D.stderr_mean();
        out[p].z = out[p].stderr_ > 0 ? D.mean() / out[p].stderr_ : 0.0;
    }
    return out;
}

IbpReport ibp_check(const Manifold& m, const CylinderFunction& F, const DirectionField& h, std::size_t N,
                    int steps, std::uint64_t seed) {
    return ibp_check(m, std::vector<CylinderFunction>{F}, std::vector<DirectionField>{h}, N, steps, seed)[0];
}

QvReport qv_check(const Manifold& m, SheState state, const SheSettings& s, double t_end, const std::vector<Vec>& c,
                  Rng& rng) {
    const int n = state.st.path.n();
    if (static_cast<int>(c.size()) != n + 1) throw ConfigError("qv_check: need one coefficient vector per grid point");
    const double eps = state.st.path.partition.eps;
    auto value = [&](const SheState& st) {
        double u = 0;
        for (int i = 1; i <= n; ++i) u += c[i].dot(st.st.path.nodes[i]);
        return u;
    };
    QvReport rep;
    long steps = std::lround(t_end / s.dt);
    for (long k = 0; k < steps; ++k) {
        double u0 = value(state), au = 0, rate = 0;
        for (int i = 1; i <= n; ++i) {
            au += c[i].dot(ito_drift(m, state, i));
            Tangent pc = m.gradient(state.st.path.nodes[i], c[i]);
            rate += m.inner(state.st.path.nodes[i], pc, pc) / eps;
        }
        she_advance(m, state, rng, s);
        double dm = value(state) - u0 - au * s.dt;
        rep.realized += dm * dm;
        rep.predicted += rate * s.dt;
    }
    rep.steps = steps;
    rep.ratio = rep.predicted > 0 ? rep.realized / rep.predicted : (rep.realized == 0 ? 1.0 : 0.0);
    return rep;
}

CylinderFunction builtin_functional(const std::string& spec, const Partition& part) {
    static const std::regex outer_re(R"(^\s*(sin|exp)\s*\((.*)\)\s*$)");
    static const std::regex inner_re(R"(^\s*(ambient_coord|time_integral|squared_integral)\s*\(([^)]*)\)\s*$)");
    std::smatch mo, mi;
    std::string outer, inner = spec;
    if (std::regex_match(spec, mo, outer_re)) {
        outer = mo[1];
        inner = mo[2];
    }
    if (!std::regex_match(inner, mi, inner_re)) throw ConfigError("unknown functional '" + spec + "'");
    std::vector<int> args;
    std::stringstream ss(mi[2].str());
    for (std::string tok; std::getline(ss, tok, ',');) {
        try {
            args.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw ConfigError("functional '" + spec + "': bad argument '" + tok + "'");
        }
    }
    const std::string kind = mi[1];
    std::size_t want = kind == "ambient_coord" ? 2 : 1;
    if (args.size() != want) throw ConfigError("functional '" + spec + "': expected " + std::to_string(want) + " arguments");
    int axis = args.back();
    if (axis < 0) throw ConfigError("functional '" + spec + "': negative axis");

    CylinderFunction F;
    F.name = spec;
    InnerTerm t;
    if (kind == "squared_integral") {
        t.g = [axis](double, const Point& x) { return x[axis] * x[axis]; };
        t.grad = [axis](double, const Point& x) {
            Vec g = Vec::Zero(x.size());
            g[axis] = 2 * x[axis];
            return g;
        };
    } else {
        t.g = [axis](double, const Point& x) { return x[axis]; };
        t.grad = [axis](double, const Point& x) {
            Vec g = Vec::Zero(x.size());
            g[axis] = 1;
            return g;
        };
    }
    if (kind == "ambient_coord") {
        if (args[0] < 0 || args[0] > part.n) throw ConfigError("functional '" + spec + "': grid index out of range");
        t.at = part.s(args[0]);
    }
    F.terms.push_back(t);
    if (outer == "sin") {
        F.f = [](const Eigen::VectorXd& I) { return std::sin(I[0]); };
        F.grad_f = [](const Eigen::VectorXd& I) { return Eigen::VectorXd::Constant(1, std::cos(I[0])); };
    } else if (outer == "exp") {
        F.f = [](const Eigen::VectorXd& I) { return std::exp(I[0]); };
        F.grad_f = [](const Eigen::VectorXd& I) { return Eigen::VectorXd::Constant(1, std::exp(I[0])); };
    } else {
        F.f = [](const Eigen::VectorXd& I) { return I[0]; };
        F.grad_f = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, 1.0); };
    }
    return F;
}

DirectionField builtin_direction(const std::string& spec, int d) {
    static const std::regex re(R"(^\s*(linear|sine|bump)\s*\(\s*(\d+)\s*\)\s*$)");
    std::smatch mt;
    if (!std::regex_match(spec, mt, re)) throw ConfigError("unknown direction '" + spec + "'");
    int a = std::stoi(mt[2]);
    if (a >= d) throw ConfigError("direction '" + spec + "': axis exceeds the dimension");
    const std::string kind = mt[1];
    DirectionField h;
    h.name = spec;
    auto unit = [a, d](double v) {
        Vec e = Vec::Zero(d);
        e[a] = v;
        return e;
    };
    const double pi = std::numbers::pi;
    if (kind == "linear") {
        h.h = [unit](double s) { return unit(s); };
        h.dh = [unit](double) { return unit(1); };
    } else if (kind == "sine") {
        h.h = [unit, pi](double s) { return unit(std::sin(0.5 * pi * s)); };
        h.dh = [unit, pi](double s) { return unit(0.5 * pi * std::cos(0.5 * pi * s)); };
    } else {
        h.h = [unit, pi](double s) { return unit(std::sin(pi * s)); };
        h.dh = [unit, pi](double s) { return unit(pi * std::cos(pi * s)); };
        h.loop = true;
    }
    return h;
}

}  // namespace pathheat
