#include "pathheat/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "pathheat/errors.hpp"
#include "pathheat/jacobi.hpp"

namespace pathheat {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + where + it.key() + "'");
}

template <class T>
void read(const json& j, const std::string& key, const std::string& where, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("bad value for '" + where + key + "'");
    }
}

}  // namespace

RunConfig config_from_json(const json& j) {
    RunConfig c;
    check_keys(j, "", {"manifold", "n", "delta", "dynamics", "sampler", "functionals", "directions", "K", "out",
                       "seed", "threads"});
    if (j.contains("manifold")) {
        const json& m = j["manifold"];
        check_keys(m, "manifold.", {"kind", "dim", "radius", "periods"});
        read(m, "kind", "manifold.", c.manifold.kind);
        read(m, "dim", "manifold.", c.manifold.dim);
        read(m, "radius", "manifold.", c.manifold.radius);
        read(m, "periods", "manifold.", c.manifold.periods);
    }
    read(j, "n", "", c.n);
    if (j.contains("delta")) {
        const json& d = j["delta"];
        if (d.is_string() && d.get<std::string>() == "auto") {
            c.delta.reset();
        } else if (d.is_number()) {
            c.delta = d.get<double>();
        } else {
            throw ConfigError("bad value for 'delta': expected a number or \"auto\"");
        }
    }
    if (j.contains("dynamics")) {
        const json& d = j["dynamics"];
        check_keys(d, "dynamics.", {"variant", "dt", "t_end", "save_every", "substeps", "modes"});
        read(d, "variant", "dynamics.", c.dynamics.variant);
        read(d, "dt", "dynamics.", c.dynamics.dt);
        read(d, "t_end", "dynamics.", c.dynamics.t_end);
        read(d, "save_every", "dynamics.", c.dynamics.save_every);
        read(d, "substeps", "dynamics.", c.dynamics.substeps);
        read(d, "modes", "dynamics.", c.dynamics.modes);
    }
    if (j.contains("sampler")) {
        const json& s = j["sampler"];
        check_keys(s, "sampler.", {"N", "burn_in", "samples", "chains", "thin", "steps"});
        read(s, "N", "sampler.", c.sampler.N);
        read(s, "burn_in", "sampler.", c.sampler.burn_in);
        read(s, "samples", "sampler.", c.sampler.samples);
        read(s, "chains", "sampler.", c.sampler.chains);
        read(s, "thin", "sampler.", c.sampler.thin);
        read(s, "steps", "sampler.", c.sampler.steps);
    }
    read(j, "functionals", "", c.functionals);
    read(j, "directions", "", c.directions);
    if (j.contains("K")) {
        double k = 0;
        read(j, "K", "", k);
        c.K = k;
    }
    read(j, "out", "", c.out);
    read(j, "seed", "", c.seed);
    read(j, "threads", "", c.threads);
    validate(c);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

json to_json(const RunConfig& c) {
    json j;
    j["manifold"] = {{"kind", c.manifold.kind}, {"dim", c.manifold.dim}, {"radius", c.manifold.radius},
                     {"periods", c.manifold.periods}};
    j["n"] = c.n;
    if (c.delta) {
        j["delta"] = *c.delta;
    } else {
        j["delta"] = "auto";
    }
    j["dynamics"] = {{"variant", c.dynamics.variant}, {"dt", c.dynamics.dt},          {"t_end", c.dynamics.t_end},
                     {"save_every", c.dynamics.save_every}, {"substeps", c.dynamics.substeps},
                     {"modes", c.dynamics.modes}};
    j["sampler"] = {{"N", c.sampler.N},           {"burn_in", c.sampler.burn_in}, {"samples", c.sampler.samples},
                    {"chains", c.sampler.chains}, {"thin", c.sampler.thin},       {"steps", c.sampler.steps}};
    j["functionals"] = c.functionals;
    j["directions"] = c.directions;
    if (c.K) {
        j["K"] = *c.K;
    } else {
        j["K"] = nullptr;
    }
    j["out"] = c.out;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j;
}

void validate(const RunConfig& c) {
    static const std::set<std::string> kinds = {"euclidean", "torus", "circle", "sphere", "hyperbolic"};
    if (!kinds.count(c.manifold.kind)) throw ConfigError("unknown manifold kind '" + c.manifold.kind + "'");
    if (c.manifold.kind != "torus" && c.manifold.kind != "circle" && c.manifold.dim < 1)
        throw ConfigError("manifold.dim must be positive");
    if (!(c.manifold.radius > 0)) throw ConfigError("manifold.radius must be positive");
    if (c.n < 1) throw ConfigError("n must be at least 1");
    if (c.delta && !(*c.delta > 0)) throw ConfigError("delta must be positive");
    static const std::set<std::string> variants = {"full", "sigma", "flat_dn", "flat_dd"};
    if (!variants.count(c.dynamics.variant)) throw ConfigError("unknown dynamics.variant '" + c.dynamics.variant + "'");
    if (!(c.dynamics.dt > 0)) throw ConfigError("dynamics.dt must be positive");
    if (!(c.dynamics.t_end >= 0)) throw ConfigError("dynamics.t_end must be non-negative");
    if (c.dynamics.save_every < 0) throw ConfigError("dynamics.save_every must be non-negative");
    if (c.dynamics.substeps < 1) throw ConfigError("dynamics.substeps must be positive");
    if (c.dynamics.modes < 1) throw ConfigError("dynamics.modes must be positive");
    if (c.sampler.N < 2) throw ConfigError("sampler.N must be at least 2");
    if (c.sampler.chains < 1 || c.sampler.samples < 1 || c.sampler.burn_in < 0 || c.sampler.thin < 1)
        throw ConfigError("sampler: chains, samples and thin must be positive");
    if (c.sampler.steps < 1) throw ConfigError("sampler.steps must be positive");
    if (c.threads < 0) throw ConfigError("threads must be non-negative");
    if (c.K && !std::isfinite(*c.K)) throw ConfigError("K must be finite");
}

Manifold make_manifold(const ManifoldSpec& s) {
    if (s.kind == "euclidean") return Manifold::euclidean(s.dim);
    if (s.kind == "sphere") return Manifold::sphere(s.dim, s.radius);
    if (s.kind == "hyperbolic") return Manifold::hyperbolic(s.dim, s.radius);
    if (s.kind == "circle") return Manifold::circle(s.periods.empty() ? 2 * std::numbers::pi * s.radius : s.periods[0]);
    if (s.kind == "torus") {
        if (s.periods.empty()) throw ConfigError("manifold.periods is required for a torus");
        return Manifold::torus(s.periods);
    }
    throw ConfigError("unknown manifold kind '" + s.kind + "'");
}

ManifoldSpec parse_manifold(const std::string& text) {
    ManifoldSpec s;
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
    if (parts.empty()) throw ConfigError("empty manifold spec");
    s.kind = parts[0];
    try {
        if (s.kind == "torus" || s.kind == "circle") {
            if (parts.size() > 1) {
                std::stringstream ps(parts[1]);
                for (std::string p; std::getline(ps, p, ',');) s.periods.push_back(std::stod(p));
            }
            s.dim = s.kind == "circle" ? 1 : static_cast<int>(s.periods.size());
        } else {
            if (parts.size() > 1) s.dim = std::stoi(parts[1]);
            if (parts.size() > 2) s.radius = std::stod(parts[2]);
        }
    } catch (const std::exception&) {
        throw ConfigError("bad manifold spec '" + text + "'");
    }
    if (parts.size() > 3) throw ConfigError("bad manifold spec '" + text + "'");
    RunConfig probe;
    probe.manifold = s;
    validate(probe);
    return s;
}

double resolve_delta(const RunConfig& c, const Manifold& m) {
    if (!c.delta) return default_delta(m);
    require_admissible(m, *c.delta);
    return *c.delta;
}

std::uint64_t default_seed(std::uint64_t fallback) {
    const char* env = std::getenv("PATHHEAT_SEED");
    if (!env || !*env) return fallback;
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string("PATHHEAT_SEED is not an unsigned integer: '") + env + "'");
    }
}

}  // namespace pathheat
