#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pathheat/geometry.hpp"

namespace pathheat {

struct ManifoldSpec {
    std::string kind = "sphere";
    int dim = 2;
    double radius = 1.0;
    std::vector<double> periods;
};

struct DynamicsConfig {
    // full, sigma, flat_dn or flat_dd.
    std::string variant = "full";
    // In units of eps^2.
    double dt = 0.01;
    double t_end = 1.0;
    int save_every = 0;
    int substeps = 16;
    int modes = 256;
};

struct SamplerConfig {
    std::size_t N = 100000;
    int burn_in = 2000;
    int samples = 5000;
    int chains = 4;
    int thin = 1;
    int steps = 64;
};

struct RunConfig {
    ManifoldSpec manifold;
    int n = 16;
    // Empty means "auto".
    std::optional<double> delta;
    DynamicsConfig dynamics;
    SamplerConfig sampler;
    std::vector<std::string> functionals;
    std::vector<std::string> directions;
    std::optional<double> K;
    std::string out = "out";
    std::uint64_t seed = 0;
    int threads = 0;
};

// Unknown keys and wrong types raise ConfigError naming the key.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& c);
void validate(const RunConfig& c);

Manifold make_manifold(const ManifoldSpec& s);
// "sphere:2:1.5", "hyperbolic:2", "euclidean:3", "torus:1,2".
ManifoldSpec parse_manifold(const std::string& text);
double resolve_delta(const RunConfig& c, const Manifold& m);

// Seed from PATHHEAT_SEED if set, else `fallback`.
std::uint64_t default_seed(std::uint64_t fallback = 0);

}  // namespace pathheat
