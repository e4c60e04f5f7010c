#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "etmc/sim.hpp"

namespace etmc {

/// Malformed or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PlantConfig {
    double a = 0;
    double c = 0;
    double M = 0;
    double B = 0;
    std::optional<double> L;
    std::optional<double> abar_factor;
    bool operator==(const PlantConfig&) const = default;
};

struct ChannelConfig {
    std::string layout = "rows";
    std::vector<Vector> P0;
    std::vector<Vector> P1;
    Vector e;
    bool operator==(const ChannelConfig&) const = default;
};

struct SimConfig {
    std::optional<double> x0;
    std::optional<double> x0_over_B;
    long horizon = 600;
    long trials = 1000;
    std::uint64_t seed = 1;
    std::string noise = "gaussian";
    /// Empty means uniform.
    Vector gamma0_dist;
    bool operator==(const SimConfig&) const = default;
};

struct OutputConfig {
    std::string directory = "out";
    std::vector<std::string> formats{"csv", "json"};
    bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
    PlantConfig plant;
    ChannelConfig channel;
    long D = 1;
    SimConfig sim;
    OutputConfig output;
    bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

PlantParams build_params(const RunConfig& cfg);
ChannelModel build_model(const RunConfig& cfg);
double resolve_x0(const RunConfig& cfg);
TrialConfig build_trial_config(const RunConfig& cfg);

}  // namespace etmc
