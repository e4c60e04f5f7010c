#include "etmc/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "etmc/errors.hpp"

namespace etmc {

using nlohmann::json;

namespace {

template <class T>
T get_required(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing field " + where + "." + key);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad field " + where + "." + key + ": " + e.what());
    }
}

template <class T>
std::optional<T> get_optional(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return get_required<T>(obj, key, where);
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [k, _] : obj.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char* s) { return k == s; }) == known.end())
            throw ConfigError("unknown field " + where + "." + k);
    }
}

const json& section(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_object()) throw ConfigError(std::string("missing section ") + key);
    return doc.at(key);
}

SquareMatrix to_matrix(const std::vector<Vector>& m, const std::string& layout, const char* name) {
    try {
        return layout == "rows" ? SquareMatrix::from_rows(m) : SquareMatrix::from_columns(m);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("channel.") + name + ": " + e.what());
    }
}

}  // namespace

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc, {"plant", "channel", "policy", "sim", "output"}, "config");
    RunConfig cfg;

    const json& plant = section(doc, "plant");
    reject_unknown(plant, {"a", "c", "M", "B", "L", "abar_factor"}, "plant");
    cfg.plant.a = get_required<double>(plant, "a", "plant");
    cfg.plant.c = get_required<double>(plant, "c", "plant");
    cfg.plant.M = get_required<double>(plant, "M", "plant");
    cfg.plant.B = get_required<double>(plant, "B", "plant");
    cfg.plant.L = get_optional<double>(plant, "L", "plant");
    cfg.plant.abar_factor = get_optional<double>(plant, "abar_factor", "plant");
    if (cfg.plant.L.has_value() == cfg.plant.abar_factor.has_value())
        throw ConfigError("plant: exactly one of L and abar_factor must be given");

    const json& channel = section(doc, "channel");
    reject_unknown(channel, {"layout", "P0", "P1", "e"}, "channel");
    cfg.channel.layout = get_optional<std::string>(channel, "layout", "channel").value_or("rows");
    if (cfg.channel.layout != "rows" && cfg.channel.layout != "columns")
        throw ConfigError("channel.layout must be \"rows\" or \"columns\"");
    cfg.channel.P0 = get_required<std::vector<Vector>>(channel, "P0", "channel");
    cfg.channel.P1 = get_required<std::vector<Vector>>(channel, "P1", "channel");
    cfg.channel.e = get_required<Vector>(channel, "e", "channel");

    const json& policy = section(doc, "policy");
    reject_unknown(policy, {"D"}, "policy");
    cfg.D = get_required<long>(policy, "D", "policy");
    if (cfg.D < 1) throw ConfigError("policy.D must be >= 1");

    if (doc.contains("sim")) {
        const json& sim = section(doc, "sim");
        reject_unknown(sim, {"x0", "x0_over_B", "horizon", "trials", "seed", "noise", "gamma0_dist"}, "sim");
        cfg.sim.x0 = get_optional<double>(sim, "x0", "sim");
        cfg.sim.x0_over_B = get_optional<double>(sim, "x0_over_B", "sim");
        if (cfg.sim.x0 && cfg.sim.x0_over_B) throw ConfigError("sim: give at most one of x0 and x0_over_B");
        cfg.sim.horizon = get_optional<long>(sim, "horizon", "sim").value_or(cfg.sim.horizon);
        cfg.sim.trials = get_optional<long>(sim, "trials", "sim").value_or(cfg.sim.trials);
        cfg.sim.seed = get_optional<std::uint64_t>(sim, "seed", "sim").value_or(cfg.sim.seed);
        cfg.sim.noise = get_optional<std::string>(sim, "noise", "sim").value_or(cfg.sim.noise);
        if (sim.contains("gamma0_dist") && !sim.at("gamma0_dist").is_null()) {
            const json& g = sim.at("gamma0_dist");
            if (g.is_string()) {
                if (g.get<std::string>() != "uniform") throw ConfigError("sim.gamma0_dist: unknown name");
            } else {
                cfg.sim.gamma0_dist = get_required<Vector>(sim, "gamma0_dist", "sim");
            }
        }
        if (cfg.sim.horizon < 1) throw ConfigError("sim.horizon must be >= 1");
        if (cfg.sim.trials < 1) throw ConfigError("sim.trials must be >= 1");
        try {
            parse_noise_kind(cfg.sim.noise);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("sim.noise: ") + e.what());
        }
    }
    if (doc.contains("output")) {
        const json& out = section(doc, "output");
        reject_unknown(out, {"directory", "formats"}, "output");
        cfg.output.directory = get_optional<std::string>(out, "directory", "output").value_or(cfg.output.directory);
        cfg.output.formats =
            get_optional<std::vector<std::string>>(out, "formats", "output").value_or(cfg.output.formats);
    }

    // Derived objects must be valid too.
    build_params(cfg);
    build_model(cfg);
    if (!cfg.sim.gamma0_dist.empty() &&
        (cfg.sim.gamma0_dist.size() != cfg.channel.e.size() || !is_prob_vector(cfg.sim.gamma0_dist)))
        throw ConfigError("sim.gamma0_dist must be a probability vector over the channel states");
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
    json plant{{"a", cfg.plant.a}, {"c", cfg.plant.c}, {"M", cfg.plant.M}, {"B", cfg.plant.B}};
    if (cfg.plant.L) plant["L"] = *cfg.plant.L;
    if (cfg.plant.abar_factor) plant["abar_factor"] = *cfg.plant.abar_factor;
    json sim{{"horizon", cfg.sim.horizon}, {"trials", cfg.sim.trials}, {"seed", cfg.sim.seed},
             {"noise", cfg.sim.noise}};
    if (cfg.sim.x0) sim["x0"] = *cfg.sim.x0;
    if (cfg.sim.x0_over_B) sim["x0_over_B"] = *cfg.sim.x0_over_B;
    if (cfg.sim.gamma0_dist.empty()) sim["gamma0_dist"] = "uniform";
    else sim["gamma0_dist"] = cfg.sim.gamma0_dist;
    return json{{"plant", plant},
                {"channel",
                 {{"layout", cfg.channel.layout}, {"P0", cfg.channel.P0}, {"P1", cfg.channel.P1}, {"e", cfg.channel.e}}},
                {"policy", {{"D", cfg.D}}},
                {"sim", sim},
                {"output", {{"directory", cfg.output.directory}, {"formats", cfg.output.formats}}}};
}

std::string config_hash(const RunConfig& cfg) {
    // Output location does not change results.
    json doc = to_json(cfg);
    doc.erase("output");
    const std::string text = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

PlantParams build_params(const RunConfig& cfg) {
    try {
        return PlantParams::make(cfg.plant.a, cfg.plant.L, cfg.plant.abar_factor, cfg.plant.c, cfg.plant.M,
                                 cfg.plant.B);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("plant: ") + e.what());
    }
}

ChannelModel build_model(const RunConfig& cfg) {
    ChannelModel m = ChannelModel::make(to_matrix(cfg.channel.P0, cfg.channel.layout, "P0"),
                                        to_matrix(cfg.channel.P1, cfg.channel.layout, "P1"), cfg.channel.e);
    try {
        require_valid(m);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("channel: ") + e.what());
    }
    return m;
}

double resolve_x0(const RunConfig& cfg) {
    if (cfg.sim.x0) return *cfg.sim.x0;
    return cfg.sim.x0_over_B.value_or(15.5) * cfg.plant.B;
}

TrialConfig build_trial_config(const RunConfig& cfg) {
    TrialConfig tc;
    tc.params = build_params(cfg);
    tc.model = build_model(cfg);
    tc.D = cfg.D;
    tc.x0 = resolve_x0(cfg);
    tc.horizon = cfg.sim.horizon;
    tc.seed = cfg.sim.seed;
    tc.noise = parse_noise_kind(cfg.sim.noise);
    tc.gamma0_dist = cfg.sim.gamma0_dist;
    return tc;
}

}  // namespace etmc
