// etmc: certify, simulate, verify and bound event-triggered transmission over Markov channels.
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "etmc/certify.hpp"
#include "etmc/config.hpp"
#include "etmc/errors.hpp"
#include "etmc/io.hpp"
#include "etmc/sim.hpp"
#include "etmc/verify.hpp"

namespace fs = std::filesystem;
using namespace etmc;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kNumeric = 3 };

struct Common {
    std::string config;
    std::string out;
    long D = 0;
};

fs::path output_dir(const Common& c, const RunConfig& cfg) {
    return c.out.empty() ? fs::path(cfg.output.directory) : fs::path(c.out);
}

RunConfig load(const Common& c) {
    RunConfig cfg = load_config(c.config);
    if (c.D > 0) cfg.D = c.D;
    return cfg;
}

unsigned thread_count(unsigned flag) {
    if (const char* env = std::getenv("ETMC_THREADS"); env && *env) {
        try {
            return static_cast<unsigned>(std::stoul(env));
        } catch (const std::exception&) {
            throw ConfigError(std::string("ETMC_THREADS is not a number: ") + env);
        }
    }
    return flag;
}

std::vector<double> parse_grid(const std::string& text, double B) {
    if (text.empty() || text == "default") return default_x_grid(B);
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            grid.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("bad --x-grid entry '" + item + "'");
        }
    }
    if (grid.empty() || !std::is_sorted(grid.begin(), grid.end())) throw ConfigError("--x-grid must be ascending");
    return grid;
}

std::pair<long, long> parse_range(const std::string& text) {
    const auto colon = text.find(':');
    try {
        if (colon == std::string::npos) {
            const long d = std::stol(text);
            return {d, d};
        }
        return {std::stol(text.substr(0, colon)), std::stol(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ConfigError("bad --d-range '" + text + "' (expected LO:HI)");
    }
}

int cmd_certify(const Common& c, bool print_json) {
    const RunConfig cfg = load(c);
    const PlantParams params = build_params(cfg);
    const CertificationReport rep = certify(build_model(cfg), params, cfg.D, default_x_grid(params.B));
    const fs::path dir = output_dir(c, cfg);
    fs::create_directories(dir);
    nlohmann::json doc = report_to_json(rep);
    doc["config_hash"] = config_hash(cfg);
    std::ofstream(dir / "certification.json") << doc.dump(2) << "\n";
    if (print_json) std::cout << doc.dump(2) << "\n";
    else std::cout << report_summary(rep);
    return rep.certified() ? kOk : kFailure;
}

struct SimulateFlags {
    long trials = 0;
    long horizon = 0;
    long long seed = -1;
    bool force = false;
    unsigned threads = 0;
};

int cmd_simulate(const Common& c, const SimulateFlags& f) {
    RunConfig cfg = load(c);
    if (f.trials > 0) cfg.sim.trials = f.trials;
    if (f.horizon > 0) cfg.sim.horizon = f.horizon;
    if (f.seed >= 0) cfg.sim.seed = static_cast<std::uint64_t>(f.seed);
    const TrialConfig tc = build_trial_config(cfg);

    const CertificationReport rep = certify(tc.model, tc.params, tc.D, {});
    if (!rep.certified()) {
        if (!f.force) {
            std::cerr << "configuration is not certified; rerun with --force to simulate anyway\n"
                      << report_summary(rep);
            return kFailure;
        }
        std::cerr << "warning: simulating an uncertified configuration\n";
    }
    if (!rep.spectral_feasible) throw DivergentSeries(tc.params.a2(), tc.params.a2() * rep.rho_p1e);

    const std::string hash = config_hash(cfg);
    const fs::path dir = output_dir(c, cfg);
    claim_output_dir(dir, hash);

    const std::vector<double> grid = default_x_grid(tc.params.B);
    const EnsembleStats st = run_ensemble(tc, cfg.sim.trials, thread_count(f.threads), grid);

    {
        CsvWriter csv(dir / "ensemble.csv", hash, {"k", "mean_x2", "envelope", "tf_cum"});
        for (std::size_t k = 0; k < st.mean_x2.size(); ++k) {
            csv.cell(static_cast<long>(k)).cell(st.mean_x2[k]).cell(st.envelope[k]).cell(st.tf_cum[k]);
            csv.end_row();
        }
    }
    {
        const Lookahead lk(tc.model, tc.params);
        CsvWriter csv(dir / "buckets.csv", hash,
                      {"X_lo", "X_hi", "tf_empirical", "se", "tf_bound", "count", "excluded_initial", "excluded_never"});
        for (const auto& b : st.tf_state_buckets) {
            double bound = 1.0;
            if (rep.q_feasible) bound = tf_bound_state(lk, b.X_lo, tc.D);
            csv.cell(b.X_lo).cell(b.X_hi).cell(b.tf_empirical).cell(b.se).cell(bound).cell(b.count);
            csv.cell(b.excluded_initial).cell(b.excluded_never);
            csv.end_row();
        }
    }
    write_manifest(dir, cfg,
                   {{"trials", cfg.sim.trials},
                    {"seeds", {{"first", cfg.sim.seed}, {"last", cfg.sim.seed + cfg.sim.trials - 1}}},
                    {"gamma0_dist", cfg.sim.gamma0_dist.empty() ? nlohmann::json("uniform")
                                                                : nlohmann::json(cfg.sim.gamma0_dist)},
                    {"certified", rep.certified()},
                    {"files", {"ensemble.csv", "buckets.csv"}}});

    const std::size_t K = st.mean_x2.size() - 1;
    std::cout << "trials " << st.trials << ", horizon " << K << "\n";
    std::cout << "terminal transmission fraction " << format_double(st.tf_cum[K]) << " (se "
              << format_double(st.tf_terminal_se) << ")\n";
    std::cout << "results in " << dir.string() << "\n";
    return kOk;
}

int cmd_verify(const Common& c, const std::string& suite) {
    const RunConfig cfg = load(c);
    const PlantParams params = build_params(cfg);
    const ChannelModel model = build_model(cfg);
    std::vector<verify::CheckResult> results;
    const auto append = [&](std::vector<verify::CheckResult> r) { results.insert(results.end(), r.begin(), r.end()); };
    if (suite == "series" || suite == "all") append(verify::series_suite(model, params));
    if (suite == "identities" || suite == "all") append(verify::identity_suite(model, params));
    if (suite == "signs" || suite == "all") append(verify::sign_suite(model, params));
    bool ok = true;
    for (const auto& r : results) {
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
        ok = ok && r.passed;
    }
    return ok ? kOk : kFailure;
}

int cmd_bounds(const Common& c, const std::string& d_range, const std::string& x_grid) {
    const RunConfig cfg = load(c);
    const PlantParams params = build_params(cfg);
    const ChannelModel model = build_model(cfg);
    const auto [d_lo, d_hi] = parse_range(d_range);
    if (d_lo < 1 || d_hi < d_lo) throw ConfigError("--d-range must satisfy 1 <= LO <= HI");
    const std::vector<double> grid = parse_grid(x_grid, params.B);

    const std::string hash = config_hash(cfg);
    const fs::path dir = output_dir(c, cfg);
    claim_output_dir(dir, hash);
    const Lookahead lk(model, params);
    bool identity_ok = true;

    CsvWriter inf(dir / "bounds_inf.csv", hash, {"D", "feasible", "tf_inf_bound"});
    CsvWriter state(dir / "bounds_state.csv", hash, {"D", "X", "tf_state_bound"});
    for (long D = d_lo; D <= d_hi; ++D) {
        std::string status = "ok";
        if (!lk.spectral_feasible()) status = "divergent series";
        else if (!check_feasible_D(lk, D).feasible) status = "Q(D) not negative";
        if (status != "ok") {
            inf.cell(D).cell(std::string("false")).cell(std::string("nan"));
            inf.end_row();
            std::cout << "D=" << D << ": " << status << "\n";
            continue;
        }
        const double b_inf = tf_bound_asymptotic(lk, D);
        const double b_id = tf_bound_state(lk, params.B * std::pow(params.c2(), -static_cast<double>(D)), D);
        const bool same = std::abs(b_inf - b_id) <= 1e-12;
        identity_ok = identity_ok && same;
        inf.cell(D).cell(std::string("true")).cell(b_inf);
        inf.end_row();
        for (double X : grid) {
            state.cell(D).cell(X).cell(tf_bound_state(lk, X, D));
            state.end_row();
        }
        std::cout << "D=" << D << ": tf_inf_bound " << format_double(b_inf)
                  << (same ? "" : "  MISMATCH with state bound at B c^{-2D}: " + format_double(b_id)) << "\n";
    }
    return identity_ok ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-triggered transmission over action-dependent Markov channels"};
    app.require_subcommand(1);

    const auto add_common = [](CLI::App* sub, Common& c) {
        sub->add_option("config", c.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", c.out, "Output directory (default: output.directory from the config)");
        sub->add_option("--D", c.D, "Override policy.D")->check(CLI::PositiveNumber);
    };

    Common cert_c;
    bool cert_json = false;
    auto* cert = app.add_subcommand("certify", "Feasibility, B0/B*, Q(D) and transmission-fraction bounds");
    add_common(cert, cert_c);
    cert->add_flag("--json", cert_json, "Print the JSON report instead of the summary");

    Common sim_c;
    SimulateFlags sim_f;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo ensemble of the event-triggered loop");
    add_common(sim, sim_c);
    sim->add_option("--trials", sim_f.trials, "Number of trials")->check(CLI::PositiveNumber);
    sim->add_option("--horizon", sim_f.horizon, "Steps per trial")->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_f.seed, "Base seed; trial i uses seed + i")->check(CLI::NonNegativeNumber);
    sim->add_flag("--force", sim_f.force, "Simulate even if certification fails");
    sim->add_option("--threads", sim_f.threads, "Worker threads (0 = all cores; ETMC_THREADS overrides)");

    Common ver_c;
    std::string suite = "all";
    auto* ver = app.add_subcommand("verify", "Run the closed-form and property check suites");
    add_common(ver, ver_c);
    ver->add_option("--suite", suite, "series, identities, signs or all")
        ->check(CLI::IsMember({"series", "identities", "signs", "all"}));

    Common bnd_c;
    std::string d_range = "1:6";
    std::string x_grid = "default";
    auto* bnd = app.add_subcommand("bounds", "Transmission-fraction bound tables over D and X");
    add_common(bnd, bnd_c);
    bnd->add_option("--d-range", d_range, "LO:HI range of D");
    bnd->add_option("--x-grid", x_grid, "Comma-separated ascending X values, or 'default' (B 2^m, m = -2..14)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*cert) return cmd_certify(cert_c, cert_json);
        if (*sim) return cmd_simulate(sim_c, sim_f);
        if (*ver) return cmd_verify(ver_c, suite);
        if (*bnd) return cmd_bounds(bnd_c, d_range, x_grid);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const DivergentSeries& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const NumericalFailure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const StepFailure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
