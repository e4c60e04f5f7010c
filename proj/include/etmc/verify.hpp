#pragma once

#include <string>
#include <vector>

#include "etmc/lookahead.hpp"

namespace etmc::verify {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct SeriesOptions {
    int instances = 100;
    double rho_cap = 0.9;  ///< cap on a^2 rho(P1E) for the random instances
    double tol = 1e-8;     ///< relative to max(1, |value|)
    std::uint64_t seed = 2024;
};

struct IdentityOptions {
    int states = 5;
    long samples = 100000;
    double se_multiple = 3.0;
    std::uint64_t seed = 7;
};

struct SignOptions {
    int y_points = 200;
    double y_max = 1e6;
    long w_max = 500;
    long theta_max = 200;
    int r_evaluations = 10000;
    double r_slack = 1e-9;
    std::uint64_t seed = 11;
};

/// Closed forms against truncated sums: the config's model plus random instances.
std::vector<CheckResult> series_suite(const ChannelModel& model, const PlantParams& params,
                                      const SeriesOptions& opt = {});

/// Monte Carlo check of both tower identities of the look-ahead function.
std::vector<CheckResult> identity_suite(const ChannelModel& model, const PlantParams& params,
                                        const IdentityOptions& opt = {});

/// H sign monotonicity scan at the configured B.
CheckResult h_sign_scan(const PlantParams& params, const SignOptions& opt = {});
/// Every entry of Q(theta) strictly increasing over integer theta in [0, theta_max].
CheckResult q_monotonicity(const Lookahead& lk, long theta_max);
/// J^theta <= R(theta) on random (x, gamma, theta).
CheckResult r_bound_check(const Lookahead& lk, const SignOptions& opt = {});
std::vector<CheckResult> sign_suite(const ChannelModel& model, const PlantParams& params, const SignOptions& opt = {});

/// Random valid channel with n states.
ChannelModel random_model(std::size_t n, CounterRng& rng);

}  // namespace etmc::verify
