#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "etmc/policy.hpp"

namespace etmc {

struct TrialConfig {
    PlantParams params;
    ChannelModel model;
    long D = 1;
    double x0 = 0;
    long horizon = 1;
    std::uint64_t seed = 0;
    NoiseKind noise = NoiseKind::Gaussian;
    /// Empty means uniform over the channel states.
    ProbVector gamma0_dist;
};

/// Throws DomainError naming the first bad field.
void require_valid(const TrialConfig& cfg);

/**
 * @brief One closed-loop trajectory over k = 0..K.
 *
 * Step 0 is the forced initial reception. G holds NaN where the look-ahead
 * function was not evaluated (step 0 and steps inside a transmission run).
 */
struct TrialRecord {
    std::vector<double> x;
    std::vector<double> xhat_plus;
    std::vector<std::uint8_t> t;
    std::vector<std::uint8_t> r;
    std::vector<int> gamma;
    std::vector<double> G;
    std::vector<long> receptions;
};

/// Runs one trial on the stream CounterRng(cfg.seed, 0).
TrialRecord run_trial(const TrialConfig& cfg, const Lookahead& lk);
TrialRecord run_trial(const TrialConfig& cfg);

/// max{c^{2k} x0^2, B}
double envelope(long k, double x0, const PlantParams& params);

struct TfBucket {
    double X_lo = 0;
    double X_hi = std::numeric_limits<double>::infinity();
    double tf_empirical = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();
    long count = 0;
    /// Trials with x0^2 already below the threshold (S_0 qualifies).
    long excluded_initial = 0;
    /// Trials with no qualifying reception within the horizon.
    long excluded_never = 0;
};

/// Per-trial contribution to one F_X bucket.
struct Crossing {
    enum class Kind { Qualified, Initial, Never } kind = Kind::Never;
    long transmissions = 0;
    long elapsed = 0;
};

/// First reception S_j (j >= 1) with x^2 < X, all earlier receptions at or above X.
Crossing first_crossing(const TrialRecord& rec, double X);

/// Ratio estimator sum(transmissions) / sum(elapsed) per bucket, threshold X_lo.
std::vector<TfBucket> empirical_tf_state(const std::vector<TrialRecord>& records, const std::vector<double>& X_grid);
std::vector<TfBucket> aggregate_crossings(const std::vector<std::vector<Crossing>>& per_trial,
                                          const std::vector<double>& X_grid);

struct EnsembleStats {
    std::vector<double> mean_x2;
    std::vector<double> envelope;
    /// tf_cum[k] = mean over trials of sum_{i=1..k} t_i / k; tf_cum[0] = 0.
    std::vector<double> tf_cum;
    double tf_terminal_se = 0;
    std::vector<TfBucket> tf_state_buckets;
    long trials = 0;
};

/// Trial i runs with seed cfg.seed + i. Output is independent of the thread count.
EnsembleStats run_ensemble(const TrialConfig& cfg, long trials, unsigned threads = 0,
                           const std::vector<double>& X_grid = {});

}  // namespace etmc
