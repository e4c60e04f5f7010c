#pragma once

#include <optional>
#include <string>

#include "etmc/rng.hpp"

namespace etmc {

/**
 * @brief Scalar plant, controller gain and objective constants.
 *
 * abar = a + L is the closed-loop gain, mbar = M / (a^2 - 1). The valid
 * region is 0 < abar^2 < c^2 < 1 < a^2 with M > 0 and B > 0.
 */
struct PlantParams {
    double a = 0;
    double L = 0;
    double abar = 0;
    double c = 0;
    double M = 0;
    double mbar = 0;
    double B = 0;

    /// Exactly one of L / abar_factor (abar = abar_factor * c) must be set.
    static PlantParams make(double a, std::optional<double> L, std::optional<double> abar_factor, double c,
                            double M, double B);

    double a2() const noexcept { return a * a; }
    double c2() const noexcept { return c * c; }
    double abar2() const noexcept { return abar * abar; }
};

/// Returns an empty string when valid, else a description of the first violated invariant.
std::string check(const PlantParams& p);
void require_valid(const PlantParams& p);

/// Closed-loop bookkeeping for one step; z = x - xhat and z_plus = x - xhat_plus.
struct LoopState {
    long k = 0;
    double x = 0;
    double xhat = 0;
    double xhat_plus = 0;
    double z = 0;
    double z_plus = 0;

    bool operator==(const LoopState&) const = default;
};

/// S_0 = 0 convention: the controller starts with the exact state.
LoopState initial_state(double x0);

LoopState apply_reception(const LoopState& s, bool received);

/// One step of x' = abar x - L z_plus + v, xhat' = abar xhat_plus.
LoopState advance(const LoopState& s, const PlantParams& p, double v);

/// h_k = x_k^2 - max{c^{2(k - R_k)} x_{R_k}^2, B}.
double performance_h(long k, double x_k, long r_k, double x_rk, const PlantParams& p);

enum class NoiseKind { Gaussian, Uniform, TwoPoint };

NoiseKind parse_noise_kind(const std::string& s);
std::string to_string(NoiseKind kind);

/// Zero-mean sample with variance M. Always consumes two uniforms.
double sample_noise(NoiseKind kind, double M, CounterRng& rng);

}  // namespace etmc
