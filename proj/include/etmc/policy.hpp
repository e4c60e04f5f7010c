#pragma once

#include <optional>

#include "etmc/lookahead.hpp"

namespace etmc {

/// Event-triggered policy state; triggered holds from the first G >= 0 until the next reception.
struct PolicyState {
    long D = 1;
    bool triggered = false;
    long Rk = 0;
    double x_Rk = 0;

    bool operator==(const PolicyState&) const = default;
};

struct Decision {
    bool transmit = false;
    /// G_k^D when it was evaluated (not evaluated while already triggered).
    std::optional<double> G;
    PolicyState next;
};

Decision decide(const PolicyState& ps, const SensorInfo& info, const Lookahead& lk);
PolicyState on_reception(const PolicyState& ps, long k, double x_k);

/// Nominal policy: silent for D steps from k0, then transmit every step.
bool nominal_decide(long k0, long D, long k);

}  // namespace etmc
