#pragma once

#include <optional>
#include <string>
#include <vector>

#include "etmc/matrix.hpp"
#include "etmc/rng.hpp"

namespace etmc {

/// Channel state, 1-based as in every external interface.
struct ChannelState {
    int index = 1;
    std::size_t zero_based() const noexcept { return static_cast<std::size_t>(index - 1); }
    bool operator==(const ChannelState&) const = default;
};

/// Distribution over channel states; entries >= 0 and summing to one.
using ProbVector = Vector;

bool is_prob_vector(const ProbVector& p, double tol = 1e-12);
ProbVector uniform_distribution(std::size_t n);
ProbVector unit_vector(std::size_t n, ChannelState s);

struct ChannelViolation {
    std::string kind;     ///< "not column-stochastic", "probability out of range", "dimension mismatch"
    std::string where;    ///< e.g. "P0 column 2"
    double deviation = 0; ///< sum - 1, or the offending value
};

/**
 * @brief Action-dependent finite-state Markov channel.
 *
 * p0 / p1 are the column-stochastic transition matrices without / with a
 * transmission on the current step; e holds per-state drop probabilities and
 * d = 1 - e.
 */
struct ChannelModel {
    SquareMatrix p0;
    SquareMatrix p1;
    Vector e;
    Vector d;

    std::size_t n() const noexcept { return p0.order(); }

    /// Builds d from e. No validation; see validate().
    static ChannelModel make(SquareMatrix p0, SquareMatrix p1, Vector e);

    /// P1 * diag(e).
    SquareMatrix p1e() const;
};

/// Empty result means the model is valid.
std::vector<ChannelViolation> validate(const ChannelModel& model);

/// Throws DomainError with all violations joined if the model is invalid.
void require_valid(const ChannelModel& model);

/// Samples gamma_{k+1} from column gamma of P_{t} by inverse CDF (one uniform).
ChannelState step_state(const ChannelModel& model, ChannelState gamma, bool transmit, CounterRng& rng);
ChannelState sample_column(const SquareMatrix& p, ChannelState gamma, double u);
/// Inverse CDF over p, cumulative sums left to right, ties toward the lower index.
ChannelState sample_distribution(std::span<const double> p, double u);

/// r_k: zero without transmission, else Bernoulli(d_gamma). Always consumes one uniform.
bool sample_reception(const ChannelModel& model, ChannelState gamma, bool transmit, CounterRng& rng);

/**
 * @brief Sensor-side belief recursion for p_{k+1}.
 *
 * Returns P1 delta_gamma after an acknowledged reception, P0 p without a
 * transmission and P1 p after a drop. The result is renormalized; a correction
 * larger than 1e-9 indicates a bug and raises NumericalFailure.
 */
ProbVector belief_update(const ChannelModel& model, const ProbVector& p, bool transmit, bool received,
                         std::optional<ChannelState> gamma_if_received);

}  // namespace etmc
