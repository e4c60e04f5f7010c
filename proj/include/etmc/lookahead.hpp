#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <unordered_map>

#include "etmc/channel.hpp"
#include "etmc/plant.hpp"

namespace etmc {

/// Sensor's decision-time information I_k (channel feedback is folded into p).
struct SensorInfo {
    long k = 0;
    double x = 0;
    double z = 0;
    long Rk = 0;
    double x_Rk = 0;
    ProbVector p;
};

/// Smallest w >= D with c^{2(w + k - Rk)} x_Rk^2 <= B.
long cutoff_mu(long D, long k, long Rk, double x_Rk, const PlantParams& params);

/// cutoff_mu with k = Rk, anchored at the reception state x_Sj.
long cutoff_nu(long D, double x_Sj, const PlantParams& params);

/// H(w, y) = abar^{2w} y + mbar (a^{2w} - 1) - max{c^{2w} y, B}.
double open_loop_H(long w, double y, const PlantParams& params);

/**
 * @brief Closed-form expectations over the next reception time.
 *
 * Holds the channel model, plant constants and a cache of the row vectors
 * d^T (I - b P1E)^{-1}, keyed by the bit pattern of b. The cache is guarded by
 * a shared mutex, so one engine may be shared by concurrent readers; copies
 * share the same cache.
 *
 * All D / w arguments are timestep counts. omega() accepts D = 0, everything
 * else built on the post-reception distribution needs D >= 1.
 */
class Lookahead {
public:
    Lookahead(ChannelModel model, PlantParams params);

    const ChannelModel& model() const noexcept { return model_; }
    const PlantParams& params() const noexcept { return params_; }
    const SquareMatrix& p1e() const noexcept { return p1e_; }
    double rho_p1e() const noexcept { return rho_p1e_; }

    /// a^2 rho(P1E) < 1, the existence condition for the look-ahead function.
    bool spectral_feasible() const noexcept { return params_.a2() * rho_p1e_ < 1.0; }

    /// d^T (I - b P1E)^{-1}; throws DivergentSeries unless |b| rho(P1E) < 1.
    const Vector& resolvent_row(double b) const;

    /// P0^D, cached per D.
    const SquareMatrix& p0_power(long D) const;

    /// Omega_D(w, p) = d^T (P1E)^{w-D} P0^D p.
    double omega(long D, long w, const ProbVector& p) const;
    /// Omega~_D(w, gamma) = d^T (P1E)^{w-D} P0^{D-1} P1 delta_gamma.
    double omega_tilde(long D, long w, ChannelState gamma) const;

    double series_g(long D, double b, const ProbVector& p) const;
    double series_f(long D, double b, const ProbVector& p, long mu) const;
    double series_g_tilde(long D, double b, ChannelState gamma) const;
    double series_f_tilde(long D, double b, ChannelState gamma, long nu) const;

    /// G_k^D: expected h at the next reception under hold-off D then continuous transmission.
    double lookahead_G(const SensorInfo& info, long D) const;

    /// J^D: post-reception analogue of G at a reception with state x_Sj in channel state gamma.
    double perf_eval_J(double x_Sj, ChannelState gamma, long D) const;

private:
    /// P0^{D-1} P1 delta_gamma.
    Vector post_reception_distribution(long D, ChannelState gamma) const;
    /// b^D z_b q
    double g_from(long D, double b, const Vector& q) const;
    /// b^mu z_b (P1E)^{mu-D} q
    double f_from(long D, double b, const Vector& q, long mu) const;
    void check_b(double b) const;

    ChannelModel model_;
    PlantParams params_;
    SquareMatrix p1e_;
    double rho_p1e_ = 0;

    struct Cache {
        std::shared_mutex mutex;
        std::unordered_map<std::uint64_t, Vector> resolvent;
        std::map<long, SquareMatrix> p0_powers;
    };
    std::shared_ptr<Cache> cache_;
};

}  // namespace etmc
