#pragma once

#include "etmc/lookahead.hpp"

// Reference evaluations by explicit truncated summation. Nothing here touches
// the resolvent cache or the closed forms, so these can check them.
namespace etmc::oracle {

/// W = D + ceil(log(tol (1 - q)) / log q) with q = |b| rho(P1E), plus a fixed pad.
long truncation_index(long D, double q, double tol = 1e-12);

/// Omega values for w = D..W from the start vector q0 (P0^D p or P0^{D-1} P1 delta_gamma).
Vector omega_sequence(const ChannelModel& model, long D, const Vector& q0, long W);

Vector start_vector(const ChannelModel& model, long D, const ProbVector& p);
Vector start_vector_tilde(const ChannelModel& model, long D, ChannelState gamma);

/// sum_{w=from}^{D + len - 1} b^w omega[w - D]
double weighted_tail(const Vector& omega, long D, long from, double b);

/// E[h at the reception | reception at w steps ahead], by the plant dynamics.
double expected_h(long w, const SensorInfo& info, const PlantParams& params);

/// sum_w E[h | w] Omega_D(w, p), truncated at the a^2 tail.
double lookahead_G(const SensorInfo& info, long D, const ChannelModel& model, const PlantParams& params);

/// sum_w H(w, x^2) Omega~_D(w, gamma).
double perf_eval_J(double x, ChannelState gamma, long D, const ChannelModel& model, const PlantParams& params);

}  // namespace etmc::oracle
