#include "etmc/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "etmc/errors.hpp"

namespace etmc::oracle {

long truncation_index(long D, double q, double tol) {
    if (q <= 0.0) return D + 1;
    if (q >= 1.0) throw DivergentSeries(q, q);
    // The pad absorbs the transient of (P1E)^w before its Perron rate takes over.
    return D + static_cast<long>(std::ceil(std::log(tol * (1.0 - q)) / std::log(q))) + 64;
}

Vector omega_sequence(const ChannelModel& model, long D, const Vector& q0, long W) {
    const SquareMatrix k = model.p1e();
    Vector out;
    Vector v = q0;
    for (long w = D; w <= W; ++w) {
        out.push_back(dot(model.d, v));
        v = k.apply(v);
    }
    return out;
}

Vector start_vector(const ChannelModel& model, long D, const ProbVector& p) {
    Vector v = p;
    for (long i = 0; i < D; ++i) v = model.p0.apply(v);
    return v;
}

Vector start_vector_tilde(const ChannelModel& model, long D, ChannelState gamma) {
    Vector v = model.p1.column(gamma.zero_based());
    for (long i = 1; i < D; ++i) v = model.p0.apply(v);
    return v;
}

double weighted_tail(const Vector& omega, long D, long from, double b) {
    double sum = 0.0;
    for (long w = std::max(from, D); w < D + static_cast<long>(omega.size()); ++w)
        sum += std::pow(b, static_cast<double>(w)) * omega[static_cast<std::size_t>(w - D)];
    return sum;
}

double expected_h(long w, const SensorInfo& info, const PlantParams& params) {
    // Over w steps: x = abar^w x0 + (a^w - abar^w) z0 + noise, the noise term
    // contributing mbar (a^{2w} - 1) in expectation.
    const double wd = static_cast<double>(w);
    const double aw = std::pow(params.a, wd);
    const double abw = std::pow(params.abar, wd);
    const double mean = abw * info.x + (aw - abw) * info.z;
    const double noise = params.mbar * (aw * aw - 1.0);
    const double N = std::pow(params.c2(), static_cast<double>(info.k - info.Rk)) * info.x_Rk * info.x_Rk;
    return mean * mean + noise - std::max(std::pow(params.c2(), wd) * N, params.B);
}

double lookahead_G(const SensorInfo& info, long D, const ChannelModel& model, const PlantParams& params) {
    const double rho = spectral_radius(model.p1e());
    const long W = truncation_index(D, params.a2() * rho, 1e-16);
    const Vector om = omega_sequence(model, D, start_vector(model, D, info.p), W);
    double sum = 0.0;
    for (long w = D; w <= W; ++w) sum += expected_h(w, info, params) * om[static_cast<std::size_t>(w - D)];
    return sum;
}

double perf_eval_J(double x, ChannelState gamma, long D, const ChannelModel& model, const PlantParams& params) {
    const double rho = spectral_radius(model.p1e());
    const long W = truncation_index(D, params.a2() * rho, 1e-16);
    const Vector om = omega_sequence(model, D, start_vector_tilde(model, D, gamma), W);
    double sum = 0.0;
    for (long w = D; w <= W; ++w) sum += open_loop_H(w, x * x, params) * om[static_cast<std::size_t>(w - D)];
    return sum;
}

}  // namespace etmc::oracle
