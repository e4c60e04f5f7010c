#pragma once

// Naive reference arithmetic for the tests: plain nested loops, no LU, no
// resolvent, no library closed forms.

#include <algorithm>
#include <cmath>
#include <vector>

#include "etmc/channel.hpp"
#include "etmc/plant.hpp"

namespace ref {

using Vec = std::vector<double>;

inline Vec mul(const etmc::SquareMatrix& m, const Vec& v) {
    Vec out(v.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) out[i] += m(i, j) * v[j];
    return out;
}

/// P1 diag(e) v
inline Vec k_mul(const etmc::ChannelModel& m, const Vec& v) {
    Vec ev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) ev[i] = m.e[i] * v[i];
    return mul(m.p1, ev);
}

inline double dotp(const Vec& a, const Vec& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec start(const etmc::ChannelModel& m, long D, const Vec& p) {
    Vec v = p;
    for (long i = 0; i < D; ++i) v = mul(m.p0, v);
    return v;
}

inline Vec start_tilde(const etmc::ChannelModel& m, long D, int gamma) {
    Vec v = m.p1.column(static_cast<std::size_t>(gamma - 1));
    for (long i = 1; i < D; ++i) v = mul(m.p0, v);
    return v;
}

/// Omega values for w = D .. D + count - 1.
inline Vec omegas(const etmc::ChannelModel& m, const Vec& q0, long count) {
    Vec out;
    Vec v = q0;
    for (long i = 0; i < count; ++i) {
        out.push_back(dotp(m.d, v));
        v = k_mul(m, v);
    }
    return out;
}

/// Truncation length for a geometric tail with ratio q below tol, generously padded.
inline long terms(double q, double tol = 1e-16) {
    if (q <= 0) return 8;
    return static_cast<long>(std::ceil(std::log(tol * (1 - q)) / std::log(q))) + 100;
}

inline double tail_sum(const Vec& om, long D, long from, double b) {
    double s = 0;
    for (long i = 0; i < static_cast<long>(om.size()); ++i) {
        const long w = D + i;
        if (w >= from) s += std::pow(b, static_cast<double>(w)) * om[static_cast<std::size_t>(i)];
    }
    return s;
}

inline double H(long w, double y, const etmc::PlantParams& p) {
    const double wd = static_cast<double>(w);
    return std::pow(p.abar * p.abar, wd) * y + p.M / (p.a * p.a - 1) * (std::pow(p.a * p.a, wd) - 1) -
           std::max(std::pow(p.c * p.c, wd) * y, p.B);
}

/// Spectral radius bound-free estimate: Gelfand formula on a high power, for nonnegative m.
inline double rho_estimate(const etmc::SquareMatrix& m, int steps = 4000) {
    Vec v(m.order(), 1.0);
    double log_growth = 0;
    for (int s = 0; s < steps; ++s) {
        v = mul(m, v);
        double norm = 0;
        for (double x : v) norm = std::max(norm, std::abs(x));
        if (norm == 0) return 0;
        for (double& x : v) x /= norm;
        if (s >= steps / 2) log_growth += std::log(norm);
    }
    return std::exp(log_growth / (steps - steps / 2));
}

}  // namespace ref
