#include "etmc/plant.hpp"

#include <algorithm>
#include <cmath>

#include "etmc/errors.hpp"

namespace etmc {

PlantParams PlantParams::make(double a, std::optional<double> L, std::optional<double> abar_factor, double c,
                              double M, double B) {
    if (L.has_value() == abar_factor.has_value())
        throw DomainError("exactly one of L and abar_factor must be given");
    PlantParams p;
    p.a = a;
    p.c = c;
    p.M = M;
    p.B = B;
    if (L) {
        p.L = *L;
        p.abar = a + *L;
    } else {
        p.abar = *abar_factor * c;
        p.L = p.abar - a;
    }
    p.mbar = M / (a * a - 1.0);
    require_valid(p);
    return p;
}

std::string check(const PlantParams& p) {
    const double values[] = {p.a, p.L, p.abar, p.c, p.M, p.mbar, p.B};
    if (!std::all_of(std::begin(values), std::end(values), [](double v) { return std::isfinite(v); }))
        return "non-finite plant parameter";
    if (!(std::abs(p.a) > 1.0)) return "|a| must exceed 1";
    if (!(p.abar > -1.0 && p.abar < 1.0)) return "abar must lie in (-1, 1)";
    if (!(p.abar2() > 0.0 && p.abar2() < p.c2() && p.c2() < 1.0)) return "need 0 < abar^2 < c^2 < 1";
    if (!(p.M > 0.0)) return "M must be positive";
    if (!(p.B > 0.0)) return "B must be positive";
    if (p.mbar != p.M / (p.a2() - 1.0)) return "mbar must equal M / (a^2 - 1)";
    return {};
}

void require_valid(const PlantParams& p) {
    if (auto msg = check(p); !msg.empty()) throw DomainError("invalid plant parameters: " + msg);
}

LoopState initial_state(double x0) {
    return LoopState{0, x0, x0, x0, 0.0, 0.0};
}

LoopState apply_reception(const LoopState& s, bool received) {
    LoopState out = s;
    if (received) {
        out.xhat_plus = s.x;
        out.z_plus = 0.0;
    } else {
        out.xhat_plus = s.xhat;
        out.z_plus = s.z;
    }
    return out;
}

LoopState advance(const LoopState& s, const PlantParams& p, double v) {
    LoopState out;
    out.k = s.k + 1;
    out.x = p.abar * s.x - p.L * s.z_plus + v;
    out.xhat = p.abar * s.xhat_plus;
    out.xhat_plus = out.xhat;
    out.z = out.x - out.xhat;
    out.z_plus = out.z;
    return out;
}

double performance_h(long k, double x_k, long r_k, double x_rk, const PlantParams& p) {
    if (k < r_k) throw DomainError("performance_h requires k >= R_k");
    const double envelope = std::pow(p.c2(), static_cast<double>(k - r_k)) * x_rk * x_rk;
    return x_k * x_k - std::max(envelope, p.B);
}

NoiseKind parse_noise_kind(const std::string& s) {
    if (s == "gaussian") return NoiseKind::Gaussian;
    if (s == "uniform") return NoiseKind::Uniform;
    if (s == "two_point") return NoiseKind::TwoPoint;
    throw DomainError("unknown noise kind '" + s + "' (expected gaussian, uniform or two_point)");
}

std::string to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::Gaussian: return "gaussian";
        case NoiseKind::Uniform: return "uniform";
        case NoiseKind::TwoPoint: return "two_point";
    }
    return "gaussian";
}

double sample_noise(NoiseKind kind, double M, CounterRng& rng) {
    const double sigma = std::sqrt(M);
    switch (kind) {
        case NoiseKind::Gaussian:
            return sigma * rng.standard_normal();
        case NoiseKind::Uniform: {
            // U(-h, h) has variance h^2 / 3.
            const double u = rng.uniform();
            rng.uniform();
            return sigma * std::sqrt(3.0) * (2.0 * u - 1.0);
        }
        case NoiseKind::TwoPoint: {
            const double u = rng.uniform();
            rng.uniform();
            return u < 0.5 ? -sigma : sigma;
        }
    }
    return 0.0;
}

}  // namespace etmc
