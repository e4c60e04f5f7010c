#include "etmc/lookahead.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>

#include "etmc/errors.hpp"

namespace etmc {

long cutoff_mu(long D, long k, long Rk, double x_Rk, const PlantParams& params) {
    if (k < Rk) throw DomainError("cutoff_mu requires k >= R_k");
    const double y = x_Rk * x_Rk;
    if (y == 0.0) return D;
    const long elapsed = k - Rk;
    const double c2 = params.c2();
    const auto above = [&](long w) { return std::pow(c2, static_cast<double>(w + elapsed)) * y > params.B; };

    const double raw = std::ceil(std::log(y / params.B) / std::log(1.0 / c2)) - static_cast<double>(elapsed);
    long mu = std::max(D, static_cast<long>(std::max(raw, static_cast<double>(D))));
    // The log ceiling can be off by one at exact ties; settle it by direct comparison.
    while (mu > D && !above(mu - 1)) --mu;
    while (above(mu)) ++mu;
    return mu;
}

long cutoff_nu(long D, double x_Sj, const PlantParams& params) {
    return cutoff_mu(D, 0, 0, x_Sj, params);
}

double open_loop_H(long w, double y, const PlantParams& params) {
    const double wd = static_cast<double>(w);
    return std::pow(params.abar2(), wd) * y + params.mbar * (std::pow(params.a2(), wd) - 1.0) -
           std::max(std::pow(params.c2(), wd) * y, params.B);
}

Lookahead::Lookahead(ChannelModel model, PlantParams params)
    : model_(std::move(model)), params_(params), cache_(std::make_shared<Cache>()) {
    require_valid(model_);
    p1e_ = model_.p1e();
    rho_p1e_ = spectral_radius(p1e_);
}

void Lookahead::check_b(double b) const {
    const double rho = std::abs(b) * rho_p1e_;
    if (!(rho < 1.0)) throw DivergentSeries(b, rho);
}

const Vector& Lookahead::resolvent_row(double b) const {
    const auto key = std::bit_cast<std::uint64_t>(b);
    {
        std::shared_lock lock(cache_->mutex);
        if (auto it = cache_->resolvent.find(key); it != cache_->resolvent.end()) return it->second;
    }
    check_b(b);
    const std::size_t n = model_.n();
    const LuDecomposition lu(SquareMatrix::identity(n) - p1e_ * b);
    Vector row = lu.solve_transposed(model_.d);
    std::unique_lock lock(cache_->mutex);
    // unordered_map references stay valid across rehashing.
    return cache_->resolvent.try_emplace(key, std::move(row)).first->second;
}

const SquareMatrix& Lookahead::p0_power(long D) const {
    if (D < 0) throw DomainError("negative power of P0");
    {
        std::shared_lock lock(cache_->mutex);
        if (auto it = cache_->p0_powers.find(D); it != cache_->p0_powers.end()) return it->second;
    }
    SquareMatrix m = mat_power(model_.p0, static_cast<unsigned>(D));
    std::unique_lock lock(cache_->mutex);
    return cache_->p0_powers.try_emplace(D, std::move(m)).first->second;
}

Vector Lookahead::post_reception_distribution(long D, ChannelState gamma) const {
    if (D < 1) throw DomainError("post-reception quantities need D >= 1");
    const Vector col = model_.p1.column(gamma.zero_based());
    return p0_power(D - 1).apply(col);
}

double Lookahead::omega(long D, long w, const ProbVector& p) const {
    if (D < 0) throw DomainError("omega requires D >= 0");
    if (w < D) throw DomainError("omega requires w >= D");
    Vector v = p0_power(D).apply(p);
    for (long i = D; i < w; ++i) v = p1e_.apply(v);
    return dot(model_.d, v);
}

double Lookahead::omega_tilde(long D, long w, ChannelState gamma) const {
    if (w < D) throw DomainError("omega_tilde requires w >= D");
    Vector v = post_reception_distribution(D, gamma);
    for (long i = D; i < w; ++i) v = p1e_.apply(v);
    return dot(model_.d, v);
}

double Lookahead::g_from(long D, double b, const Vector& q) const {
    return std::pow(b, static_cast<double>(D)) * dot(resolvent_row(b), q);
}

double Lookahead::f_from(long D, double b, const Vector& q, long mu) const {
    if (mu < D) throw DomainError("series_f requires mu >= D");
    const Vector& z = resolvent_row(b);
    Vector v = q;
    for (long i = D; i < mu; ++i) v = p1e_.apply(v);
    return std::pow(b, static_cast<double>(mu)) * dot(z, v);
}

double Lookahead::series_g(long D, double b, const ProbVector& p) const {
    return g_from(D, b, p0_power(D).apply(p));
}

double Lookahead::series_f(long D, double b, const ProbVector& p, long mu) const {
    return f_from(D, b, p0_power(D).apply(p), mu);
}

double Lookahead::series_g_tilde(long D, double b, ChannelState gamma) const {
    return g_from(D, b, post_reception_distribution(D, gamma));
}

double Lookahead::series_f_tilde(long D, double b, ChannelState gamma, long nu) const {
    return f_from(D, b, post_reception_distribution(D, gamma), nu);
}

double Lookahead::lookahead_G(const SensorInfo& info, long D) const {
    if (!spectral_feasible()) throw DivergentSeries(params_.a2(), params_.a2() * rho_p1e_);
    const PlantParams& pp = params_;
    const Vector q = p0_power(D).apply(info.p);
    const double g_abar2 = g_from(D, pp.abar2(), q);
    const double g_aabar = g_from(D, pp.a * pp.abar, q);
    const double g_a2 = g_from(D, pp.a2(), q);
    const double g_c2 = g_from(D, pp.c2(), q);
    const double g_1 = g_from(D, 1.0, q);

    const long mu = cutoff_mu(D, info.k, info.Rk, info.x_Rk, pp);
    // f(1) and f(c^2) share the propagated vector (P1E)^{mu-D} q.
    Vector v = q;
    for (long i = D; i < mu; ++i) v = p1e_.apply(v);
    const double f_1 = dot(resolvent_row(1.0), v);
    const double f_c2 = std::pow(pp.c2(), static_cast<double>(mu)) * dot(resolvent_row(pp.c2()), v);

    const double N = std::pow(pp.c2(), static_cast<double>(info.k - info.Rk)) * info.x_Rk * info.x_Rk;
    const double x = info.x;
    const double z = info.z;
    return g_abar2 * x * x + 2.0 * (g_aabar - g_abar2) * x * z + (g_a2 + g_abar2 - 2.0 * g_aabar) * z * z +
           pp.mbar * (g_a2 - g_1) - (pp.B * f_1 + N * (g_c2 - f_c2));
}

double Lookahead::perf_eval_J(double x_Sj, ChannelState gamma, long D) const {
    if (!spectral_feasible()) throw DivergentSeries(params_.a2(), params_.a2() * rho_p1e_);
    const PlantParams& pp = params_;
    const Vector q = post_reception_distribution(D, gamma);
    const double y = x_Sj * x_Sj;
    const long nu = cutoff_nu(D, x_Sj, pp);
    const double g_abar2 = g_from(D, pp.abar2(), q);
    const double g_a2 = g_from(D, pp.a2(), q);
    const double g_1 = g_from(D, 1.0, q);
    const double g_c2 = g_from(D, pp.c2(), q);
    Vector v = q;
    for (long i = D; i < nu; ++i) v = p1e_.apply(v);
    const double f_1 = dot(resolvent_row(1.0), v);
    const double f_c2 = std::pow(pp.c2(), static_cast<double>(nu)) * dot(resolvent_row(pp.c2()), v);
    return g_abar2 * y + pp.mbar * (g_a2 - g_1) - (pp.B * f_1 + y * (g_c2 - f_c2));
}

}  // namespace etmc
