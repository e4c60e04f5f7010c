#include "etmc/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "etmc/errors.hpp"

namespace etmc {

double compute_B0(const PlantParams& params) {
    return params.mbar * std::log(params.a2()) / std::log(params.c2() / params.abar2());
}

namespace {

struct BstarConstants {
    double P1, P2, P3, P4;
};

BstarConstants bstar_constants(const PlantParams& p) {
    const double a2 = p.a2();
    const double c2 = p.c2();
    const double ab2 = p.abar2();
    return {std::log(a2 / ab2), std::log(a2 * c2 / ab2), std::log(1.0 / c2),
            std::log(std::log(1.0 / ab2) / (p.mbar * std::log(a2)))};
}

double objective(const PlantParams& p, const BstarConstants& k, double B) {
    const double U = std::exp(k.P3 * k.P4 / k.P2) * std::pow(B, k.P1 / k.P2);
    const double w = (std::log(B) + k.P4) / k.P2;
    const double Y = std::pow(p.abar2(), w) * U + p.mbar * std::pow(p.a2(), w);
    return Y - p.mbar - B;
}

}  // namespace

double bstar_objective(const PlantParams& params, double B) {
    return objective(params, bstar_constants(params), B);
}

BstarDetails compute_Bstar_details(const PlantParams& params) {
    const BstarConstants k = bstar_constants(params);
    BstarDetails out;
    out.P1 = k.P1;
    out.P2 = k.P2;
    out.P3 = k.P3;
    out.P4 = k.P4;
    out.b0 = compute_B0(params);
    out.bstar = out.b0;
    const auto F = [&](double B) { return objective(params, k, B); };

    const double b0 = out.b0;
    const double h = 1e-6 * b0;
    out.f_at_b0 = F(b0);
    out.slope_at_b0 = (F(b0 + h) - F(b0 - h)) / (2.0 * h);
    out.increasing_at_b0 = out.slope_at_b0 > 0.0;
    if (!out.increasing_at_b0) return out;

    // Concave F rising at B0: its last zero lies past the region where F > 0.
    double lo = std::numeric_limits<double>::quiet_NaN();
    if (F(b0) > 0.0) lo = b0;
    else if (F(b0 + h) > 0.0) lo = b0 + h;
    double hi = 2.0 * b0;
    for (;; hi *= 2.0) {
        if (hi > 1e12 * b0) {
            if (std::isnan(lo)) return out;  // F never positive: B0 already suffices
            throw NumericalFailure("bracket not found for B*", 0);
        }
        if (F(hi) > 0.0) lo = hi;
        else if (!std::isnan(lo)) break;
    }
    for (int i = 0; i < 200 && (hi - lo) > 1e-13 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (F(mid) > 0.0 ? lo : hi) = mid;
    }
    out.bstar = 0.5 * (lo + hi);
    return out;
}

double compute_Bstar(const PlantParams& params) { return compute_Bstar_details(params).bstar; }

Vector z_theta(const Lookahead& lk, double theta, double b) {
    return scaled(lk.resolvent_row(b), std::pow(b, theta));
}

namespace {

Vector q_with_scale(const Lookahead& lk, double theta, double scale) {
    const PlantParams& p = lk.params();
    const Vector z_ab = z_theta(lk, theta, p.abar2());
    const Vector z_c = z_theta(lk, theta, p.c2());
    const Vector z_a = z_theta(lk, theta, p.a2());
    const Vector z_1 = z_theta(lk, theta, 1.0);
    Vector q(z_ab.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = (z_ab[i] - z_c[i]) * scale + p.mbar * (z_a[i] - z_1[i]);
    return q;
}

bool all_negative(const Vector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x < 0.0; });
}

}  // namespace

Vector q_vector(const Lookahead& lk, double theta) {
    const PlantParams& p = lk.params();
    return q_with_scale(lk, theta, p.B * std::pow(p.c2(), -theta));
}

Vector q_x_vector(const Lookahead& lk, double theta, double X) {
    const PlantParams& p = lk.params();
    return q_with_scale(lk, theta, std::max(X, p.B * std::pow(p.c2(), -theta)));
}

FeasibilityCheck check_feasible_D(const Lookahead& lk, long D) {
    FeasibilityCheck out;
    out.q = q_vector(lk, static_cast<double>(D));
    out.feasible = all_negative(out.q);
    out.margin = -*std::max_element(out.q.begin(), out.q.end());
    return out;
}

double r_bound(const Lookahead& lk, long theta, ChannelState gamma) {
    if (theta < 1) throw DomainError("r_bound requires theta >= 1");
    const Vector q = q_vector(lk, static_cast<double>(theta));
    const Vector dist = lk.p0_power(theta - 1).apply(lk.model().p1.column(gamma.zero_based()));
    return dot(q, dist);
}

namespace {

template <class QFn>
C0Result scan_c0(long D, QFn&& q_at) {
    if (!all_negative(q_at(D))) throw DomainError("Q(D) is not negative for D = " + std::to_string(D));
    C0Result out;
    for (long b = 1; b <= kC0ScanCap; ++b) {
        if (!all_negative(q_at(D + b))) {
            out.value = b - 1;
            return out;
        }
    }
    out.value = kC0ScanCap;
    out.unbounded = true;
    return out;
}

double tf_from(const C0Result& c0, double c1) {
    if (c0.unbounded || c1 == 0.0) return 0.0;
    return c1 / (static_cast<double>(c0.value) + c1);
}

}  // namespace

C0Result c0_of_X(const Lookahead& lk, double X, long D) {
    if (!check_feasible_D(lk, D).feasible) throw DomainError("Q(D) is not negative for D = " + std::to_string(D));
    return scan_c0(D, [&](long th) { return q_x_vector(lk, static_cast<double>(th), X); });
}

C0Result c0_infinity(const Lookahead& lk, long D) {
    return scan_c0(D, [&](long th) { return q_vector(lk, static_cast<double>(th)); });
}

double c1_constant(const ChannelModel& model) {
    const SquareMatrix k = model.p1e();
    const double rho = spectral_radius(k);
    if (!(rho < 1.0)) throw DivergentSeries(1.0, rho);
    const LuDecomposition lu(SquareMatrix::identity(model.n()) - k);
    const Vector row = lu.solve_transposed(lu.solve_transposed(k.apply_left(model.d)));
    return *std::max_element(row.begin(), row.end());
}

double tf_bound_state(const Lookahead& lk, double X, long D) {
    return tf_from(c0_of_X(lk, X, D), c1_constant(lk.model()));
}

double tf_bound_asymptotic(const Lookahead& lk, long D) {
    return tf_from(c0_infinity(lk, D), c1_constant(lk.model()));
}

std::vector<double> default_x_grid(double B) {
    std::vector<double> grid;
    for (int m = -2; m <= 14; ++m) grid.push_back(std::ldexp(B, m));
    return grid;
}

CertificationReport certify(const ChannelModel& model, const PlantParams& params, long D,
                            const std::vector<double>& x_grid) {
    CertificationReport rep;
    rep.D = D;
    const Lookahead lk(model, params);
    rep.rho_p1e = lk.rho_p1e();
    rep.spectral_feasible = lk.spectral_feasible();
    rep.bstar_details = compute_Bstar_details(params);
    rep.b0 = rep.bstar_details.b0;
    rep.bstar = rep.bstar_details.bstar;
    rep.bound_above_bstar = params.B > rep.bstar;
    if (!rep.bound_above_bstar) rep.notes.push_back("B <= B*");
    if (rep.rho_p1e < 1.0) rep.c1 = c1_constant(model);
    else rep.c1 = std::numeric_limits<double>::infinity();

    if (!rep.spectral_feasible) {
        rep.notes.push_back("divergent series: a^2 rho(P1E) >= 1");
        return rep;
    }
    const FeasibilityCheck fc = check_feasible_D(lk, D);
    rep.q_at_D = fc.q;
    rep.q_feasible = fc.feasible;
    rep.q_margin = fc.margin;
    if (!fc.feasible) {
        rep.notes.push_back("Q(D) not negative");
        return rep;
    }
    const C0Result c0 = c0_infinity(lk, D);
    rep.c0_inf = c0.value;
    rep.c0_unbounded = c0.unbounded;
    if (c0.unbounded) rep.notes.push_back("C0 scan hit the cap; transmission-fraction bound set to 0");
    rep.tf_inf_bound = tf_from(c0, rep.c1);
    for (double X : x_grid) rep.tf_state_bounds.push_back({X, tf_bound_state(lk, X, D)});
    return rep;
}

}  // namespace etmc
