#pragma once

#include <string>
#include <vector>

#include "etmc/lookahead.hpp"

namespace etmc {

/// Necessary lower limit on the ultimate bound: mbar ln(a^2) / ln(c^2 / abar^2).
double compute_B0(const PlantParams& params);

struct BstarDetails {
    double P1 = 0, P2 = 0, P3 = 0, P4 = 0;
    double b0 = 0;
    double f_at_b0 = 0;
    double slope_at_b0 = 0;
    bool increasing_at_b0 = false;
    double bstar = 0;
};

/// F(B) from the sufficient-bound construction; exposed for tests.
double bstar_objective(const PlantParams& params, double B);
BstarDetails compute_Bstar_details(const PlantParams& params);
double compute_Bstar(const PlantParams& params);

/// Z_theta(b) = b^theta d^T (I - b P1E)^{-1}.
Vector z_theta(const Lookahead& lk, double theta, double b);
Vector q_vector(const Lookahead& lk, double theta);
Vector q_x_vector(const Lookahead& lk, double theta, double X);

struct FeasibilityCheck {
    bool feasible = false;
    Vector q;
    /// min_i(-Q_i); positive iff feasible.
    double margin = 0;
};
FeasibilityCheck check_feasible_D(const Lookahead& lk, long D);

/// Upper bound R(theta) = Q(theta) P0^{theta-1} P1 delta_gamma on J^theta.
double r_bound(const Lookahead& lk, long theta, ChannelState gamma);

struct C0Result {
    long value = 0;
    bool unbounded = false;
};
inline constexpr long kC0ScanCap = 1'000'000;

/// Largest B >= 0 with Q_X(D + B) < 0; DomainError unless Q(D) < 0.
C0Result c0_of_X(const Lookahead& lk, double X, long D);
/// Same scan on Q itself.
C0Result c0_infinity(const Lookahead& lk, long D);

/// max_i d^T P1E (I - P1E)^{-2} delta_i.
double c1_constant(const ChannelModel& model);

double tf_bound_state(const Lookahead& lk, double X, long D);
double tf_bound_asymptotic(const Lookahead& lk, long D);

/// Default X grid for state-dependent bounds and F_X buckets: B 2^m, m in [-2, 14].
std::vector<double> default_x_grid(double B);

struct StateBound {
    double X = 0;
    double bound = 0;
};

struct CertificationReport {
    long D = 0;
    double rho_p1e = 0;
    bool spectral_feasible = false;
    double b0 = 0;
    double bstar = 0;
    BstarDetails bstar_details;
    bool bound_above_bstar = false;
    Vector q_at_D;
    bool q_feasible = false;
    double q_margin = 0;
    long c0_inf = 0;
    bool c0_unbounded = false;
    double c1 = 0;
    double tf_inf_bound = 1;
    std::vector<StateBound> tf_state_bounds;
    std::vector<std::string> notes;

    /// Spectral feasibility, B > B* and Q(D) < 0.
    bool certified() const noexcept { return spectral_feasible && bound_above_bstar && q_feasible; }
};

CertificationReport certify(const ChannelModel& model, const PlantParams& params, long D,
                            const std::vector<double>& x_grid);

}  // namespace etmc
