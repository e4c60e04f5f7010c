#include "etmc/policy.hpp"

#include "etmc/errors.hpp"

namespace etmc {

Decision decide(const PolicyState& ps, const SensorInfo& info, const Lookahead& lk) {
    if (info.k <= ps.Rk) throw DomainError("decide requires k > R_k");
    Decision out;
    out.next = ps;
    if (ps.triggered) {
        out.transmit = true;
        return out;
    }
    const double G = lk.lookahead_G(info, ps.D);
    out.G = G;
    if (G >= 0.0) {
        out.transmit = true;
        out.next.triggered = true;
    }
    return out;
}

PolicyState on_reception(const PolicyState& ps, long k, double x_k) {
    PolicyState out = ps;
    out.triggered = false;
    out.Rk = k;
    out.x_Rk = x_k;
    return out;
}

bool nominal_decide(long k0, long D, long k) {
    if (k < k0) throw DomainError("nominal_decide requires k >= k0");
    return k >= k0 + D;
}

}  // namespace etmc
