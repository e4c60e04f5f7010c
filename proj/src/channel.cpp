#include "etmc/channel.hpp"

#include <cmath>
#include <sstream>

#include "etmc/errors.hpp"

namespace etmc {

bool is_prob_vector(const ProbVector& p, double tol) {
    if (p.empty()) return false;
    double s = 0.0;
    for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x)) return false;
        s += x;
    }
    return std::abs(s - 1.0) <= tol;
}

ProbVector uniform_distribution(std::size_t n) {
    return ProbVector(n, 1.0 / static_cast<double>(n));
}

ProbVector unit_vector(std::size_t n, ChannelState s) {
    if (s.index < 1 || static_cast<std::size_t>(s.index) > n) throw DomainError("channel state out of range");
    ProbVector p(n, 0.0);
    p[s.zero_based()] = 1.0;
    return p;
}

ChannelModel ChannelModel::make(SquareMatrix p0, SquareMatrix p1, Vector e) {
    ChannelModel m{std::move(p0), std::move(p1), std::move(e), {}};
    m.d.resize(m.e.size());
    for (std::size_t i = 0; i < m.e.size(); ++i) m.d[i] = 1.0 - m.e[i];
    return m;
}

SquareMatrix ChannelModel::p1e() const {
    SquareMatrix k = p1;
    for (std::size_t i = 0; i < k.order(); ++i)
        for (std::size_t j = 0; j < k.order(); ++j) k(i, j) *= e[j];
    return k;
}

namespace {

void check_stochastic(const SquareMatrix& p, const char* name, std::vector<ChannelViolation>& out) {
    for (std::size_t j = 0; j < p.order(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.order(); ++i) {
            const double x = p(i, j);
            if (!(x >= 0.0 && x <= 1.0)) {
                std::ostringstream w;
                w << name << " entry (" << i + 1 << "," << j + 1 << ")";
                out.push_back({"probability out of range", w.str(), x});
            }
            s += x;
        }
        if (std::abs(s - 1.0) > 1e-12) {
            std::ostringstream w;
            w << name << " column " << j + 1;
            out.push_back({"not column-stochastic", w.str(), s - 1.0});
        }
    }
}

}  // namespace

std::vector<ChannelViolation> validate(const ChannelModel& model) {
    std::vector<ChannelViolation> out;
    const std::size_t n = model.p0.order();
    if (n == 0) {
        out.push_back({"dimension mismatch", "P0 is empty", 0.0});
        return out;
    }
    if (model.p1.order() != n) out.push_back({"dimension mismatch", "P1", static_cast<double>(model.p1.order())});
    if (model.e.size() != n) out.push_back({"dimension mismatch", "e", static_cast<double>(model.e.size())});
    if (model.d.size() != model.e.size()) out.push_back({"dimension mismatch", "d", static_cast<double>(model.d.size())});
    if (!out.empty()) return out;

    check_stochastic(model.p0, "P0", out);
    check_stochastic(model.p1, "P1", out);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(model.e[i] >= 0.0 && model.e[i] <= 1.0))
            out.push_back({"probability out of range", "e[" + std::to_string(i + 1) + "]", model.e[i]});
        if (model.d[i] != 1.0 - model.e[i])
            out.push_back({"probability out of range", "d[" + std::to_string(i + 1) + "] != 1 - e", model.d[i]});
    }
    return out;
}

void require_valid(const ChannelModel& model) {
    const auto violations = validate(model);
    if (violations.empty()) return;
    std::ostringstream msg;
    msg << "invalid channel model:";
    for (const auto& v : violations) msg << " [" << v.kind << ": " << v.where << ", " << v.deviation << "]";
    throw DomainError(msg.str());
}

ChannelState sample_distribution(std::span<const double> p, double u) {
    double cdf = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) last_positive = i;
        cdf += p[i];
        if (u < cdf) return ChannelState{static_cast<int>(i + 1)};
    }
    // Roundoff left u above the accumulated mass.
    return ChannelState{static_cast<int>(last_positive + 1)};
}

ChannelState sample_column(const SquareMatrix& p, ChannelState gamma, double u) {
    return sample_distribution(p.column(gamma.zero_based()), u);
}

ChannelState step_state(const ChannelModel& model, ChannelState gamma, bool transmit, CounterRng& rng) {
    return sample_column(transmit ? model.p1 : model.p0, gamma, rng.uniform());
}

bool sample_reception(const ChannelModel& model, ChannelState gamma, bool transmit, CounterRng& rng) {
    const double u = rng.uniform();
    return transmit && u < model.d[gamma.zero_based()];
}

ProbVector belief_update(const ChannelModel& model, const ProbVector& p, bool transmit, bool received,
                         std::optional<ChannelState> gamma_if_received) {
    if (received && !transmit) throw DomainError("inconsistent reception: r = 1 requires t = 1");
    ProbVector next;
    if (received) {
        if (!gamma_if_received) throw DomainError("inconsistent reception: channel state feedback missing");
        next = model.p1.column(gamma_if_received->zero_based());
    } else {
        next = (transmit ? model.p1 : model.p0).apply(p);
    }
    double s = 0.0;
    for (double x : next) s += x;
    if (std::abs(s - 1.0) > 1e-9) throw NumericalFailure("belief_update: probability mass drifted to " + std::to_string(s), 0);
    for (double& x : next) x /= s;
    return next;
}

}  // namespace etmc
