#include "etmc/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "etmc/certify.hpp"
#include "etmc/errors.hpp"

namespace etmc {

void require_valid(const TrialConfig& cfg) {
    require_valid(cfg.params);
    require_valid(cfg.model);
    if (cfg.D < 1) throw DomainError("D must be >= 1");
    if (cfg.horizon < 1) throw DomainError("horizon must be >= 1");
    if (!std::isfinite(cfg.x0)) throw DomainError("x0 must be finite");
    if (!cfg.gamma0_dist.empty() &&
        (cfg.gamma0_dist.size() != cfg.model.n() || !is_prob_vector(cfg.gamma0_dist)))
        throw DomainError("gamma0_dist is not a probability vector over the channel states");
}

double envelope(long k, double x0, const PlantParams& params) {
    return std::max(std::pow(params.c2(), static_cast<double>(k)) * x0 * x0, params.B);
}

TrialRecord run_trial(const TrialConfig& cfg) {
    require_valid(cfg);
    return run_trial(cfg, Lookahead(cfg.model, cfg.params));
}

TrialRecord run_trial(const TrialConfig& cfg, const Lookahead& lk) {
    if (!lk.spectral_feasible()) throw DivergentSeries(cfg.params.a2(), cfg.params.a2() * lk.rho_p1e());
    const ChannelModel& model = cfg.model;
    const PlantParams& params = cfg.params;
    const long K = cfg.horizon;
    const std::size_t len = static_cast<std::size_t>(K) + 1;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    TrialRecord rec;
    rec.x.resize(len);
    rec.xhat_plus.resize(len);
    rec.t.assign(len, 0);
    rec.r.assign(len, 0);
    rec.gamma.resize(len);
    rec.G.assign(len, nan);

    CounterRng rng(cfg.seed, 0);
    const ProbVector gamma0 = cfg.gamma0_dist.empty() ? uniform_distribution(model.n()) : cfg.gamma0_dist;

    // k = 0: the initial reception (S_0 = 0).
    ChannelState gamma = sample_distribution(gamma0, rng.uniform());
    LoopState s = apply_reception(initial_state(cfg.x0), true);
    PolicyState ps{cfg.D, false, 0, cfg.x0};
    rec.x[0] = s.x;
    rec.xhat_plus[0] = s.xhat_plus;
    rec.t[0] = 1;
    rec.r[0] = 1;
    rec.gamma[0] = gamma.index;
    rec.receptions.push_back(0);
    ProbVector p = model.p1.column(gamma.zero_based());
    gamma = step_state(model, gamma, true, rng);
    s = advance(s, params, sample_noise(cfg.noise, params.M, rng));

    for (long k = 1; k <= K; ++k) {
        const auto i = static_cast<std::size_t>(k);
        rec.x[i] = s.x;
        rec.gamma[i] = gamma.index;
        try {
            const SensorInfo info{k, s.x, s.z, ps.Rk, ps.x_Rk, p};
            const Decision dec = decide(ps, info, lk);
            ps = dec.next;
            if (dec.G) rec.G[i] = *dec.G;
            const bool t = dec.transmit;
            const bool r = sample_reception(model, gamma, t, rng);
            const ChannelState next_gamma = step_state(model, gamma, t, rng);
            const double v = sample_noise(cfg.noise, params.M, rng);

            rec.t[i] = t;
            rec.r[i] = r;
            p = belief_update(model, p, t, r, r ? std::optional<ChannelState>(gamma) : std::nullopt);
            s = apply_reception(s, r);
            rec.xhat_plus[i] = s.xhat_plus;
            if (r) {
                ps = on_reception(ps, k, s.x);
                rec.receptions.push_back(k);
            }
            s = advance(s, params, v);
            gamma = next_gamma;
        } catch (const std::exception& e) {
            throw StepFailure(e.what(), k);
        }
    }
    return rec;
}

Crossing first_crossing(const TrialRecord& rec, double X) {
    Crossing out;
    if (rec.x[0] * rec.x[0] < X) {
        out.kind = Crossing::Kind::Initial;
        return out;
    }
    long sent = 0;
    long next = 1;
    for (std::size_t j = 1; j < rec.receptions.size(); ++j) {
        const long S = rec.receptions[j];
        for (; next <= S; ++next) sent += rec.t[static_cast<std::size_t>(next)];
        const double xs = rec.x[static_cast<std::size_t>(S)];
        if (xs * xs < X) {
            out.kind = Crossing::Kind::Qualified;
            out.transmissions = sent;
            out.elapsed = S;
            return out;
        }
    }
    return out;
}

std::vector<TfBucket> aggregate_crossings(const std::vector<std::vector<Crossing>>& per_trial,
                                          const std::vector<double>& X_grid) {
    std::vector<TfBucket> buckets(X_grid.size());
    for (std::size_t b = 0; b < X_grid.size(); ++b) {
        TfBucket& bk = buckets[b];
        bk.X_lo = X_grid[b];
        if (b + 1 < X_grid.size()) bk.X_hi = X_grid[b + 1];
        double sum_t = 0, sum_e = 0;
        for (const auto& trial : per_trial) {
            const Crossing& c = trial[b];
            if (c.kind == Crossing::Kind::Initial) ++bk.excluded_initial;
            else if (c.kind == Crossing::Kind::Never) ++bk.excluded_never;
            else {
                ++bk.count;
                sum_t += static_cast<double>(c.transmissions);
                sum_e += static_cast<double>(c.elapsed);
            }
        }
        if (bk.count == 0) continue;
        const double ratio = sum_t / sum_e;
        bk.tf_empirical = ratio;
        const double n = static_cast<double>(bk.count);
        if (bk.count == 1) {
            bk.se = std::sqrt(ratio * (1.0 - ratio) / sum_e);
            continue;
        }
        // Delta-method standard error of a ratio of means.
        double ss = 0;
        for (const auto& trial : per_trial) {
            const Crossing& c = trial[b];
            if (c.kind != Crossing::Kind::Qualified) continue;
            const double res = static_cast<double>(c.transmissions) - ratio * static_cast<double>(c.elapsed);
            ss += res * res;
        }
        const double mean_e = sum_e / n;
        bk.se = std::sqrt(ss / (n * (n - 1.0))) / mean_e;
    }
    return buckets;
}

std::vector<TfBucket> empirical_tf_state(const std::vector<TrialRecord>& records, const std::vector<double>& X_grid) {
    std::vector<std::vector<Crossing>> per_trial;
    per_trial.reserve(records.size());
    for (const auto& rec : records) {
        std::vector<Crossing> row;
        for (double X : X_grid) row.push_back(first_crossing(rec, X));
        per_trial.push_back(std::move(row));
    }
    return aggregate_crossings(per_trial, X_grid);
}

namespace {

struct TrialSummary {
    std::vector<double> x2;
    std::vector<long> sent_cum;
    std::vector<Crossing> crossings;
};

// Pairwise sum of x2 over trials [lo, hi); the tree depends only on the indices.
std::vector<double> pairwise_x2(const std::vector<TrialSummary>& s, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return s[lo].x2;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<double> left = pairwise_x2(s, lo, mid);
    const std::vector<double> right = pairwise_x2(s, mid, hi);
    for (std::size_t k = 0; k < left.size(); ++k) left[k] += right[k];
    return left;
}

}  // namespace

EnsembleStats run_ensemble(const TrialConfig& cfg, long trials, unsigned threads, const std::vector<double>& X_grid) {
    if (trials < 1) throw DomainError("trials must be >= 1");
    require_valid(cfg);
    const std::vector<double> grid = X_grid.empty() ? default_x_grid(cfg.params.B) : X_grid;
    const auto n_trials = static_cast<std::size_t>(trials);
    std::vector<TrialSummary> summaries(n_trials);

    unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_trials));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        const Lookahead lk(cfg.model, cfg.params);
        TrialConfig tc = cfg;
        for (std::size_t i = next++; i < n_trials; i = next++) {
            try {
                tc.seed = cfg.seed + i;
                const TrialRecord rec = run_trial(tc, lk);
                TrialSummary& out = summaries[i];
                out.x2.resize(rec.x.size());
                out.sent_cum.resize(rec.x.size());
                long sent = 0;
                for (std::size_t k = 0; k < rec.x.size(); ++k) {
                    out.x2[k] = rec.x[k] * rec.x[k];
                    if (k > 0) sent += rec.t[k];
                    out.sent_cum[k] = sent;
                }
                for (double X : grid) out.crossings.push_back(first_crossing(rec, X));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n_trials;
                return;
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    EnsembleStats st;
    st.trials = trials;
    const std::size_t len = static_cast<std::size_t>(cfg.horizon) + 1;
    st.mean_x2 = pairwise_x2(summaries, 0, n_trials);
    for (double& m : st.mean_x2) m /= static_cast<double>(trials);
    st.envelope.resize(len);
    st.tf_cum.assign(len, 0.0);
    for (std::size_t k = 0; k < len; ++k) {
        st.envelope[k] = envelope(static_cast<long>(k), cfg.x0, cfg.params);
        if (k == 0) continue;
        long total = 0;
        for (const auto& s : summaries) total += s.sent_cum[k];
        st.tf_cum[k] = static_cast<double>(total) / (static_cast<double>(trials) * static_cast<double>(k));
    }
    if (trials > 1) {
        const double K = static_cast<double>(cfg.horizon);
        const double mean = st.tf_cum[len - 1];
        double ss = 0;
        for (const auto& s : summaries) {
            const double f = static_cast<double>(s.sent_cum[len - 1]) / K - mean;
            ss += f * f;
        }
        st.tf_terminal_se = std::sqrt(ss / (static_cast<double>(trials) * (static_cast<double>(trials) - 1.0)));
    }
    std::vector<std::vector<Crossing>> crossings;
    crossings.reserve(n_trials);
    for (auto& s : summaries) crossings.push_back(std::move(s.crossings));
    st.tf_state_buckets = aggregate_crossings(crossings, grid);
    return st;
}

}  // namespace etmc
