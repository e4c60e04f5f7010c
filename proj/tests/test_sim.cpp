#include <doctest.h>

#include <cstring>

#include "etmc/certify.hpp"
#include "etmc/errors.hpp"
#include "etmc/sim.hpp"
#include "fixtures.hpp"

using namespace etmc;

namespace {

TrialConfig reference_trial(long D, long horizon, std::uint64_t seed) {
    TrialConfig cfg;
    cfg.params = fixtures::reference_params();
    cfg.model = fixtures::reference_model();
    cfg.D = D;
    cfg.x0 = 15.5 * cfg.params.B;
    cfg.horizon = horizon;
    cfg.seed = seed;
    return cfg;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

bool same_record(const TrialRecord& a, const TrialRecord& b) {
    return same_bits(a.x, b.x) && same_bits(a.xhat_plus, b.xhat_plus) && same_bits(a.G, b.G) && a.t == b.t &&
           a.r == b.r && a.gamma == b.gamma && a.receptions == b.receptions;
}

TrialRecord hand_record(std::vector<double> x, std::vector<std::uint8_t> t, std::vector<std::uint8_t> r) {
    TrialRecord rec;
    rec.x = std::move(x);
    rec.t = std::move(t);
    rec.r = std::move(r);
    for (std::size_t k = 0; k < rec.r.size(); ++k)
        if (rec.r[k]) rec.receptions.push_back(static_cast<long>(k));
    return rec;
}

}  // namespace

TEST_CASE("envelope") {
    const auto p = fixtures::reference_params();
    CHECK(envelope(0, 279, p) == 279.0 * 279.0);
    CHECK(envelope(0, 1, p) == p.B);
    CHECK(envelope(100000, 279, p) == p.B);
    long k = 0;
    while (std::pow(p.c2(), static_cast<double>(k)) * 77841 > 18) ++k;
    CHECK(k == 208);
    CHECK(envelope(207, 279, p) > p.B);
    CHECK(envelope(208, 279, p) == p.B);
}

TEST_CASE("trial configuration validation") {
    auto cfg = reference_trial(1, 10, 1);
    CHECK_NOTHROW(require_valid(cfg));
    cfg.horizon = 0;
    CHECK_THROWS_AS(require_valid(cfg), DomainError);
    cfg = reference_trial(0, 10, 1);
    CHECK_THROWS_AS(require_valid(cfg), DomainError);
    cfg = reference_trial(1, 10, 1);
    cfg.gamma0_dist = {0.5, 0.5};
    CHECK_THROWS_AS(require_valid(cfg), DomainError);
    cfg = reference_trial(1, 10, 1);
    cfg.x0 = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(require_valid(cfg), DomainError);
    cfg = reference_trial(1, 10, 1);
    cfg.model.e.assign(4, 1.0);
    cfg.model.d.assign(4, 0.0);
    CHECK_THROWS_AS(run_trial(cfg), DivergentSeries);
}

TEST_CASE("trial record bookkeeping") {
    for (long D : {1, 2, 3}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto rec = run_trial(reference_trial(D, 600, seed));
            REQUIRE(rec.x.size() == 601);
            CHECK(rec.receptions.front() == 0);
            CHECK(rec.x[0] == 15.5 * 18);
            std::vector<long> from_r;
            for (std::size_t k = 0; k < rec.r.size(); ++k) {
                if (rec.r[k]) {
                    CHECK(rec.t[k] == 1);
                    from_r.push_back(static_cast<long>(k));
                }
                CHECK(rec.gamma[k] >= 1);
                CHECK(rec.gamma[k] <= 4);
                if (rec.r[k]) CHECK(rec.xhat_plus[k] == rec.x[k]);
            }
            CHECK(from_r == rec.receptions);
            CHECK(std::is_sorted(rec.receptions.begin(), rec.receptions.end()));
            CHECK(std::adjacent_find(rec.receptions.begin(), rec.receptions.end()) == rec.receptions.end());

            // Each window (S_j, S_j+1] reads 0^m 1^l with l >= 1; G is evaluated exactly on
            // the untriggered steps.
            for (std::size_t j = 0; j < rec.receptions.size(); ++j) {
                const long lo = rec.receptions[j] + 1;
                const bool closed = j + 1 < rec.receptions.size();
                const long hi = closed ? rec.receptions[j + 1] : 600;
                bool ones = false;
                for (long k = lo; k <= hi; ++k) {
                    const auto i = static_cast<std::size_t>(k);
                    if (rec.t[i]) ones = true;
                    else CHECK_FALSE(ones);
                    CHECK(std::isnan(rec.G[i]) == (k > lo && rec.t[i - 1]));
                    if (!std::isnan(rec.G[i])) CHECK((rec.G[i] >= 0) == static_cast<bool>(rec.t[i]));
                }
                if (closed) CHECK(rec.t[static_cast<std::size_t>(hi)] == 1);
            }
        }
    }
}

TEST_CASE("trials are deterministic") {
    const auto cfg = reference_trial(2, 400, 1234);
    const auto a = run_trial(cfg);
    const auto b = run_trial(cfg);
    CHECK(same_record(a, b));
    const Lookahead lk(cfg.model, cfg.params);
    CHECK(same_record(a, run_trial(cfg, lk)));
    auto other = cfg;
    other.seed = 1235;
    CHECK_FALSE(same_record(a, run_trial(other)));
}

TEST_CASE("single-trial ensemble equals the trial") {
    const auto cfg = reference_trial(1, 300, 77);
    const auto rec = run_trial(cfg);
    const auto st = run_ensemble(cfg, 1, 1);
    REQUIRE(st.mean_x2.size() == 301);
    long sent = 0;
    for (std::size_t k = 0; k <= 300; ++k) {
        CHECK(st.mean_x2[k] == rec.x[k] * rec.x[k]);
        CHECK(st.envelope[k] == envelope(static_cast<long>(k), cfg.x0, cfg.params));
        if (k == 0) continue;
        sent += rec.t[k];
        CHECK(st.tf_cum[k] == doctest::Approx(static_cast<double>(sent) / static_cast<double>(k)).epsilon(1e-15));
    }
    CHECK(st.trials == 1);
}

TEST_CASE("ensemble results do not depend on the thread count") {
    const auto cfg = reference_trial(1, 300, 5);
    const auto a = run_ensemble(cfg, 64, 1);
    const auto b = run_ensemble(cfg, 64, 4);
    const auto c = run_ensemble(cfg, 64, 7);
    CHECK(same_bits(a.mean_x2, b.mean_x2));
    CHECK(same_bits(a.mean_x2, c.mean_x2));
    CHECK(same_bits(a.tf_cum, b.tf_cum));
    CHECK(a.tf_terminal_se == b.tf_terminal_se);
    REQUIRE(a.tf_state_buckets.size() == b.tf_state_buckets.size());
    for (std::size_t i = 0; i < a.tf_state_buckets.size(); ++i) {
        CHECK(a.tf_state_buckets[i].count == c.tf_state_buckets[i].count);
        CHECK(std::memcmp(&a.tf_state_buckets[i].tf_empirical, &c.tf_state_buckets[i].tf_empirical, sizeof(double)) == 0);
    }
    for (double f : a.tf_cum) {
        CHECK(f >= 0);
        CHECK(f <= 1);
    }
    // trial i uses seed + i
    const auto first = run_ensemble(cfg, 1, 1);
    auto shifted = cfg;
    shifted.seed = cfg.seed + 3;
    CHECK(run_trial(shifted).x[100] * run_trial(shifted).x[100] ==
          run_ensemble(shifted, 1, 1).mean_x2[100]);
    CHECK(first.mean_x2[0] == cfg.x0 * cfg.x0);
    CHECK_THROWS_AS(run_ensemble(cfg, 0), DomainError);
}

TEST_CASE("disjoint seed ranges agree") {
    const long K = 300, n = 1000;
    std::vector<std::vector<double>> s(2, std::vector<double>(K + 1)), s2 = s;
    for (int half = 0; half < 2; ++half) {
        const Lookahead lk(fixtures::reference_model(), fixtures::reference_params());
        for (long i = 0; i < n; ++i) {
            const auto rec = run_trial(reference_trial(1, K, static_cast<std::uint64_t>(half * 1'000'000 + i)), lk);
            for (long k = 0; k <= K; ++k) {
                const double v = rec.x[static_cast<std::size_t>(k)] * rec.x[static_cast<std::size_t>(k)];
                s[half][static_cast<std::size_t>(k)] += v;
                s2[half][static_cast<std::size_t>(k)] += v * v;
            }
        }
    }
    for (std::size_t k = 1; k <= static_cast<std::size_t>(K); ++k) {
        double m[2], var[2];
        for (int h = 0; h < 2; ++h) {
            m[h] = s[h][k] / n;
            var[h] = (s2[h][k] / n - m[h] * m[h]) / (n - 1);
        }
        CHECK(std::abs(m[0] - m[1]) <= 5 * std::sqrt(var[0] + var[1]));
    }
}

TEST_CASE("performance at the next reception is nonpositive on average") {
    const auto p = fixtures::reference_params();
    const Lookahead lk(fixtures::reference_model(), p);
    for (long D : {1, 2}) {
        double s = 0, s2 = 0;
        long n = 0;
        for (std::uint64_t seed = 0; seed < 500; ++seed) {
            const auto rec = run_trial(reference_trial(D, 600, 9000 + seed), lk);
            for (std::size_t j = 1; j < rec.receptions.size(); ++j) {
                const long R = rec.receptions[j - 1], S = rec.receptions[j];
                const double h = performance_h(S, rec.x[static_cast<std::size_t>(S)], R, rec.x[static_cast<std::size_t>(R)], p);
                s += h;
                s2 += h * h;
                ++n;
            }
        }
        const double mean = s / static_cast<double>(n);
        const double se = std::sqrt((s2 / static_cast<double>(n) - mean * mean) / static_cast<double>(n - 1));
        INFO("D=" << D << " mean h=" << mean << " se=" << se << " n=" << n);
        CHECK(mean <= 3 * se);
    }
}

TEST_CASE("perfect channel with negligible noise stays under the envelope") {
    auto cfg = reference_trial(1, 800, 3);
    cfg.model = fixtures::lossless_model();
    cfg.params.M = 1e-12;
    cfg.params.mbar = cfg.params.M / (cfg.params.a2() - 1);
    cfg.x0 = 1e4;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        const auto rec = run_trial(cfg);
        for (std::size_t k = 0; k < rec.x.size(); ++k)
            CHECK(rec.x[k] * rec.x[k] <= envelope(static_cast<long>(k), cfg.x0, cfg.params) * (1 + 1e-9));
        for (std::size_t k = 1; k < rec.t.size(); ++k) CHECK(rec.r[k] == rec.t[k]);
    }
}

TEST_CASE("long-run transmission fraction stays under the asymptotic bound") {
    const auto cfg = reference_trial(1, 3000, 500);
    const auto st = run_ensemble(cfg, 100, 0);
    const Lookahead lk(cfg.model, cfg.params);
    CHECK(st.tf_cum.back() <= tf_bound_asymptotic(lk, 1) + 3 * st.tf_terminal_se);
    CHECK(st.tf_terminal_se > 0);
}

TEST_CASE("first crossing") {
    // x^2: 100, 60, 40, 20, 8, 2.25 with receptions at 0, 2, 4, 5
    const auto rec = hand_record({10, std::sqrt(60.0), std::sqrt(40.0), std::sqrt(20.0), std::sqrt(8.0), 1.5},
                                 {1, 0, 1, 0, 1, 1}, {1, 0, 1, 0, 1, 1});
    const auto c = first_crossing(rec, 10);
    CHECK(c.kind == Crossing::Kind::Qualified);
    CHECK(c.elapsed == 4);
    CHECK(c.transmissions == 2);
    const auto c41 = first_crossing(rec, 41);
    CHECK(c41.kind == Crossing::Kind::Qualified);
    CHECK(c41.elapsed == 2);
    CHECK(c41.transmissions == 1);
    CHECK(first_crossing(rec, 101).kind == Crossing::Kind::Initial);
    CHECK(first_crossing(rec, 1).kind == Crossing::Kind::Never);
    CHECK(first_crossing(rec, 2.25).kind == Crossing::Kind::Never);  // strict inequality
}

TEST_CASE("bucket aggregation") {
    const auto a = hand_record({10, 5, 1}, {1, 1, 1}, {1, 0, 1});       // crosses 50 at S=2 with 2 sent
    const auto b = hand_record({10, 9, 8, 2}, {1, 0, 1, 1}, {1, 0, 0, 1});  // crosses 50 at S=3 with 2 sent
    const auto c = hand_record({5, 1}, {1, 1}, {1, 1});                   // starts below 50
    const auto d = hand_record({10, 9}, {1, 0}, {1, 0});                  // never receives again
    const auto buckets = empirical_tf_state({a, b, c, d}, {50, 200});
    REQUIRE(buckets.size() == 2);
    CHECK(buckets[0].X_lo == 50);
    CHECK(buckets[0].X_hi == 200);
    CHECK(buckets[0].count == 2);
    CHECK(buckets[0].excluded_initial == 1);
    CHECK(buckets[0].excluded_never == 1);
    CHECK(buckets[0].tf_empirical == doctest::Approx(4.0 / 5.0));
    // delta-method SE: residuals 2 - 0.8*2 = 0.4 and 2 - 0.8*3 = -0.4
    CHECK(buckets[0].se == doctest::Approx(std::sqrt(0.32 / 2.0) / 2.5));
    CHECK(std::isinf(buckets[1].X_hi));
    CHECK(buckets[1].count == 0);
    CHECK(buckets[1].excluded_initial == 4);
    CHECK(std::isnan(buckets[1].tf_empirical));

    const auto single = empirical_tf_state({a}, {50});
    CHECK(single[0].count == 1);
    CHECK(single[0].se == doctest::Approx(std::sqrt(1.0 * 0.0 / 2.0)));
}
