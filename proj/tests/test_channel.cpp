#include <doctest.h>

#include <array>

#include "etmc/channel.hpp"
#include "etmc/errors.hpp"
#include "fixtures.hpp"
#include "reference.hpp"

using namespace etmc;

namespace {

// Counts over `draws` samples of a categorical, checked against p within `k` binomial SEs.
template <class Draw>
void check_frequencies(const Vector& p, long draws, double k, Draw&& draw) {
    std::vector<long> counts(p.size(), 0);
    for (long i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(draw().index - 1)];
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double f = static_cast<double>(counts[i]) / static_cast<double>(draws);
        const double se = std::sqrt(p[i] * (1 - p[i]) / static_cast<double>(draws));
        if (p[i] == 0) CHECK(counts[i] == 0);
        else CHECK(std::abs(f - p[i]) <= k * se);
    }
}

}  // namespace

TEST_CASE("validate accepts the reference channel") { CHECK(validate(fixtures::reference_model()).empty()); }

TEST_CASE("validate names a column that does not sum to one") {
    auto m = fixtures::reference_model();
    m.p0(0, 2) -= 0.1;
    const auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == "not column-stochastic");
    CHECK(v[0].where == "P0 column 3");
    CHECK(v[0].deviation == doctest::Approx(-0.1));
    CHECK_THROWS_AS(require_valid(m), DomainError);
}

TEST_CASE("validate flags out-of-range drop probabilities and dimension mismatch") {
    auto m = fixtures::reference_model();
    m.e[1] = 1.3;
    m.d[1] = -0.3;
    bool found = false;
    for (const auto& v : validate(m)) found = found || v.kind == "probability out of range";
    CHECK(found);

    auto bad = ChannelModel::make(fixtures::reference_model().p0, SquareMatrix::identity(3), {0.1, 0.2, 0.3, 0.4});
    found = false;
    for (const auto& v : validate(bad)) found = found || v.kind == "dimension mismatch";
    CHECK(found);
}

TEST_CASE("step_state follows a deterministic column") {
    auto m = fixtures::reference_model();
    for (std::size_t i = 0; i < 4; ++i) m.p1(i, 1) = i == 3 ? 1.0 : 0.0;
    CounterRng rng(1, 0);
    for (int i = 0; i < 1000; ++i) CHECK(step_state(m, ChannelState{2}, true, rng) == ChannelState{4});
}

TEST_CASE("step_state frequencies match the transition columns") {
    const auto m = fixtures::reference_model();
    CounterRng rng(42, 0);
    check_frequencies({0.5, 0.3, 0.2, 0.0}, 1'000'000, 3.0, [&] { return step_state(m, ChannelState{1}, false, rng); });
    check_frequencies({0.1, 0.1, 0.1, 0.7}, 1'000'000, 3.0, [&] { return step_state(m, ChannelState{1}, true, rng); });
}

TEST_CASE("sample_reception") {
    const auto m = fixtures::reference_model();
    CounterRng rng(8, 0);
    for (int g = 1; g <= 4; ++g) CHECK_FALSE(sample_reception(m, ChannelState{g}, false, rng));
    const auto lossless = fixtures::lossless_model();
    for (int i = 0; i < 1000; ++i) CHECK(sample_reception(lossless, ChannelState{3}, true, rng));

    const long n = 1'000'000;
    long hits = 0;
    for (long i = 0; i < n; ++i) hits += sample_reception(m, ChannelState{4}, true, rng);
    const double se = std::sqrt(0.6 * 0.4 / n);
    CHECK(std::abs(static_cast<double>(hits) / n - 0.6) <= 3 * se);
}

TEST_CASE("sampling consumes exactly one uniform") {
    const auto m = fixtures::reference_model();
    CounterRng rng(1, 1);
    sample_reception(m, ChannelState{1}, false, rng);
    CHECK(rng.counter() == 1);
    step_state(m, ChannelState{1}, true, rng);
    CHECK(rng.counter() == 2);
}

TEST_CASE("zero-probability states are never sampled") {
    const Vector p{0.0, 0.5, 0.0, 0.5};
    CHECK(sample_distribution(p, 0.0) == ChannelState{2});
    CHECK(sample_distribution(p, 0.5) == ChannelState{4});
    CHECK(sample_distribution(p, std::nextafter(1.0, 0.0)) == ChannelState{4});
    const Vector short_mass{0.3, 0.3, 0.0};  // roundoff-style deficit
    CHECK(sample_distribution(short_mass, 0.9) == ChannelState{2});
}

TEST_CASE("belief_update cases") {
    const auto m = fixtures::reference_model();
    const auto after_rx = belief_update(m, uniform_distribution(4), true, true, ChannelState{3});
    const double col3[] = {0.1, 0.2, 0.3, 0.4};
    for (int i = 0; i < 4; ++i) CHECK(after_rx[i] == doctest::Approx(col3[i]));

    const auto silent = belief_update(m, unit_vector(4, ChannelState{1}), false, false, std::nullopt);
    const double col1[] = {0.5, 0.3, 0.2, 0.0};
    for (int i = 0; i < 4; ++i) CHECK(silent[i] == doctest::Approx(col1[i]));

    // Row sums of P1 are (0.4, 0.6, 1.0, 2.0).
    const auto dropped = belief_update(m, uniform_distribution(4), true, false, std::nullopt);
    const double want[] = {0.1, 0.15, 0.25, 0.5};
    for (int i = 0; i < 4; ++i) CHECK(dropped[i] == doctest::Approx(want[i]).epsilon(1e-14));

    CHECK_THROWS_AS(belief_update(m, uniform_distribution(4), false, true, ChannelState{1}), DomainError);
}

TEST_CASE("belief_update output is a probability vector and composes like P0^2") {
    const auto m = fixtures::reference_model();
    CounterRng rng(77, 0);
    for (int t = 0; t < 200; ++t) {
        Vector p(4);
        double s = 0;
        for (double& x : p) s += (x = rng.uniform());
        for (double& x : p) x /= s;
        const bool tx = rng.uniform() < 0.5;
        const auto out = belief_update(m, p, tx, false, std::nullopt);
        CHECK(is_prob_vector(out, 1e-12));
        const auto twice = belief_update(m, belief_update(m, p, false, false, std::nullopt), false, false, std::nullopt);
        const auto direct = mat_power(m.p0, 2).apply(p);
        for (int i = 0; i < 4; ++i) CHECK(twice[i] == doctest::Approx(direct[i]).epsilon(1e-12));
    }
}

TEST_CASE("belief matches sampled chains under a fixed action string without receptions") {
    // Transitions depend on the actions only, so the r = 0 recursion is the law of
    // gamma_k along the action string.
    const auto m = fixtures::reference_model();
    const std::array<bool, 6> actions{false, true, true, false, true, false};
    const long chains = 200'000;
    Vector p = unit_vector(4, ChannelState{2});
    for (bool t : actions) p = belief_update(m, p, t, false, std::nullopt);

    CounterRng rng(123, 0);
    std::vector<long> counts(4, 0);
    for (long c = 0; c < chains; ++c) {
        ChannelState g{2};
        for (bool t : actions) g = step_state(m, g, t, rng);
        ++counts[g.zero_based()];
    }
    for (std::size_t i = 0; i < 4; ++i) {
        const double f = static_cast<double>(counts[i]) / chains;
        const double se = std::sqrt(std::max(p[i] * (1 - p[i]), 1e-12) / chains);
        CHECK(std::abs(f - p[i]) <= 4 * se);
    }
}
