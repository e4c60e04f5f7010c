#include <doctest.h>

#include "etmc/errors.hpp"
#include "etmc/policy.hpp"
#include "fixtures.hpp"

using namespace etmc;

TEST_CASE("triggered state keeps transmitting") {
    const Lookahead lk(fixtures::reference_model(), fixtures::reference_params());
    const PolicyState ps{1, true, 0, 1.0};
    const SensorInfo quiet{1, 0.0, 0.0, 0, 1.0, uniform_distribution(4)};
    const auto d = decide(ps, quiet, lk);
    CHECK(d.transmit);
    CHECK_FALSE(d.G.has_value());
    CHECK(d.next == ps);
}

TEST_CASE("hold-off for a small state just after a reception") {
    const Lookahead lk(fixtures::reference_model(), fixtures::reference_params());
    const auto p = fixtures::reference_model().p1.column(0);
    const PolicyState ps{1, false, 10, 2.0};
    const SensorInfo info{11, 1.5, 0.0, 10, 2.0, p};
    const auto d = decide(ps, info, lk);
    REQUIRE(d.G.has_value());
    CHECK(*d.G == lk.lookahead_G(info, 1));
    CHECK(*d.G < 0);
    CHECK_FALSE(d.transmit);
    CHECK_FALSE(d.next.triggered);
}

TEST_CASE("large deviation triggers") {
    const Lookahead lk(fixtures::reference_model(), fixtures::reference_params());
    const PolicyState ps{1, false, 0, 5.0};
    const SensorInfo info{40, 1000.0, 1000.0, 0, 5.0, uniform_distribution(4)};
    const auto d = decide(ps, info, lk);
    REQUIRE(d.G.has_value());
    CHECK(*d.G >= 0);
    CHECK(d.transmit);
    CHECK(d.next.triggered);
    // and the trigger then persists
    const SensorInfo calm{41, 0.0, 0.0, 0, 5.0, uniform_distribution(4)};
    CHECK(decide(d.next, calm, lk).transmit);
}

TEST_CASE("decide requires k > R_k") {
    const Lookahead lk(fixtures::reference_model(), fixtures::reference_params());
    const PolicyState ps{1, false, 5, 1.0};
    CHECK_THROWS_AS(decide(ps, SensorInfo{5, 1, 0, 5, 1, uniform_distribution(4)}, lk), DomainError);
}

TEST_CASE("reception resets the policy state") {
    PolicyState ps{2, true, 3, 9.0};
    ps = on_reception(ps, 7, 4.0);
    CHECK_FALSE(ps.triggered);
    CHECK(ps.Rk == 7);
    CHECK(ps.x_Rk == 4.0);
    CHECK(ps.D == 2);
    ps = on_reception(ps, 8, -1.0);
    CHECK(ps.Rk == 8);
    CHECK(ps.x_Rk == -1.0);
    CHECK_FALSE(on_reception(PolicyState{1, false, 0, 0}, 1, 0).triggered);
}

TEST_CASE("nominal policy") {
    CHECK(nominal_decide(4, 0, 4));
    CHECK_FALSE(nominal_decide(4, 3, 6));
    CHECK(nominal_decide(4, 3, 7));
    CHECK_FALSE(nominal_decide(0, 3, 0));
    CHECK(nominal_decide(0, 3, 100));
    CHECK_THROWS_AS(nominal_decide(5, 1, 4), DomainError);
}
