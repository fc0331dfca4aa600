#include <doctest.h>

#include <random>

#include "climbsim/adaptive_climb.hpp"
#include "climbsim/ir_analytics.hpp"
#include "climbsim/workload.hpp"
#include "oracles.hpp"

using namespace climbsim;
using namespace climbsim::ir;

TEST_CASE("probability vectors are validated") {
    CHECK_NOTHROW(ProbabilityVector({0.5, 0.5}));
    CHECK_THROWS_AS(ProbabilityVector({0.5, 0.6}), AnalyticsError);
    CHECK_THROWS_AS(ProbabilityVector({1.2, -0.2}), AnalyticsError);
    CHECK_THROWS_AS(ProbabilityVector({}), AnalyticsError);
    ProbabilityVector p({0.7, 0.3});
    CHECK(p.of(1) == 0.7);
    CHECK(p.of(2) == 0.3);
}

TEST_CASE("configurations are all K-permutations") {
    auto c = enumerate_configurations(4, 2);
    CHECK(c.size() == 12);
    CHECK(configuration_count(4, 2) == 12);
    CHECK(configuration_count(7, 4) == 840);
    CHECK(c.front() == Configuration{1, 2});
    CHECK(c.back() == Configuration{4, 3});
    CHECK(format_configuration({3, 1}) == "(3,1)");
}

TEST_CASE("K = 1 reduces both closed forms to p") {
    ProbabilityVector p({0.7, 0.3});
    CHECK(pi_lru(p, {1}) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(pi_lru(p, {2}) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(pi_climb(p, {1}) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(pi_climb(p, {2}) == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("N = 3, K = 2 closed-form values") {
    ProbabilityVector p({0.5, 0.3, 0.2});
    CHECK(pi_lru(p, {1, 2}) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(climb_weight_sum(p, 2) == doctest::Approx(0.22).epsilon(1e-12));
    CHECK(pi_climb(p, {1, 2}) == doctest::Approx(0.075 / 0.22).epsilon(1e-12));
    CHECK(pi_climb(p, {1, 2}) == doctest::Approx(0.3409).epsilon(1e-4));
    CHECK(pi_climb(p, {3, 2}) == doctest::Approx(0.012 / 0.22).epsilon(1e-12));
}

TEST_CASE("closed forms agree with plain enumeration") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + rng() % 5;
        const std::size_t k = 1 + rng() % std::min<std::size_t>(3, n - 1);
        auto raw = oracle::random_simplex(rng, n);
        ProbabilityVector p(raw);
        auto lru_ref = oracle::enumerate_weights(raw, k, true);
        auto climb_ref = oracle::enumerate_weights(raw, k, false);
        auto lru = lru_distribution(p, k);
        auto climb = climb_distribution(p, k);
        REQUIRE(lru.size() == lru_ref.size());
        double lru_sum = 0.0, climb_sum = 0.0;
        for (auto& [c, v] : lru_ref) {
            REQUIRE(lru.at(c) == doctest::Approx(v).epsilon(1e-12));
            REQUIRE(climb.at(c) == doctest::Approx(climb_ref.at(c)).epsilon(1e-12));
            lru_sum += lru.at(c);
            climb_sum += climb.at(c);
        }
        CHECK(std::abs(lru_sum - 1.0) < 1e-9);
        CHECK(std::abs(climb_sum - 1.0) < 1e-9);
    }
}

TEST_CASE("uniform p gives uniform distributions") {
    ProbabilityVector p(std::vector<double>(5, 0.2));
    for (auto model : {ChainModel::Lru, ChainModel::Climb, ChainModel::AdaptiveClimb}) {
        auto chain = markov_stationary(model, p, 2);
        for (auto& [c, v] : chain.distribution) CHECK(v == doctest::Approx(1.0 / 20).epsilon(1e-9));
    }
    for (auto& [c, v] : lru_distribution(p, 3)) CHECK(v == doctest::Approx(1.0 / 60).epsilon(1e-12));
    for (auto& [c, v] : climb_distribution(p, 3)) CHECK(v == doctest::Approx(1.0 / 60).epsilon(1e-12));
    CHECK(expected_hit_ratio(lru_distribution(p, 3), p) == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("power iteration matches the closed forms") {
    ProbabilityVector p({0.5, 0.3, 0.2});
    auto lru = markov_stationary(ChainModel::Lru, p, 2);
    auto climb = markov_stationary(ChainModel::Climb, p, 2);
    CHECK(lru.residual < 1e-12);
    CHECK(max_abs_difference(lru.distribution, lru_distribution(p, 2)) < 1e-9);
    CHECK(max_abs_difference(climb.distribution, climb_distribution(p, 2)) < 1e-9);
    CHECK(lru.states == 6);
}

TEST_CASE("adaptive climb chain covers configuration x jump") {
    ProbabilityVector p({0.4, 0.3, 0.2, 0.1});
    auto chain = markov_stationary(ChainModel::AdaptiveClimb, p, 3);
    CHECK(chain.states == 24 * 3);
    double sum = 0.0;
    for (auto& [c, v] : chain.distribution) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("adaptive climb chain agrees with the simulator") {
    const std::vector<double> raw{0.4, 0.3, 0.2, 0.1};
    ProbabilityVector p(raw);
    auto chain = markov_stationary(ChainModel::AdaptiveClimb, p, 2);

    AdaptiveClimbPolicy ac(2);
    Rng rng(77);
    std::map<Configuration, double> freq;
    const int steps = 400'000;
    for (int i = 0; i < steps + 1000; ++i) {
        double u = uniform01(rng);
        std::size_t item = 1;
        for (double acc = raw[0]; u >= acc && item < raw.size(); acc += raw[item++]) {
        }
        ac.on_request(RequestRecord{0, item, 1});
        if (i >= 1000) {
            auto keys = ac.state().keys();
            freq[Configuration(keys.begin(), keys.end())] += 1.0 / steps;
        }
    }
    CHECK(total_variation(freq, chain.distribution) < 0.02);
}

TEST_CASE("expected hit ratio examples") {
    ProbabilityVector p({0.7, 0.3});
    CHECK(expected_hit_ratio(lru_distribution(p, 1), p) == doctest::Approx(0.58).epsilon(1e-12));
    ProbabilityVector q({0.5, 0.3, 0.2});
    CHECK(expected_hit_ratio(climb_distribution(q, 2), q) >= expected_hit_ratio(lru_distribution(q, 2), q));
}

TEST_CASE("analytics errors") {
    ProbabilityVector mass_on_one({1.0, 0.0, 0.0});
    CHECK_THROWS_AS(pi_lru(mass_on_one, {1, 2}), AnalyticsError);
    ProbabilityVector two_items({0.5, 0.5, 0.0, 0.0});
    CHECK(climb_weight_sum(two_items, 3) == 0.0);
    CHECK_THROWS_AS(pi_climb(two_items, {1, 2, 3}), AnalyticsError);
    ProbabilityVector eight(std::vector<double>(8, 0.125));
    CHECK_THROWS_AS(markov_stationary(ChainModel::Lru, eight, 2), AnalyticsError);
    ProbabilityVector five(std::vector<double>(5, 0.2));
    CHECK_THROWS_AS(markov_stationary(ChainModel::Lru, five, 5), AnalyticsError);
    CHECK_THROWS_AS(pi_lru(five, {1, 1}), AnalyticsError);
    CHECK_THROWS_AS(pi_lru(five, {1, 6}), AnalyticsError);

    MarkovOptions tight;
    tight.max_iterations = 2;
    ProbabilityVector skewed({0.6, 0.25, 0.1, 0.05});
    CHECK_THROWS_AS(markov_stationary(ChainModel::Climb, skewed, 2, tight), AnalyticsError);
}

TEST_CASE("zero-probability items are allowed when no prefix exhausts the mass") {
    ProbabilityVector p({0.6, 0.4, 0.0});
    auto lru = lru_distribution(p, 2);
    CHECK(lru.at({1, 3}) == 0.0);
    CHECK(lru.at({1, 2}) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("total variation") {
    StationaryDistribution a{{{1}, 0.5}, {{2}, 0.5}};
    StationaryDistribution b{{{1}, 1.0}};
    CHECK(total_variation(a, b) == doctest::Approx(0.5));
    CHECK(total_variation(a, a) == 0.0);
}
