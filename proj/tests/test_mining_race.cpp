#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "blockq/mining_race.hpp"

using namespace blockq;

TEST_CASE("exact and limiting cdfs") {
    CHECK(race_exact_cdf(0.0, 10, 100.0) == 0.0);
    CHECK(race_exact_cdf(100.0, 10, 100.0) == 1.0);
    CHECK(race_exact_cdf(50.0, 1, 100.0) == doctest::Approx(0.5));
    CHECK(race_exact_cdf(50.0, 2, 100.0) == doctest::Approx(0.75));
    CHECK(race_exponential_cdf(100.0, 1, 100.0) == doctest::Approx(1.0 - std::exp(-1.0)));
    // The exact law is stochastically smaller: 1 - x/M <= exp(-x/M).
    for (double x : {1.0, 10.0, 40.0}) CHECK(race_exact_cdf(x, 5, 100.0) >= race_exponential_cdf(x, 5, 100.0));
}

TEST_CASE("sup distance between exact and exponential shrinks like 1 / (2 e n)") {
    for (int n : {100, 1000, 5700}) {
        const double d = exact_exponential_sup_distance(n, 1e7);
        CHECK(d == doctest::Approx(1.0 / (2.0 * std::numbers::e * n)).epsilon(0.05));
    }
    CHECK(exact_exponential_sup_distance(5700, 1e7) <= 1e-3);
    CHECK_THROWS_AS(exact_exponential_sup_distance(0, 1.0), std::invalid_argument);
}

TEST_CASE("ks statistic") {
    const std::vector<double> xs{0.5};
    CHECK(ks_statistic(xs, [](double x) { return x; }) == doctest::Approx(0.5));
    std::vector<double> grid;
    for (int i = 0; i < 100; ++i) grid.push_back((i + 0.5) / 100.0);
    CHECK(ks_statistic(grid, [](double x) { return x; }) == doctest::Approx(0.005));
    CHECK_THROWS_AS(ks_statistic(std::vector<double>{}, [](double x) { return x; }), std::invalid_argument);
    CHECK(ks_critical_value(10'000) == doctest::Approx(1.358 / 100.0).epsilon(1e-3));
}

TEST_CASE("simulated race at network scale") {
    const MiningRaceConfig cfg{5700, 1e7, 10'000, 1};
    const auto sample = simulate_race(cfg);
    REQUIRE(sample.size() == 10'000);
    CHECK(std::all_of(sample.begin(), sample.end(), [](double x) { return x >= 0.0 && x < 1e7; }));
    const double ks_exp = ks_statistic(sample, [](double x) { return race_exponential_cdf(x, 5700, 1e7); });
    const double ks_exact = ks_statistic(sample, [](double x) { return race_exact_cdf(x, 5700, 1e7); });
    CHECK(ks_exp <= 0.02);
    CHECK(ks_exact <= ks_critical_value(10'000, 0.001));
    CHECK(exponential_approx_distance(cfg) == ks_exp);
    double mean = 0.0;
    for (double x : sample) mean += x / sample.size();
    CHECK(mean == doctest::Approx(1e7 / 5701.0).epsilon(0.05));
}

TEST_CASE("single miner is uniform") {
    const MiningRaceConfig cfg{1, 10.0, 5'000, 3};
    const auto sample = simulate_race(cfg);
    CHECK(ks_statistic(sample, [](double x) { return x / 10.0; }) <= ks_critical_value(5'000, 0.001));
}

TEST_CASE("determinism and csv") {
    const MiningRaceConfig cfg{50, 1000.0, 500, 9};
    CHECK(simulate_race(cfg) == simulate_race(cfg));
    const auto sample = simulate_race(cfg);
    std::ostringstream a, b;
    write_race_cdf_csv(a, sample, 50, 1000.0);
    write_race_cdf_csv(b, sample, 50, 1000.0);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("x,empirical_cdf,exact_cdf,exponential_cdf\n", 0) == 0);
    const std::string text = a.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 202);
    CHECK_THROWS_AS((MiningRaceConfig{0, 1.0, 1}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((MiningRaceConfig{1, 0.0, 1}).validate(), std::invalid_argument);
}
