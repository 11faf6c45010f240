#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "blockq/priority.hpp"
#include "blockq/sweep.hpp"

using namespace blockq;

namespace {

constexpr double kMuFitted = 1.8379e-3;

}  // namespace

TEST_CASE("grid") {
    SweepSpec spec{0.1, 0.5, 5, {10}};
    const auto g = sweep_grid(spec);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.1);
    CHECK(g.back() == doctest::Approx(0.5));
    CHECK(g[2] == doctest::Approx(0.3));
    CHECK_THROWS_AS(sweep_grid({0.0, 1.0, 2, {10}}), std::invalid_argument);
    CHECK_THROWS_AS(sweep_grid({1.0, 0.5, 2, {10}}), std::invalid_argument);
    CHECK_THROWS_AS(sweep_grid({0.1, 1.0, 0, {10}}), std::invalid_argument);
    CHECK_THROWS_AS(sweep_grid({0.1, 1.0, 2, {}}), std::invalid_argument);
}

TEST_CASE("single point gives a single row") {
    const auto rows = run_sweep({0.5, 0.5, 1, {1750}});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].cls == "all");
    CHECK(*rows[0].value == doctest::Approx(mean_confirmation_time({1750, 0.5, ServiceDistribution::exponential(kMuFitted)})));
}

TEST_CASE("classless sweep starts near the mean block time and flags unstable points") {
    const double es = 1.0 / kMuFitted;
    SweepSpec spec{1e-6, 1.5 * 1000 * kMuFitted, 4, {1000}};
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 4);
    CHECK(*rows[0].value == doctest::Approx(es).epsilon(1e-3));
    CHECK(rows[1].value.has_value());
    CHECK_FALSE(rows[3].value.has_value());
    std::ostringstream os;
    write_sweep_csv(os, rows);
    CHECK(os.str().rfind("lambda,b,class,mean_tct_s\n", 0) == 0);
    CHECK(os.str().find(",1000,all,unstable\n") != std::string::npos);
}

TEST_CASE("two-class modes agree with the decomposition") {
    const auto service = ServiceDistribution::exponential(kMuFitted);
    SweepSpec zeta{0.5, 1.5, 3, {1000, 2000}, SweepMode::kFixedZeta};
    const auto rows = run_sweep(zeta);
    REQUIRE(rows.size() == 12);
    CHECK(rows[0].b == 1000);
    CHECK(rows[0].cls == "H");
    CHECK(rows[1].cls == "L");
    const auto [lh, ll] = split_by_ratio(1.0, 13.288);
    const auto [th, tl] = two_class_times(lh, ll, service, 1000);
    CHECK(*rows[2].value == doctest::Approx(th).epsilon(1e-12));
    CHECK(*rows[3].value == doctest::Approx(tl).epsilon(1e-12));

    SweepSpec high{0.01, 0.2, 2, {1750}, SweepMode::kFixedHigh};
    const auto hr = run_sweep(high);
    REQUIRE(hr.size() == 4);
    const auto [h2, l2] = two_class_times(0.90466, 0.2, service, 1750);
    CHECK(*hr[2].value == doctest::Approx(h2).epsilon(1e-12));
    CHECK(*hr[3].value == doctest::Approx(l2).epsilon(1e-12));
    CHECK(*hr[0].value == *hr[2].value);  // H ignores lambda_L
}

TEST_CASE("high class grows rapidly as the aggregate approaches saturation") {
    const double es = 1.0 / kMuFitted;
    // b = 2000: L saturates at lambda = b mu = 3.676, H at b mu (1 + zeta) / zeta.
    const double h_limit = 2000 * kMuFitted * 14.288 / 13.288;
    SweepSpec spec{3.0, 3.9, 4, {2000}, SweepMode::kFixedZeta};
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 8);
    std::vector<double> th;
    for (std::size_t i = 0; i < rows.size(); i += 2) th.push_back(*rows[i].value);
    CHECK(th[0] < 2.5 * es);
    CHECK(th[3] > 10.0 * es);
    CHECK(rows[7].lambda < h_limit);
    // Convex blow-up: each step of the grid costs more than the last.
    CHECK(th[1] - th[0] < th[2] - th[1]);
    CHECK(th[2] - th[1] < th[3] - th[2]);
    CHECK(rows[1].value.has_value());
    CHECK_FALSE(rows[7].value.has_value());  // L has saturated
}

TEST_CASE("csv is deterministic") {
    SweepSpec spec{0.1, 3.0, 7, {10, 1000}, SweepMode::kFixedZeta};
    const auto a = run_sweep(spec);
    const auto b = run_sweep(spec);
    std::ostringstream sa, sb;
    write_sweep_csv(sa, a);
    write_sweep_csv(sb, b);
    CHECK(sa.str() == sb.str());
}
