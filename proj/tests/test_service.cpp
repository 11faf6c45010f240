#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "blockq/rng.hpp"
#include "blockq/service.hpp"

using namespace blockq;

namespace {

std::vector<ServiceDistribution> all_kinds() {
    return {ServiceDistribution::exponential(1.8379e-3), ServiceDistribution::exponential(1.0),
            ServiceDistribution::deterministic(2.0), ServiceDistribution::deterministic(544.09),
            ServiceDistribution::erlang(3, 0.5), ServiceDistribution::erlang(1, 4.0)};
}

}  // namespace

TEST_CASE("lst closed forms") {
    CHECK(lst(ServiceDistribution::exponential(1.8379e-3), 0.0) == Complex(1.0));
    CHECK(std::abs(lst(ServiceDistribution::exponential(1.0), 1.0) - 0.5) <= 1e-15);
    CHECK(std::abs(lst(ServiceDistribution::deterministic(2.0), 0.5) - std::exp(-1.0)) <= 1e-12);
    CHECK(std::abs(lst(ServiceDistribution::deterministic(2.0), 0.5).real() - 0.3678794) <= 1e-7);
    const Complex s(0.3, -0.7);
    const Complex phase = 0.5 / (s + 0.5);
    CHECK(std::abs(lst(ServiceDistribution::erlang(3, 0.5), s) - phase * phase * phase) <= 1e-12);
}

TEST_CASE("lst pole is a domain error") {
    CHECK_THROWS_AS(lst(ServiceDistribution::exponential(2.0), -2.0), std::domain_error);
    CHECK_THROWS_AS(lst(ServiceDistribution::erlang(2, 2.0), -2.0), std::domain_error);
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(ServiceDistribution::exponential(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ServiceDistribution::exponential(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(ServiceDistribution::deterministic(0.0), std::invalid_argument);
    CHECK_THROWS_AS(ServiceDistribution::erlang(0, 1.0), std::invalid_argument);
}

TEST_CASE("moments") {
    const double mu = 1.8379e-3;
    const auto e = ServiceDistribution::exponential(mu);
    CHECK(e.mean() == 1.0 / mu);
    CHECK(e.second_moment() == 2.0 / (mu * mu));
    // Reported values: E[S] = 544.09, E[S^2] = 5.9208e5.
    CHECK(e.mean() == doctest::Approx(544.09).epsilon(1e-4));
    CHECK(e.second_moment() == doctest::Approx(5.9208e5).epsilon(1e-4));
    for (const auto &d : all_kinds()) {
        CHECK(d.mean() > 0.0);
        CHECK(d.second_moment() >= d.mean() * d.mean());
    }
}

TEST_CASE("lst derivatives at zero recover the moments") {
    for (const auto &d : all_kinds()) {
        const double h1 = 1e-6 / d.mean();
        const double first = (lst(d, h1) - lst(d, -h1)).real() / (2.0 * h1);
        CHECK(-first == doctest::Approx(d.mean()).epsilon(1e-6));
        const double h2 = 1e-3 / d.mean();
        const double second = (lst(d, h2) - 2.0 * lst(d, 0.0) + lst(d, -h2)).real() / (h2 * h2);
        CHECK(second == doctest::Approx(d.second_moment()).epsilon(1e-4));
    }
}

TEST_CASE("lst is bounded by one on the right half-plane") {
    Xoshiro256 rng(7);
    for (const auto &d : all_kinds()) {
        for (int i = 0; i < 500; ++i) {
            const Complex s(rng.uniform() * 10.0 / d.mean(), (rng.uniform() - 0.5) * 100.0 / d.mean());
            CHECK(std::abs(lst(d, s)) <= 1.0 + 1e-15);
        }
    }
}

TEST_CASE("exponential memorylessness identity") {
    const auto d = ServiceDistribution::exponential(1.8379e-3);
    for (double s : {1e-6, 1e-3, 0.5, 3.0, 1e3})
        CHECK(std::abs((lst(d, s) * (1.0 + s * d.mean())).real() - 1.0) <= 1e-12);
}

TEST_CASE("fit_exponential") {
    SUBCASE("constant samples") {
        const std::vector<double> xs{1.0, 1.0, 1.0};
        const auto fit = fit_exponential(xs);
        CHECK(std::get<Exponential>(fit.distribution.kind()).rate == doctest::Approx(1.0));
    }
    SUBCASE("sample mean 544.09 gives the reported rate") {
        const std::vector<double> xs{300.0, 544.09, 788.18};
        const auto fit = fit_exponential(xs);
        CHECK(std::get<Exponential>(fit.distribution.kind()).rate == doctest::Approx(1.8379e-3).epsilon(1e-4));
        CHECK(std::abs(1.0 / 544.09 - std::get<Exponential>(fit.distribution.kind()).rate) <= 1e-7 / 544.09);
    }
    SUBCASE("large exponential sample") {
        Xoshiro256 rng(20170501);
        std::vector<double> xs(100'000);
        for (auto &x : xs) x = rng.exponential(0.002);
        const auto fit = fit_exponential(xs);
        CHECK(std::get<Exponential>(fit.distribution.kind()).rate == doctest::Approx(0.002).epsilon(0.02));
        // Histogram tracks the density on the default 60 s bins.
        REQUIRE(fit.bins.size() == 110);
        CHECK(fit.bins.front().lower == 0.0);
        CHECK(fit.bins.back().upper == doctest::Approx(6600.0));
        CHECK(fit.bins[0].empirical_density == doctest::Approx(fit.bins[0].model_density).epsilon(0.05));
        double total = 0.0;
        for (const auto &b : fit.bins) total += b.relative_frequency;
        total += static_cast<double>(fit.overflow_count) / 100'000.0;
        CHECK(total == doctest::Approx(1.0));
    }
    SUBCASE("zeros are accepted, all-zero and empty are not") {
        const std::vector<double> with_zero{0.0, 2.0};
        CHECK(std::get<Exponential>(fit_exponential(with_zero).distribution.kind()).rate == doctest::Approx(1.0));
        const std::vector<double> zeros{0.0, 0.0};
        CHECK_THROWS_AS(fit_exponential(zeros), std::invalid_argument);
        CHECK_THROWS_AS(fit_exponential(std::vector<double>{}), std::invalid_argument);
        CHECK_THROWS_AS(fit_exponential(std::vector<double>{-1.0}), std::invalid_argument);
    }
}
