#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "blockq/batch_queue.hpp"
#include "blockq/errors.hpp"
#include "blockq/rng.hpp"
#include "oracles.hpp"

using namespace blockq;

namespace {

constexpr double kMuFitted = 1.8379e-3;

QueueConfig exp_queue(int b, double lambda, double mu) {
    return {b, lambda, ServiceDistribution::exponential(mu)};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Greedy one-to-one match; returns the worst distance.
double match_roots(std::vector<Complex> a, std::vector<Complex> b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (const Complex &z : a) {
        auto it = std::min_element(b.begin(), b.end(),
                                   [&](const Complex &x, const Complex &y) { return std::abs(x - z) < std::abs(y - z); });
        worst = std::max(worst, std::abs(*it - z));
        b.erase(it);
    }
    return worst;
}

}  // namespace

TEST_CASE("stability check") {
    CHECK(stability_check(exp_queue(1750, 0.97275, kMuFitted)).stable);
    CHECK(stability_check(exp_queue(1750, 0.97275, kMuFitted)).offered_load == doctest::Approx(0.97275 / kMuFitted));
    CHECK_FALSE(stability_check(exp_queue(2, 2.5, 1.0)).stable);
    CHECK_FALSE(stability_check(exp_queue(2, 2.0, 1.0)).stable);  // boundary is unstable
    CHECK_THROWS_AS(solve(exp_queue(2, 2.5, 1.0)), unstable_error);
    CHECK_THROWS_AS(exp_queue(0, 1.0, 1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(exp_queue(1, 0.0, 1.0).validate(), std::invalid_argument);
}

TEST_CASE("golden-ratio case b = 2, lambda = mu = 1") {
    const auto sol = solve(exp_queue(2, 1.0, 1.0));
    REQUIRE(sol.roots.size() == 1);
    CHECK(std::abs(sol.roots[0] - Complex((1.0 - std::sqrt(5.0)) / 2.0, 0.0)) <= 1e-9);
    REQUIRE(sol.alpha.size() == 2);
    CHECK(sol.alpha[0] == doctest::Approx(0.2360680).epsilon(1e-7));
    CHECK(sol.alpha[1] == doctest::Approx(0.1458980).epsilon(1e-7));
    // Hand derivation: alpha_1 = sqrt5 - 2, alpha_2 = (7 - 3 sqrt5) / 2.
    CHECK(std::abs(sol.alpha[0] - (std::sqrt(5.0) - 2.0)) <= 1e-9);
    CHECK(std::abs(sol.alpha[1] - (7.0 - 3.0 * std::sqrt(5.0)) / 2.0) <= 1e-9);
    CHECK(std::abs(sol.p0 - (3.0 - std::sqrt(5.0)) / 2.0) <= 1e-9);
    CHECK(std::abs(sol.mean_sojourn - std::numbers::phi) <= 1e-6);
    CHECK(sol.mean_queue == doctest::Approx(sol.mean_sojourn));
}

TEST_CASE("b = 2, mu = 2 root is 1 - sqrt3") {
    const auto roots = find_unit_disk_roots(exp_queue(2, 1.0, 2.0));
    REQUIRE(roots.size() == 1);
    CHECK(std::abs(roots[0] - Complex(1.0 - std::sqrt(3.0), 0.0)) <= 1e-9);
}

TEST_CASE("b = 1 closed form") {
    const auto sol = solve(exp_queue(1, 0.5, 1.0));
    CHECK(sol.roots.empty());
    REQUIRE(sol.alpha.size() == 1);
    CHECK(sol.alpha[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(sol.mean_sojourn == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("Pollaczek-Khinchine reduction for 200 random stable points") {
    Xoshiro256 rng(substream_seed(42, 0));
    for (int i = 0; i < 200; ++i) {
        const double mu = std::exp(rng.uniform() * 12.0 - 8.0);
        const double lambda = mu * (0.01 + 0.98 * rng.uniform());
        const auto d = ServiceDistribution::exponential(mu);
        const double f = mean_confirmation_time({1, lambda, d});
        CHECK(rel(f, oracle::pollaczek_khinchine(lambda, d.mean(), d.second_moment())) <= 1e-9);
    }
    // Non-exponential b = 1 also reduces to the M/G/1 formula.
    for (const auto &d : {ServiceDistribution::deterministic(2.0), ServiceDistribution::erlang(3, 2.0)}) {
        const double lambda = 0.3;
        CHECK(rel(mean_confirmation_time({1, lambda, d}), oracle::pollaczek_khinchine(lambda, d.mean(), d.second_moment())) <=
              1e-9);
    }
}

TEST_CASE("roots agree with the companion-matrix oracle") {
    for (int b : {2, 3, 5, 8, 16, 32, 64}) {
        for (double load : {0.1, 0.5, 0.9, 0.99}) {
            const double mu = 1.0;
            const double lambda = load * b * mu;
            const auto roots = find_unit_disk_roots(exp_queue(b, lambda, mu));
            const auto ref = oracle::unit_disk_roots_excluding_one(b, lambda, mu);
            // Rouche: exactly b - 1 zeros inside the disk besides z = 1.
            CHECK(ref.size() == static_cast<std::size_t>(b - 1));
            REQUIRE(roots.size() == ref.size());
            CHECK(match_roots(roots, ref) <= 1e-8);
            for (const Complex &z : roots) CHECK(std::abs(z) < 1.0);
        }
    }
}

TEST_CASE("roots are sorted by argument then modulus and distinct") {
    const auto roots = find_unit_disk_roots(exp_queue(40, 30.0, 1.0));
    for (std::size_t i = 1; i < roots.size(); ++i) CHECK(std::arg(roots[i - 1]) <= std::arg(roots[i]));
}

TEST_CASE("mean sojourn agrees with the moment and CTMC oracles") {
    for (int b : {2, 5, 10, 50}) {
        for (double load : {0.2, 0.6, 0.9}) {
            const double mu = 0.5;
            const double lambda = load * b * mu;
            const auto cfg = exp_queue(b, lambda, mu);
            const auto sol = solve(cfg);
            double p0_roots = 0.0;
            const double moment = oracle::mean_sojourn_from_roots(b, lambda, cfg.service.mean(), cfg.service.second_moment(),
                                                                   sol.roots, &p0_roots);
            CHECK(rel(sol.mean_sojourn, moment) <= 1e-8);
            CHECK(std::abs(sol.p0 - p0_roots) <= 1e-9);
            const auto chain = oracle::exponential_batch_ctmc(b, lambda, mu, oracle::ctmc_cap(b, lambda, mu));
            CHECK(rel(sol.mean_sojourn, chain.mean_sojourn) <= 1e-7);
            CHECK(std::abs(sol.p0 - chain.p0) <= 1e-9);
        }
    }
}

TEST_CASE("dense and root-product boundary rates agree") {
    for (int b : {3, 10, 100, 500}) {
        const auto cfg = exp_queue(b, 0.7 * b * kMuFitted, kMuFitted);
        SolverOptions dense, product;
        dense.alpha_method = AlphaMethod::kDenseLU;
        product.alpha_method = AlphaMethod::kRootProduct;
        const auto a = solve(cfg, dense);
        const auto p = solve(cfg, product);
        CHECK(rel(a.mean_sojourn, p.mean_sojourn) <= 1e-9);
        CHECK(std::abs(a.p0 - p.p0) <= 1e-10);
        double amax = 0.0;
        for (double x : a.alpha) amax = std::max(amax, std::abs(x));
        for (std::size_t k = 0; k < a.alpha.size(); ++k) CHECK(std::abs(a.alpha[k] - p.alpha[k]) <= 1e-8 * amax);
    }
}

TEST_CASE("boundary rates are non-negative and sum to lambda p0") {
    const auto cfg = exp_queue(200, 0.8 * 200 * kMuFitted, kMuFitted);
    const auto sol = solve(cfg);
    double sum = 0.0;
    for (double a : sol.alpha) {
        CHECK(a >= 0.0);
        sum += a;
    }
    CHECK(sum == doctest::Approx(cfg.lambda * sol.p0).epsilon(1e-12));
    CHECK(sol.residual <= 1e-10);
    CHECK(sol.system_residual <= 1e-8);
}

TEST_CASE("general service laws") {
    SUBCASE("deterministic and Erlang roots satisfy the kernel equation") {
        for (const auto &d : {ServiceDistribution::deterministic(1.0), ServiceDistribution::erlang(4, 4.0)}) {
            const QueueConfig cfg{20, 14.0, d};
            const auto sol = solve(cfg);
            CHECK(sol.roots.size() == 19);
            for (const Complex &z : sol.roots)
                CHECK(std::abs(std::pow(z, 20) - lst(d, cfg.lambda - cfg.lambda * z)) <= 1e-10);
            CHECK(sol.p0 > 0.0);
            CHECK(sol.p0 < 1.0);
        }
    }
    SUBCASE("less variable service waits less") {
        const int b = 10;
        const double lambda = 7.0;
        const double e = mean_confirmation_time({b, lambda, ServiceDistribution::exponential(1.0)});
        const double er = mean_confirmation_time({b, lambda, ServiceDistribution::erlang(4, 4.0)});
        const double det = mean_confirmation_time({b, lambda, ServiceDistribution::deterministic(1.0)});
        CHECK(det < er);
        CHECK(er < e);
    }
}

TEST_CASE("E[T] is increasing in lambda") {
    for (int b : {1, 2, 10, 100}) {
        double prev = 0.0;
        for (int i = 1; i <= 50; ++i) {
            const double lambda = b * kMuFitted * i / 51.0;
            const double f = mean_confirmation_time(exp_queue(b, lambda, kMuFitted));
            CHECK(f > prev);
            prev = f;
        }
    }
}

TEST_CASE("light-traffic and heavy-traffic limits") {
    const double es = 1.0 / kMuFitted;
    const double f0 = mean_confirmation_time(exp_queue(1750, 1e-6 * 1750 * kMuFitted, kMuFitted));
    CHECK(rel(f0, 544.09) <= 1e-3);
    for (int b : {10, 100, 1000}) {
        const double f = mean_confirmation_time(exp_queue(b, 0.99 * b * kMuFitted, kMuFitted));
        CHECK(f > 10.0 * es);
    }
}

TEST_CASE("network-scale solve b = 1750") {
    const auto sol = solve(exp_queue(1750, 0.97275, kMuFitted));
    CHECK(sol.roots.size() == 1749);
    CHECK(rel(sol.mean_sojourn, 568.10) <= 5e-3);
    CHECK(sol.residual <= 1e-10);
}

TEST_CASE("pgf") {
    const auto cfg = exp_queue(10, 6.0, 1.0);
    const auto sol = solve(cfg);
    CHECK(std::abs(pgf_evaluate(cfg, sol, 1.0) - 1.0) <= 1e-12);
    CHECK(std::abs(pgf_evaluate(cfg, sol, 0.0) - sol.p0) <= 1e-10);
    const double h = 1e-4;
    const double deriv = (pgf_evaluate(cfg, sol, 1.0 - h) - pgf_evaluate(cfg, sol, 1.0 - 2.0 * h)).real() / h;
    CHECK(deriv == doctest::Approx(sol.mean_queue).epsilon(5e-3));
    // Unit-disk roots are removable.
    const Complex at_root = pgf_evaluate(cfg, sol, sol.roots.front());
    CHECK(std::isfinite(at_root.real()));
    CHECK(std::abs(pgf_evaluate(cfg, Complex(0.3, 0.2)) - pgf_evaluate(cfg, sol, Complex(0.3, 0.2))) <= 1e-12);
    // P(z) is a probability pgf: |P(z)| <= 1 on the disk.
    for (double r : {0.2, 0.5, 0.9})
        for (int k = 0; k < 8; ++k) CHECK(std::abs(pgf_evaluate(cfg, sol, std::polar(r, k * 0.7))) <= 1.0 + 1e-9);
}

TEST_CASE("extended precision matches double precision") {
    SolverOptions ext;
    ext.extended_precision = true;
    const auto g = solve(exp_queue(2, 1.0, 1.0), ext);
    CHECK(std::abs(g.mean_sojourn - std::numbers::phi) <= 1e-9);
    const auto cfg = exp_queue(60, 50.0, 1.0);
    CHECK(rel(solve(cfg, ext).mean_sojourn, solve(cfg).mean_sojourn) <= 1e-9);
}
