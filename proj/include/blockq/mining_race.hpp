#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace blockq {

/// n miners racing over a nonce space of size M; each miner's success
/// time is uniform on (0, M) and the block appears at the minimum.
struct MiningRaceConfig {
    int n;
    double m;
    std::size_t samples;
    std::uint64_t seed = 1;

    void validate() const;
};

// Pr{L_n <= x} = 1 - (1 - x/M)^n on [0, M].
double race_exact_cdf(double x, int n, double m);
// Large-n limit 1 - exp(-(n/M) x).
double race_exponential_cdf(double x, int n, double m);

/// Samples of L_n = min(Y_1..Y_n); sample i uses substream (seed, i).
std::vector<double> simulate_race(const MiningRaceConfig &cfg);

/// One-sample Kolmogorov-Smirnov distance sup |F_emp - cdf|.
double ks_statistic(std::span<const double> sample, const std::function<double(double)> &cdf);

/// Asymptotic KS critical value c(alpha) / sqrt(samples).
double ks_critical_value(std::size_t samples, double alpha = 0.05);

/// KS distance between a simulated race and Exponential(n / M).
double exponential_approx_distance(const MiningRaceConfig &cfg);

/// Sampling-free sup_x |exact - exponential| over a grid of `points`
/// covering [0, min(M, 50 M / n)].
double exact_exponential_sup_distance(int n, double m, std::size_t points = 200'001);

/// CSV `x,empirical_cdf,exact_cdf,exponential_cdf` on `points` grid points.
void write_race_cdf_csv(std::ostream &os, std::span<const double> sample, int n, double m, std::size_t points = 201);

}  // namespace blockq
