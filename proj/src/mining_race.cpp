#include "blockq/mining_race.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "blockq/rng.hpp"

namespace blockq {

void MiningRaceConfig::validate() const {
    if (n < 1) throw std::invalid_argument("miner count must be >= 1");
    if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("nonce space must be positive");
    if (samples < 1) throw std::invalid_argument("need at least one sample");
}

double race_exact_cdf(double x, int n, double m) {
    if (x <= 0.0) return 0.0;
    if (x >= m) return 1.0;
    return -std::expm1(static_cast<double>(n) * std::log1p(-x / m));
}

double race_exponential_cdf(double x, int n, double m) {
    if (x <= 0.0) return 0.0;
    return -std::expm1(-static_cast<double>(n) * x / m);
}

std::vector<double> simulate_race(const MiningRaceConfig &cfg) {
    cfg.validate();
    std::vector<double> out(cfg.samples);
    for (std::size_t i = 0; i < cfg.samples; ++i) {
        Xoshiro256 rng(substream_seed(cfg.seed, i));
        double best = cfg.m;
        for (int k = 0; k < cfg.n; ++k) best = std::min(best, cfg.m * rng.uniform());
        out[i] = best;
    }
    return out;
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)> &cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::vector<double> xs(sample.begin(), sample.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_critical_value(std::size_t samples, double alpha) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(samples));
}

double exponential_approx_distance(const MiningRaceConfig &cfg) {
    const auto sample = simulate_race(cfg);
    return ks_statistic(sample, [&](double x) { return race_exponential_cdf(x, cfg.n, cfg.m); });
}

double exact_exponential_sup_distance(int n, double m, std::size_t points) {
    if (n < 1 || !(m > 0.0) || points < 2) throw std::invalid_argument("exact_exponential_sup_distance: bad arguments");
    const double upper = std::min(m, 50.0 * m / n);
    double sup = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        const double x = upper * static_cast<double>(i) / static_cast<double>(points - 1);
        sup = std::max(sup, std::abs(race_exact_cdf(x, n, m) - race_exponential_cdf(x, n, m)));
    }
    return sup;
}

void write_race_cdf_csv(std::ostream &os, std::span<const double> sample, int n, double m, std::size_t points) {
    std::vector<double> xs(sample.begin(), sample.end());
    std::sort(xs.begin(), xs.end());
    const double upper = std::min(m, 10.0 * m / n);
    os << "x,empirical_cdf,exact_cdf,exponential_cdf\n";
    char buf[128];
    for (std::size_t i = 0; i < points; ++i) {
        const double x = points > 1 ? upper * static_cast<double>(i) / static_cast<double>(points - 1) : 0.0;
        const auto below = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
        const double emp = xs.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(xs.size());
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g\n", x, emp, race_exact_cdf(x, n, m),
                      race_exponential_cdf(x, n, m));
        os << buf;
    }
}

}  // namespace blockq
