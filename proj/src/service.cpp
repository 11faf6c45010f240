#include "blockq/service.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace blockq {

namespace {

struct Moments {
    double mean;
    double second;
};

Moments moments_of(const Exponential &e) {
    if (!(e.rate > 0.0) || !std::isfinite(e.rate))
        throw std::invalid_argument("exponential rate must be positive and finite");
    return {1.0 / e.rate, 2.0 / (e.rate * e.rate)};
}

Moments moments_of(const Deterministic &d) {
    if (!(d.duration > 0.0) || !std::isfinite(d.duration))
        throw std::invalid_argument("deterministic duration must be positive and finite");
    return {d.duration, d.duration * d.duration};
}

Moments moments_of(const Erlang &e) {
    if (e.shape < 1) throw std::invalid_argument("erlang shape must be >= 1");
    if (!(e.rate > 0.0) || !std::isfinite(e.rate))
        throw std::invalid_argument("erlang rate must be positive and finite");
    const double k = e.shape;
    return {k / e.rate, k * (k + 1.0) / (e.rate * e.rate)};
}

}  // namespace

ServiceDistribution::ServiceDistribution(Kind kind) : kind_(kind) {
    const Moments m = std::visit([](const auto &k) { return moments_of(k); }, kind_);
    mean_ = m.mean;
    second_moment_ = m.second;
}

double ServiceDistribution::density(double x) const {
    if (x < 0.0) return 0.0;
    if (const auto *e = std::get_if<Exponential>(&kind_)) return e->rate * std::exp(-e->rate * x);
    if (const auto *e = std::get_if<Erlang>(&kind_)) {
        const double k = e->shape;
        return std::exp(k * std::log(e->rate) + (k - 1.0) * std::log(x) - e->rate * x - std::lgamma(k));
    }
    return 0.0;
}

Complex lst(const ServiceDistribution &dist, Complex s) {
    const auto &kind = dist.kind();
    if (const auto *e = std::get_if<Exponential>(&kind)) {
        const Complex den = s + e->rate;
        if (den == Complex(0.0)) throw std::domain_error("LST pole at s = -mu");
        return e->rate / den;
    }
    if (const auto *d = std::get_if<Deterministic>(&kind)) return std::exp(-s * d->duration);
    const auto &er = std::get<Erlang>(kind);
    const Complex den = s + er.rate;
    if (den == Complex(0.0)) throw std::domain_error("LST pole at s = -rate");
    const Complex phase = er.rate / den;
    Complex out = 1.0;
    for (int i = 0; i < er.shape; ++i) out *= phase;
    return out;
}

ExponentialFit fit_exponential(std::span<const double> samples, const HistogramSpec &spec) {
    if (samples.empty()) throw std::invalid_argument("fit_exponential: no samples");
    if (!(spec.bin_width > 0.0) || !(spec.upper > 0.0))
        throw std::invalid_argument("fit_exponential: histogram width and upper bound must be positive");
    double sum = 0.0;
    for (double x : samples) {
        if (!(x >= 0.0) || !std::isfinite(x))
            throw std::invalid_argument("fit_exponential: samples must be finite and >= 0");
        sum += x;
    }
    const double mean = sum / static_cast<double>(samples.size());
    if (mean == 0.0) throw std::invalid_argument("fit_exponential: all samples are zero, rate undefined");

    ExponentialFit fit{ServiceDistribution::exponential(1.0 / mean), mean, samples.size(), {}, 0};

    const auto nbins = static_cast<std::size_t>(std::ceil(spec.upper / spec.bin_width));
    std::vector<std::size_t> counts(nbins, 0);
    for (double x : samples) {
        const auto idx = static_cast<std::size_t>(x / spec.bin_width);
        if (idx < nbins)
            ++counts[idx];
        else
            ++fit.overflow_count;
    }
    const double total = static_cast<double>(samples.size());
    fit.bins.reserve(nbins);
    for (std::size_t i = 0; i < nbins; ++i) {
        const double lo = static_cast<double>(i) * spec.bin_width;
        const double hi = lo + spec.bin_width;
        const double rel = static_cast<double>(counts[i]) / total;
        fit.bins.push_back({lo, hi, rel, rel / spec.bin_width, fit.distribution.density(0.5 * (lo + hi))});
    }
    return fit;
}

}  // namespace blockq
