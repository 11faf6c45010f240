#pragma once

#include <complex>
#include <span>
#include <variant>
#include <vector>

namespace blockq {

using Complex = std::complex<double>;

struct Exponential {
    double rate;  // mu, 1/seconds
};

// Experimental: constant block-generation time.
struct Deterministic {
    double duration;  // seconds
};

// Experimental: sum of `shape` exponential phases, each with `rate`.
struct Erlang {
    int shape;
    double rate;
};

/// Block-generation (service) time law S.
///
/// Immutable once constructed; the constructor rejects non-positive
/// parameters so every instance satisfies E[S] > 0 and E[S^2] >= E[S]^2.
class ServiceDistribution {
public:
    using Kind = std::variant<Exponential, Deterministic, Erlang>;

    explicit ServiceDistribution(Kind kind);

    static ServiceDistribution exponential(double rate) { return ServiceDistribution(Exponential{rate}); }
    static ServiceDistribution deterministic(double d) { return ServiceDistribution(Deterministic{d}); }
    static ServiceDistribution erlang(int shape, double rate) { return ServiceDistribution(Erlang{shape, rate}); }

    const Kind &kind() const { return kind_; }
    bool is_exponential() const { return std::holds_alternative<Exponential>(kind_); }

    double mean() const { return mean_; }
    double second_moment() const { return second_moment_; }

    // Sample-independent density g(x); zero for Deterministic.
    double density(double x) const;

private:
    Kind kind_;
    double mean_;
    double second_moment_;
};

/// Laplace-Stieltjes transform G*(s) = E[exp(-s S)], principal branch.
/// Throws std::domain_error at the pole of the exponential/Erlang forms.
Complex lst(const ServiceDistribution &dist, Complex s);

struct HistogramBin {
    double lower;
    double upper;
    double relative_frequency;  // count / total samples
    double empirical_density;   // relative_frequency / width
    double model_density;       // fitted g at the bin midpoint
};

struct ExponentialFit {
    ServiceDistribution distribution;
    double sample_mean;
    std::size_t sample_count;
    std::vector<HistogramBin> bins;
    std::size_t overflow_count;  // samples at or beyond the last bin edge
};

struct HistogramSpec {
    double bin_width = 60.0;
    double upper = 6600.0;
};

/// Maximum-likelihood exponential fit (rate = 1 / sample mean) together
/// with the binned relative frequencies used to eyeball the fit.
/// Zero-length intervals are accepted: recorded block timestamps are not
/// monotone, so clamped differences of 0 s occur in real exports.
ExponentialFit fit_exponential(std::span<const double> samples, const HistogramSpec &spec = {});

}  // namespace blockq
