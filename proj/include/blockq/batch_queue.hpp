#pragma once

#include <complex>
#include <span>
#include <vector>

#include "blockq/service.hpp"

namespace blockq {

/// Single-class batch-service queue: Poisson arrivals at `lambda`, blocks
/// of at most `b` transactions, block-generation time `service`.
struct QueueConfig {
    int b;
    double lambda;
    ServiceDistribution service;

    // Throws std::invalid_argument unless b >= 1 and lambda > 0.
    void validate() const;
};

struct StabilityReport {
    bool stable;
    double offered_load;  // lambda * E[S]
};

StabilityReport stability_check(const QueueConfig &cfg);

enum class AlphaMethod {
    kAuto,        // dense LU up to b = 512, root product above
    kDenseLU,     // b x b boundary system, partial pivoting
    kRootProduct  // coefficients of (z - 1) prod (z - z_m), O(b^2)
};

struct SolverOptions {
    AlphaMethod alpha_method = AlphaMethod::kAuto;
    // Build and solve the boundary system with a 113-bit significand.
    bool extended_precision = false;
    int max_iterations = 10000;
    double step_tolerance = 1e-14;
    double root_residual_tolerance = 1e-10;
    double system_residual_tolerance = 1e-8;
};

/// The b - 1 roots of z^b = G*(lambda - lambda z) inside the unit disk,
/// excluding z = 1, sorted by principal argument then modulus.
/// Throws unstable_error, or numerical_error on non-convergence or
/// colliding roots.
std::vector<Complex> find_unit_disk_roots(const QueueConfig &cfg, const SolverOptions &opts = {});

struct AlphaSolution {
    std::vector<double> alpha;  // alpha_1 .. alpha_b
    double p0;                  // (1 / lambda) sum alpha_k
    double system_residual;
};

/// Boundary rates alpha_k from the root equations plus normalization.
AlphaSolution solve_alpha(const QueueConfig &cfg, std::span<const Complex> roots, const SolverOptions &opts = {});

/// Mean sojourn time E[T] given the boundary rates.
double mean_sojourn_from_alpha(const QueueConfig &cfg, std::span<const double> alpha);

struct AnalyticSolution {
    std::vector<Complex> roots;
    std::vector<double> alpha;
    double p0;
    double mean_queue;    // E[N] = lambda * E[T]
    double mean_sojourn;  // E[T], seconds
    double residual;      // max |z^b - G*(lambda - lambda z)| over roots
    double system_residual;
};

AnalyticSolution solve(const QueueConfig &cfg, const SolverOptions &opts = {});

/// f(lambda) = E[T]. The building block of the priority decomposition.
double mean_confirmation_time(const QueueConfig &cfg, const SolverOptions &opts = {});

/// Stationary queue-length pgf P(z). z = 1 and the unit-disk roots are
/// removable singularities; any other zero of the denominator throws
/// std::domain_error.
Complex pgf_evaluate(const QueueConfig &cfg, const AnalyticSolution &solution, Complex z);
Complex pgf_evaluate(const QueueConfig &cfg, Complex z, const SolverOptions &opts = {});

}  // namespace blockq
