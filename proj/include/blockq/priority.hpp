#pragma once

#include <utility>
#include <vector>

#include "blockq/batch_queue.hpp"
#include "blockq/service.hpp"

namespace blockq {

/// Per-class Poisson rates, class 1 (index 0) has the highest priority.
struct PriorityTraffic {
    std::vector<double> rates;
    ServiceDistribution service;
    int b;

    double total_rate() const;
    // Throws std::invalid_argument on an empty class list, b < 1 or a
    // non-positive rate.
    void validate() const;
};

// Every output of this module is a work-conserving approximation: the
// real discipline is not work conserving, and the simulator is the
// reference when the two disagree.
inline constexpr const char *kDecompositionLabel = "work-conserving approximation";

/// E[T_1..T_c] by the conservation recursion over cumulative rates.
/// Throws unstable_error naming the first class whose prefix load
/// reaches b.
std::vector<double> class_confirmation_times(const PriorityTraffic &traffic, const SolverOptions &opts = {});

/// Two-class shorthand: (E[T_H], E[T_L]).
std::pair<double, double> two_class_times(double lambda_h, double lambda_l, const ServiceDistribution &service, int b,
                                          const SolverOptions &opts = {});

/// Split an aggregate rate at the fixed ratio zeta = lambda_H / lambda_L.
std::pair<double, double> split_by_ratio(double lambda, double zeta);

}  // namespace blockq
