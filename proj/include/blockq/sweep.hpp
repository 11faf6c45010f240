#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blockq/batch_queue.hpp"
#include "blockq/service.hpp"

namespace blockq {

enum class SweepMode {
    kClassless,  // lambda is the aggregate rate; class "all"
    kFixedZeta,  // lambda is the aggregate rate, split at lambda_H / lambda_L = zeta
    kFixedHigh   // lambda is lambda_L; lambda_H held at `lambda_high`
};

struct SweepSpec {
    double start;
    double stop;
    int points;
    std::vector<int> b_values;
    SweepMode mode = SweepMode::kClassless;
    double zeta = 13.288;
    double lambda_high = 0.90466;
    ServiceDistribution service = ServiceDistribution::exponential(1.8379e-3);

    void validate() const;
};

struct SweepRow {
    double lambda;
    int b;
    std::string cls;              // "all", "H" or "L"
    std::optional<double> value;  // absent when the point is unstable for this class
};

std::vector<double> sweep_grid(const SweepSpec &spec);

/// Rows ordered by b (as given), then lambda, then class H before L.
/// Numerical failures at stable points propagate as numerical_error.
std::vector<SweepRow> run_sweep(const SweepSpec &spec, const SolverOptions &opts = {});

// CSV `lambda,b,class,mean_tct_s`; unstable points carry `unstable`.
void write_sweep_csv(std::ostream &os, std::span<const SweepRow> rows);

}  // namespace blockq
