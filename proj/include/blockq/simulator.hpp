#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "blockq/batch_queue.hpp"
#include "blockq/priority.hpp"

namespace blockq {

/// What happens when a transaction arrives while the block in service is full.
enum class AccretionPolicy {
    // Block contents never change once joined; the arrival waits.
    kImmutable,
    // The arrival evicts the most recently joined transaction of the lowest
    // class below its own, which returns to the head of its class queue.
    // Higher classes then see exactly the single-class queue of their own
    // cumulative traffic, so the priority decomposition becomes exact.
    kPriorityDisplacement
};

struct SimConfig {
    PriorityTraffic traffic;
    std::uint64_t seed = 1;
    int replications = 50;
    std::uint64_t warmup = 10'000;    // confirmations discarded per replication
    std::uint64_t horizon = 100'000;  // confirmations measured per replication
    std::uint64_t instability_limit = 1'000'000;
    AccretionPolicy accretion = AccretionPolicy::kImmutable;

    void validate() const;
};

struct SimTransaction {
    std::uint64_t id;  // arrival order, all classes
    int cls;           // 0 = highest priority
    double arrival;
};

/// Hook for tests that audit the discipline batch by batch.
class SimObserver {
public:
    virtual ~SimObserver() = default;
    virtual void on_service_start(double time, std::span<const SimTransaction> batch) = 0;
    virtual void on_accretion(double time, const SimTransaction &tx) = 0;
    virtual void on_displacement(double time, const SimTransaction &evicted, const SimTransaction &by) = 0;
    virtual void on_confirm(double time, std::span<const SimTransaction> batch) = 0;
};

struct ReplicationResult {
    std::vector<double> class_mean;  // NaN where a class saw no samples
    std::vector<std::uint64_t> class_count;
    double idle_fraction = 0.0;
    double mean_in_system = 0.0;
    double measured_time = 0.0;
    bool unstable = false;
    // Whole-run counters, warmup included.
    std::uint64_t arrivals = 0;
    std::uint64_t departures = 0;
    std::uint64_t in_system_at_end = 0;
    std::size_t max_batch = 0;
};

/// One independent replication of the batch-service priority queue.
/// Arrivals join the block in service while it holds fewer than b
/// transactions (a full block is handled per cfg.accretion); at completion
/// the next block takes up to b queued transactions, highest class first,
/// FIFO within a class.
ReplicationResult run_replication(const SimConfig &cfg, int replication_index, SimObserver *observer = nullptr);

struct SimEstimate {
    std::vector<double> class_mean;
    std::vector<double> class_half_width;  // 95% Student-t
    double overall_mean = 0.0;
    double overall_half_width = 0.0;
    double idle_fraction = 0.0;
    double mean_in_system = 0.0;
    int replications = 0;
    bool unstable = false;
    std::vector<ReplicationResult> runs;
};

/// Aggregates cfg.replications runs; replication r draws from the
/// substream (seed, r). Throws std::runtime_error if fewer than two
/// replications produced samples for some class.
SimEstimate estimate(const SimConfig &cfg);

// CSV `replication,class,mean_tct_s`, classes numbered from 1.
void write_replication_csv(std::ostream &os, const SimEstimate &est);

struct ClassCheck {
    double analytic;
    double simulated;
    double half_width;
    bool analytic_inside_ci;
};

struct ValidationReport {
    std::vector<ClassCheck> classes;
    double little_relative_error;  // |E[N] - lambda E[T]| / E[N] from the simulation
    bool little_ok;
    bool all_pass;
    SimEstimate simulation;
};

ValidationReport verify_against_analysis(const SimConfig &cfg, const SolverOptions &opts = {});

/// 97.5% Student-t quantile with `dof` degrees of freedom.
double student_t_975(int dof);

}  // namespace blockq
