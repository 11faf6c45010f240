#include "blockq/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "blockq/rng.hpp"

namespace blockq {

namespace {

double draw_service(const ServiceDistribution &dist, Xoshiro256 &rng) {
    const auto &kind = dist.kind();
    if (const auto *e = std::get_if<Exponential>(&kind)) return rng.exponential(e->rate);
    if (const auto *d = std::get_if<Deterministic>(&kind)) return d->duration;
    const auto &er = std::get<Erlang>(kind);
    double total = 0.0;
    for (int i = 0; i < er.shape; ++i) total += rng.exponential(er.rate);
    return total;
}

struct MeanCi {
    double mean;
    double half_width;
};

MeanCi mean_ci(const std::vector<double> &xs) {
    constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
    if (xs.size() < 2) return {xs.empty() ? kNaN : xs.front(), kNaN};
    const double n = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    return {mean, student_t_975(static_cast<int>(xs.size()) - 1) * sd / std::sqrt(n)};
}

}  // namespace

void SimConfig::validate() const {
    traffic.validate();
    if (replications < 2) throw std::invalid_argument("need at least two replications for a confidence interval");
    if (horizon == 0) throw std::invalid_argument("horizon must be positive");
}

double student_t_975(int dof) {
    const boost::math::students_t_distribution<double> dist(static_cast<double>(dof));
    return boost::math::quantile(dist, 0.975);
}

ReplicationResult run_replication(const SimConfig &cfg, int replication_index, SimObserver *observer) {
    cfg.validate();
    const auto &rates = cfg.traffic.rates;
    const std::size_t classes = rates.size();
    const auto b = static_cast<std::size_t>(cfg.traffic.b);
    constexpr double kNever = std::numeric_limits<double>::infinity();

    Xoshiro256 rng(substream_seed(cfg.seed, static_cast<std::uint64_t>(replication_index)));

    std::vector<double> next_arrival(classes);
    for (std::size_t c = 0; c < classes; ++c) next_arrival[c] = rng.exponential(rates[c]);

    std::vector<std::deque<SimTransaction>> queues(classes);
    std::vector<SimTransaction> batch;
    batch.reserve(b);
    std::size_t queued = 0;
    bool busy = false;
    double completion = kNever;

    ReplicationResult out;
    out.class_count.assign(classes, 0);
    std::vector<double> class_sum(classes, 0.0);
    std::uint64_t recorded = 0;

    bool measuring = cfg.warmup == 0;
    double window_start = 0.0, last_event = 0.0, area = 0.0, idle = 0.0;

    // Per-class occupancy of the block in service.
    std::vector<std::size_t> in_batch(classes, 0);

    // Index of the transaction an arrival of class `cls` may evict, or
    // batch.size() when none.
    auto displacement_victim = [&](int cls) -> std::size_t {
        if (cfg.accretion != AccretionPolicy::kPriorityDisplacement) return batch.size();
        for (std::size_t c = classes; c-- > static_cast<std::size_t>(cls) + 1;) {
            if (in_batch[c] == 0) continue;
            for (std::size_t i = batch.size(); i-- > 0;)
                if (batch[i].cls == static_cast<int>(c)) return i;
        }
        return batch.size();
    };

    auto start_service = [&](double now) {
        std::fill(in_batch.begin(), in_batch.end(), 0);
        for (const auto &tx : batch) ++in_batch[static_cast<std::size_t>(tx.cls)];
        busy = true;
        completion = now + draw_service(cfg.traffic.service, rng);
        if (observer) observer->on_service_start(now, batch);
    };

    for (;;) {
        std::size_t next_class = 0;
        for (std::size_t c = 1; c < classes; ++c)
            if (next_arrival[c] < next_arrival[next_class]) next_class = c;
        const double t_arrival = next_arrival[next_class];
        const double now = std::min(t_arrival, completion);

        if (measuring) {
            const std::size_t n = batch.size() + queued;
            area += static_cast<double>(n) * (now - last_event);
            if (n == 0) idle += now - last_event;
        }
        last_event = now;

        if (t_arrival < completion) {
            const SimTransaction tx{out.arrivals++, static_cast<int>(next_class), now};
            next_arrival[next_class] = now + rng.exponential(rates[next_class]);
            if (!busy) {
                batch.push_back(tx);
                start_service(now);
            } else if (batch.size() < b) {
                batch.push_back(tx);
                ++in_batch[next_class];
                if (observer) observer->on_accretion(now, tx);
            } else if (auto victim = displacement_victim(tx.cls); victim != batch.size()) {
                const SimTransaction evicted = batch[victim];
                batch.erase(batch.begin() + static_cast<std::ptrdiff_t>(victim));
                --in_batch[static_cast<std::size_t>(evicted.cls)];
                queues[static_cast<std::size_t>(evicted.cls)].push_front(evicted);
                ++queued;
                batch.push_back(tx);
                ++in_batch[next_class];
                if (observer) observer->on_displacement(now, evicted, tx);
            } else {
                queues[next_class].push_back(tx);
                if (++queued > cfg.instability_limit) {
                    out.unstable = true;
                    break;
                }
            }
            continue;
        }

        if (observer) observer->on_confirm(now, batch);
        out.max_batch = std::max(out.max_batch, batch.size());
        for (const SimTransaction &tx : batch) {
            ++out.departures;
            if (out.departures > cfg.warmup) {
                class_sum[static_cast<std::size_t>(tx.cls)] += now - tx.arrival;
                ++out.class_count[static_cast<std::size_t>(tx.cls)];
                ++recorded;
            }
        }
        batch.clear();
        if (!measuring && out.departures >= cfg.warmup) {
            measuring = true;
            window_start = now;
        }
        if (recorded >= cfg.horizon) break;

        if (queued == 0) {
            busy = false;
            completion = kNever;
            continue;
        }
        for (auto &q : queues) {
            while (!q.empty() && batch.size() < b) {
                batch.push_back(q.front());
                q.pop_front();
                --queued;
            }
        }
        start_service(now);
    }

    out.in_system_at_end = batch.size() + queued;
    out.measured_time = last_event - window_start;
    if (out.measured_time > 0.0) {
        out.idle_fraction = idle / out.measured_time;
        out.mean_in_system = area / out.measured_time;
    }
    out.class_mean.resize(classes);
    for (std::size_t c = 0; c < classes; ++c)
        out.class_mean[c] = out.class_count[c] > 0 ? class_sum[c] / static_cast<double>(out.class_count[c])
                                                   : std::numeric_limits<double>::quiet_NaN();
    return out;
}

SimEstimate estimate(const SimConfig &cfg) {
    cfg.validate();
    const std::size_t classes = cfg.traffic.rates.size();
    SimEstimate est;
    est.replications = cfg.replications;
    est.runs.reserve(static_cast<std::size_t>(cfg.replications));
    for (int r = 0; r < cfg.replications; ++r) {
        est.runs.push_back(run_replication(cfg, r));
        est.unstable = est.unstable || est.runs.back().unstable;
    }

    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<double> xs;
        for (const auto &run : est.runs)
            if (run.class_count[c] > 0) xs.push_back(run.class_mean[c]);
        if (xs.size() < 2 && est.unstable) {
            est.class_mean.push_back(std::numeric_limits<double>::quiet_NaN());
            est.class_half_width.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        if (xs.size() < 2)
            throw std::runtime_error("class " + std::to_string(c + 1) + ": fewer than 2 replications produced samples");
        const MeanCi ci = mean_ci(xs);
        est.class_mean.push_back(ci.mean);
        est.class_half_width.push_back(ci.half_width);
    }

    std::vector<double> overall, idle, in_system;
    for (const auto &run : est.runs) {
        double sum = 0.0;
        std::uint64_t count = 0;
        for (std::size_t c = 0; c < classes; ++c) {
            if (run.class_count[c] == 0) continue;
            sum += run.class_mean[c] * static_cast<double>(run.class_count[c]);
            count += run.class_count[c];
        }
        if (count > 0) overall.push_back(sum / static_cast<double>(count));
        idle.push_back(run.idle_fraction);
        in_system.push_back(run.mean_in_system);
    }
    const MeanCi all = mean_ci(overall);
    est.overall_mean = all.mean;
    est.overall_half_width = all.half_width;
    est.idle_fraction = mean_ci(idle).mean;
    est.mean_in_system = mean_ci(in_system).mean;
    return est;
}

void write_replication_csv(std::ostream &os, const SimEstimate &est) {
    os << "replication,class,mean_tct_s\n";
    char buf[64];
    for (std::size_t r = 0; r < est.runs.size(); ++r) {
        const auto &run = est.runs[r];
        for (std::size_t c = 0; c < run.class_mean.size(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", run.class_mean[c]);
            os << r << ',' << c + 1 << ',' << buf << '\n';
        }
    }
}

ValidationReport verify_against_analysis(const SimConfig &cfg, const SolverOptions &opts) {
    cfg.validate();
    const std::vector<double> analytic = class_confirmation_times(cfg.traffic, opts);
    ValidationReport report{{}, 0.0, false, false, estimate(cfg)};
    const SimEstimate &sim = report.simulation;

    report.all_pass = !sim.unstable;
    for (std::size_t c = 0; c < analytic.size(); ++c) {
        const double lo = sim.class_mean[c] - sim.class_half_width[c];
        const double hi = sim.class_mean[c] + sim.class_half_width[c];
        const bool inside = analytic[c] >= lo && analytic[c] <= hi;
        report.classes.push_back({analytic[c], sim.class_mean[c], sim.class_half_width[c], inside});
        report.all_pass = report.all_pass && inside;
    }
    const double little = cfg.traffic.total_rate() * sim.overall_mean;
    report.little_relative_error = std::abs(sim.mean_in_system - little) / sim.mean_in_system;
    report.little_ok = report.little_relative_error <= 0.02;
    report.all_pass = report.all_pass && report.little_ok;
    return report;
}

}  // namespace blockq
