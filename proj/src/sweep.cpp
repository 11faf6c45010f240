#include "blockq/sweep.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "blockq/priority.hpp"

namespace blockq {

void SweepSpec::validate() const {
    if (points < 1) throw std::invalid_argument("sweep needs at least one point");
    if (!(start > 0.0) || !(stop >= start)) throw std::invalid_argument("sweep grid must satisfy 0 < start <= stop");
    if (b_values.empty()) throw std::invalid_argument("sweep needs at least one b");
    for (int b : b_values)
        if (b < 1) throw std::invalid_argument("b must be >= 1");
    if (mode == SweepMode::kFixedZeta && !(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
    if (mode == SweepMode::kFixedHigh && !(lambda_high > 0.0)) throw std::invalid_argument("lambda_H must be positive");
}

std::vector<double> sweep_grid(const SweepSpec &spec) {
    spec.validate();
    if (spec.points == 1) return {spec.start};
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(spec.points));
    for (int i = 0; i < spec.points; ++i)
        grid.push_back(spec.start + (spec.stop - spec.start) * i / (spec.points - 1));
    return grid;
}

std::vector<SweepRow> run_sweep(const SweepSpec &spec, const SolverOptions &opts) {
    const auto grid = sweep_grid(spec);
    const double es = spec.service.mean();
    std::vector<SweepRow> rows;
    for (int b : spec.b_values) {
        auto stable = [&](double rate) { return rate * es < static_cast<double>(b); };
        auto f = [&](double rate) { return mean_confirmation_time({b, rate, spec.service}, opts); };
        for (double lambda : grid) {
            if (spec.mode == SweepMode::kClassless) {
                rows.push_back({lambda, b, "all", stable(lambda) ? std::optional(f(lambda)) : std::nullopt});
                continue;
            }
            const auto [lh, ll] =
                spec.mode == SweepMode::kFixedZeta ? split_by_ratio(lambda, spec.zeta) : std::pair(spec.lambda_high, lambda);
            std::optional<double> th, tl;
            if (stable(lh)) {
                const double fh = f(lh);
                th = fh;
                if (stable(lh + ll)) tl = ((lh + ll) * f(lh + ll) - lh * fh) / ll;
            }
            rows.push_back({lambda, b, "H", th});
            rows.push_back({lambda, b, "L", tl});
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream &os, std::span<const SweepRow> rows) {
    os << "lambda,b,class,mean_tct_s\n";
    char buf[64];
    for (const auto &row : rows) {
        std::snprintf(buf, sizeof buf, "%.10g", row.lambda);
        os << buf << ',' << row.b << ',' << row.cls << ',';
        if (row.value) {
            std::snprintf(buf, sizeof buf, "%.10g", *row.value);
            os << buf;
        } else {
            os << "unstable";
        }
        os << '\n';
    }
}

}  // namespace blockq
