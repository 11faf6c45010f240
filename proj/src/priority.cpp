#include "blockq/priority.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "blockq/errors.hpp"

namespace blockq {

double PriorityTraffic::total_rate() const { return std::accumulate(rates.begin(), rates.end(), 0.0); }

void PriorityTraffic::validate() const {
    if (rates.empty()) throw std::invalid_argument("priority traffic needs at least one class");
    if (b < 1) throw std::invalid_argument("b must be >= 1");
    for (double r : rates)
        if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("class rates must be positive and finite");
}

std::vector<double> class_confirmation_times(const PriorityTraffic &traffic, const SolverOptions &opts) {
    traffic.validate();
    const double es = traffic.service.mean();

    double cumulative = 0.0;
    for (std::size_t i = 0; i < traffic.rates.size(); ++i) {
        cumulative += traffic.rates[i];
        if (!(cumulative * es < static_cast<double>(traffic.b))) {
            std::ostringstream os;
            os << "class " << i + 1 << " is the first unstable prefix: cumulative load " << cumulative * es
               << " >= b = " << traffic.b;
            throw unstable_error(os.str());
        }
    }

    std::vector<double> times;
    times.reserve(traffic.rates.size());
    cumulative = 0.0;
    double weighted = 0.0;  // sum_{k<i} lambda_k E[T_k]
    for (double rate : traffic.rates) {
        cumulative += rate;
        const double f = mean_confirmation_time({traffic.b, cumulative, traffic.service}, opts);
        const double t = (cumulative * f - weighted) / rate;
        times.push_back(t);
        weighted += rate * t;
    }
    return times;
}

std::pair<double, double> two_class_times(double lambda_h, double lambda_l, const ServiceDistribution &service, int b,
                                          const SolverOptions &opts) {
    const auto t = class_confirmation_times({{lambda_h, lambda_l}, service, b}, opts);
    return {t[0], t[1]};
}

std::pair<double, double> split_by_ratio(double lambda, double zeta) {
    if (!(zeta > 0.0)) throw std::invalid_argument("zeta must be positive");
    return {zeta * lambda / (1.0 + zeta), lambda / (1.0 + zeta)};
}

}  // namespace blockq
