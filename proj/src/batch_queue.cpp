#include "blockq/batch_queue.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "blockq/dense_solve.hpp"
#include "blockq/errors.hpp"

namespace blockq {

namespace {

using QuadComplex = boost::multiprecision::cpp_complex_quad;

constexpr int kDenseLimit = 512;

template <typename Scalar>
Scalar ipow(Scalar z, int n) {
    Scalar out(1);
    while (n > 0) {
        if (n & 1) out *= z;
        z *= z;
        n >>= 1;
    }
    return out;
}

// b-th root of G*(s), continued analytically along the fixed-point path.
// For the rational transforms this is the principal root; for the
// deterministic law exp(-s d / b) avoids the branch cut of Log(exp(.)).
Complex lst_root(const ServiceDistribution &dist, Complex s, int b) {
    const auto &kind = dist.kind();
    if (const auto *d = std::get_if<Deterministic>(&kind)) return std::exp(-s * d->duration / static_cast<double>(b));
    if (const auto *e = std::get_if<Erlang>(&kind))
        return std::exp(static_cast<double>(e->shape) * std::log(e->rate / (s + e->rate)) / static_cast<double>(b));
    return std::exp(std::log(lst(dist, s)) / static_cast<double>(b));
}

double root_residual(const QueueConfig &cfg, Complex z) {
    return std::abs(ipow(z, cfg.b) - lst(cfg.service, cfg.lambda - cfg.lambda * z));
}

// Newton on lambda z^{b+1} - (lambda + mu) z^b + mu, the exponential
// characteristic equation with the denominator cleared.
template <typename Scalar, typename Real>
Scalar polish_trinomial(Scalar z, int b, Real lambda, Real mu, int steps) {
    for (int i = 0; i < steps; ++i) {
        const Scalar zb1 = ipow(z, b - 1);
        const Scalar zb = zb1 * z;
        const Scalar p = zb * (lambda * z - (lambda + mu)) + mu;
        const Scalar dp = zb1 * (lambda * Real(b + 1) * z - (lambda + mu) * Real(b));
        z -= p / dp;
    }
    return z;
}

void require_stable(const QueueConfig &cfg) {
    const auto report = stability_check(cfg);
    if (!report.stable) {
        std::ostringstream os;
        os << "unstable: lambda * E[S] = " << report.offered_load << " >= b = " << cfg.b;
        throw unstable_error(os.str());
    }
}

double normalization_weight(const QueueConfig &cfg, int k) {
    const double es = cfg.service.mean();
    return static_cast<double>(cfg.b + 1 - k) * es / (cfg.b - cfg.lambda * es) + 1.0 / cfg.lambda;
}

template <typename Scalar>
std::vector<Complex> solve_dense_system(const QueueConfig &cfg, const std::vector<Scalar> &roots, double &residual) {
    using std::real;
    using std::imag;
    const int b = cfg.b;
    DenseMatrix<Scalar> a(b, b);
    DenseVector<Scalar> rhs = DenseVector<Scalar>::Zero(b);
    std::vector<Scalar> powers(static_cast<std::size_t>(b) + 1);
    for (int m = 0; m < b - 1; ++m) {
        Scalar pw = roots[static_cast<std::size_t>(m)];
        for (int k = 1; k <= b + 1; ++k) {
            powers[static_cast<std::size_t>(k - 1)] = pw;
            pw *= roots[static_cast<std::size_t>(m)];
        }
        const Scalar top = powers[static_cast<std::size_t>(b)];
        for (int k = 1; k <= b; ++k) a(m, k - 1) = top - powers[static_cast<std::size_t>(k - 1)];
    }
    for (int k = 1; k <= b; ++k) a(b - 1, k - 1) = Scalar(normalization_weight(cfg, k));
    rhs(b - 1) = Scalar(1);

    const DenseVector<Scalar> x = partial_pivot_solve<Scalar>(a, rhs);
    residual = relative_residual<Scalar>(a, x, rhs);
    std::vector<Complex> out(static_cast<std::size_t>(b));
    for (int k = 0; k < b; ++k)
        out[static_cast<std::size_t>(k)] = Complex(static_cast<double>(real(x(k))), static_cast<double>(imag(x(k))));
    return out;
}

// alpha_k is proportional to the z^{k-1} coefficient of (z - 1) prod_m (z - z_m):
// sum_k alpha_k (z^{b+1} - z^k) vanishes at 0, 1 and every z_m. The
// coefficients are recovered by sampling on the (b+1)-th roots of unity.
std::vector<Complex> solve_root_product(const QueueConfig &cfg, std::span<const Complex> roots, double &residual) {
    const int b = cfg.b;
    const int n = b + 1;
    std::vector<Complex> twiddle(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) twiddle[static_cast<std::size_t>(t)] = std::polar(1.0, -2.0 * std::numbers::pi * t / n);

    std::vector<Complex> samples(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const Complex w = std::conj(twiddle[static_cast<std::size_t>(j)]);
        Complex prod = w - 1.0;
        for (const Complex &z : roots) prod *= w - z;
        samples[static_cast<std::size_t>(j)] = prod;
    }
    std::vector<Complex> coeff(static_cast<std::size_t>(b));
    for (int k = 0; k < b; ++k) {
        Complex acc = 0.0;
        for (int j = 0; j < n; ++j)
            acc += samples[static_cast<std::size_t>(j)] *
                   twiddle[static_cast<std::size_t>((static_cast<long long>(j) * k) % n)];
        coeff[static_cast<std::size_t>(k)] = acc / static_cast<double>(n);
    }
    Complex norm = 0.0;
    for (int k = 1; k <= b; ++k) norm += normalization_weight(cfg, k) * coeff[static_cast<std::size_t>(k - 1)];
    for (auto &c : coeff) c /= norm;

    // Residual of the root equations, scaled like the dense check.
    double worst = 0.0, scale = 0.0;
    for (const Complex &a : coeff) scale = std::max(scale, std::abs(a));
    for (const Complex &z : roots) {
        Complex pw = z, acc = 0.0;
        double absacc = 0.0;
        const Complex top = ipow(z, b + 1);
        for (int k = 1; k <= b; ++k) {
            acc += (top - pw) * coeff[static_cast<std::size_t>(k - 1)];
            absacc += std::abs(top - pw);
            pw *= z;
        }
        worst = std::max(worst, std::abs(acc) / std::max(absacc * scale, 1e-300));
    }
    residual = worst;
    return coeff;
}

}  // namespace

void QueueConfig::validate() const {
    if (b < 1) throw std::invalid_argument("b must be >= 1");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive and finite");
}

StabilityReport stability_check(const QueueConfig &cfg) {
    const double load = cfg.lambda * cfg.service.mean();
    return {load < static_cast<double>(cfg.b), load};
}

std::vector<Complex> find_unit_disk_roots(const QueueConfig &cfg, const SolverOptions &opts) {
    cfg.validate();
    require_stable(cfg);
    const int b = cfg.b;
    if (b == 1) return {};

    const double lam = cfg.lambda;
    const bool exponential = cfg.service.is_exponential();
    const double mu = exponential ? std::get<Exponential>(cfg.service.kind()).rate : 0.0;

    std::vector<Complex> roots;
    roots.reserve(static_cast<std::size_t>(b - 1));
    double worst = 0.0;
    for (int m = 1; m < b; ++m) {
        const Complex omega = std::polar(1.0, 2.0 * std::numbers::pi * m / b);
        Complex z = omega * lst_root(cfg.service, lam, b);
        for (int it = 0; it < opts.max_iterations; ++it) {
            const Complex next = omega * lst_root(cfg.service, lam - lam * z, b);
            const double step = std::abs(next - z);
            z = next;
            if (step <= opts.step_tolerance) break;
        }
        if (exponential) z = polish_trinomial(z, b, lam, mu, 3);
        const double res = root_residual(cfg, z);
        worst = std::max(worst, res);
        if (!(res <= opts.root_residual_tolerance) || !(std::abs(z) < 1.0)) {
            std::ostringstream os;
            os << "root " << m << " of " << b - 1 << " did not converge (residual " << res << ", |z| = " << std::abs(z)
               << ")";
            throw numerical_error(os.str());
        }
        roots.push_back(z);
    }

    std::sort(roots.begin(), roots.end(), [](const Complex &x, const Complex &y) {
        const double ax = std::arg(x), ay = std::arg(y);
        if (ax != ay) return ax < ay;
        return std::abs(x) < std::abs(y);
    });

    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (std::abs(roots[i] - 1.0) <= 1e-9) throw numerical_error("root collided with z = 1");
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if (std::abs(roots[i] - roots[j]) <= 1e-9) {
                std::ostringstream os;
                os << "numerically degenerate: roots " << i << " and " << j << " coincide";
                throw numerical_error(os.str());
            }
    }
    return roots;
}

AlphaSolution solve_alpha(const QueueConfig &cfg, std::span<const Complex> roots, const SolverOptions &opts) {
    cfg.validate();
    require_stable(cfg);
    const int b = cfg.b;
    if (roots.size() != static_cast<std::size_t>(b - 1))
        throw std::invalid_argument("solve_alpha: expected b - 1 roots");

    const double lam = cfg.lambda;
    if (b == 1) {
        const double a1 = lam * (1.0 - lam * cfg.service.mean());
        return {{a1}, a1 / lam, 0.0};
    }

    AlphaMethod method = opts.alpha_method;
    if (method == AlphaMethod::kAuto) method = b <= kDenseLimit ? AlphaMethod::kDenseLU : AlphaMethod::kRootProduct;

    double residual = 0.0;
    std::vector<Complex> raw;
    if (method == AlphaMethod::kRootProduct) {
        raw = solve_root_product(cfg, roots, residual);
    } else if (opts.extended_precision) {
        std::vector<QuadComplex> quad;
        quad.reserve(roots.size());
        const bool exponential = cfg.service.is_exponential();
        for (const Complex &z : roots) {
            QuadComplex q(z.real(), z.imag());
            if (exponential) {
                using Real = boost::multiprecision::cpp_bin_float_quad;
                q = polish_trinomial(q, b, Real(lam), Real(std::get<Exponential>(cfg.service.kind()).rate), 2);
            }
            quad.push_back(q);
        }
        raw = solve_dense_system(cfg, quad, residual);
    } else {
        const std::vector<Complex> copy(roots.begin(), roots.end());
        raw = solve_dense_system(cfg, copy, residual);
    }

    if (!(residual <= opts.system_residual_tolerance)) {
        std::ostringstream os;
        os << "boundary system residual " << residual << " exceeds " << opts.system_residual_tolerance
           << "; retry with extended precision";
        throw numerical_error(os.str());
    }

    double scale = 0.0;
    for (const Complex &a : raw) scale = std::max(scale, std::abs(a));
    const double clamp = 1e-8 * scale;
    AlphaSolution out;
    out.alpha.resize(static_cast<std::size_t>(b));
    out.system_residual = residual;
    double total = 0.0;
    for (int k = 0; k < b; ++k) {
        const Complex a = raw[static_cast<std::size_t>(k)];
        if (std::abs(a.imag()) > clamp || a.real() < -clamp) {
            std::ostringstream os;
            os << "alpha_" << k + 1 << " = " << a << " is not a nonnegative real; retry with extended precision";
            throw numerical_error(os.str());
        }
        const double v = std::max(a.real(), 0.0);
        out.alpha[static_cast<std::size_t>(k)] = v;
        total += v;
    }
    out.p0 = total / lam;
    if (!(out.p0 > 0.0 && out.p0 < 1.0)) {
        std::ostringstream os;
        os << "idle probability " << out.p0 << " outside (0, 1)";
        throw numerical_error(os.str());
    }
    return out;
}

double mean_sojourn_from_alpha(const QueueConfig &cfg, std::span<const double> alpha) {
    const double bb = cfg.b;
    const double lam = cfg.lambda;
    const double es = cfg.service.mean();
    const double es2 = cfg.service.second_moment();
    double acc = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        acc += alpha[i] *
               (bb * (bb - 1.0) + ((bb + 1.0) * bb - k * (k - 1.0)) * lam * es + (bb - k) * lam * lam * es2);
    }
    acc -= lam * (bb * (bb - 1.0) - lam * lam * es2);
    return acc / (2.0 * lam * lam * (bb - lam * es));
}

AnalyticSolution solve(const QueueConfig &cfg, const SolverOptions &opts) {
    AnalyticSolution sol;
    sol.roots = find_unit_disk_roots(cfg, opts);
    auto alpha = solve_alpha(cfg, sol.roots, opts);
    sol.alpha = std::move(alpha.alpha);
    sol.p0 = alpha.p0;
    sol.system_residual = alpha.system_residual;
    sol.residual = 0.0;
    for (const Complex &z : sol.roots) sol.residual = std::max(sol.residual, root_residual(cfg, z));
    sol.mean_sojourn = mean_sojourn_from_alpha(cfg, sol.alpha);
    sol.mean_queue = cfg.lambda * sol.mean_sojourn;
    return sol;
}

double mean_confirmation_time(const QueueConfig &cfg, const SolverOptions &opts) {
    return solve(cfg, opts).mean_sojourn;
}

namespace {

Complex pgf_direct(const QueueConfig &cfg, const AnalyticSolution &sol, Complex z, bool &singular) {
    const int b = cfg.b;
    const Complex w = cfg.lambda - cfg.lambda * z;
    const Complex g = lst(cfg.service, w);
    const Complex zb = ipow(z, b);
    const Complex den = zb - g;
    const Complex top = zb * z;
    Complex num = 0.0, pw = z;
    for (std::size_t i = 0; i < sol.alpha.size(); ++i) {
        num += (top - pw) * sol.alpha[i];
        pw *= z;
    }
    singular = std::abs(den) <= 1e-12 * (std::abs(zb) + std::abs(g));
    if (singular) return 0.0;
    return sol.p0 + num / den * (1.0 - g) / w;
}

}  // namespace

Complex pgf_evaluate(const QueueConfig &cfg, const AnalyticSolution &sol, Complex z) {
    if (std::abs(z - 1.0) <= 1e-12) return 1.0;
    bool singular = false;
    const Complex direct = pgf_direct(cfg, sol, z, singular);
    if (!singular) return direct;
    for (const Complex &r : sol.roots) {
        if (std::abs(z - r) <= 1e-7) {
            const double h = 1e-5;
            bool s1 = false, s2 = false;
            const Complex lo = pgf_direct(cfg, sol, z - h, s1);
            const Complex hi = pgf_direct(cfg, sol, z + h, s2);
            if (!s1 && !s2) return 0.5 * (lo + hi);
        }
    }
    std::ostringstream os;
    os << "pgf pole at z = " << z;
    throw std::domain_error(os.str());
}

Complex pgf_evaluate(const QueueConfig &cfg, Complex z, const SolverOptions &opts) {
    return pgf_evaluate(cfg, solve(cfg, opts), z);
}

}  // namespace blockq
