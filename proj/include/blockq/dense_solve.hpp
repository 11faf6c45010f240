#pragma once

#include <cstddef>
#include <type_traits>
#include <utility>

#include <Eigen/Dense>

namespace blockq {

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Gaussian elimination with partial pivoting for any field-like Scalar.
///
/// Eigen's blocked LU is used for the native floating types. Other scalars
/// (the 113-bit multiprecision complex used by the extended-precision
/// path) go through the unblocked loop below, since Eigen's LU kernels
/// assume a trivially copyable scalar.
template <typename Scalar>
DenseVector<Scalar> partial_pivot_solve(DenseMatrix<Scalar> a, DenseVector<Scalar> rhs) {
    if constexpr (std::is_trivially_copyable_v<Scalar>) {
        return a.partialPivLu().solve(rhs);
    } else {
        using std::abs;
        const Eigen::Index n = a.rows();
        for (Eigen::Index k = 0; k < n; ++k) {
            Eigen::Index pivot = k;
            auto best = abs(a(k, k));
            for (Eigen::Index i = k + 1; i < n; ++i) {
                auto cand = abs(a(i, k));
                if (cand > best) {
                    best = cand;
                    pivot = i;
                }
            }
            if (pivot != k) {
                a.row(k).swap(a.row(pivot));
                std::swap(rhs(k), rhs(pivot));
            }
            const Scalar diag = a(k, k);
            for (Eigen::Index i = k + 1; i < n; ++i) {
                const Scalar factor = a(i, k) / diag;
                if (factor == Scalar(0)) continue;
                for (Eigen::Index j = k; j < n; ++j) a(i, j) -= factor * a(k, j);
                rhs(i) -= factor * rhs(k);
            }
        }
        DenseVector<Scalar> x(n);
        for (Eigen::Index i = n - 1; i >= 0; --i) {
            Scalar acc = rhs(i);
            for (Eigen::Index j = i + 1; j < n; ++j) acc -= a(i, j) * x(j);
            x(i) = acc / a(i, i);
        }
        return x;
    }
}

/// ||A x - rhs||_inf / (||A||_inf ||x||_inf + ||rhs||_inf), computed in Scalar.
template <typename Scalar>
double relative_residual(const DenseMatrix<Scalar> &a, const DenseVector<Scalar> &x,
                         const DenseVector<Scalar> &rhs) {
    using std::abs;
    double worst = 0.0, anorm = 0.0, xnorm = 0.0, bnorm = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        Scalar acc = -rhs(i);
        double rowsum = 0.0;
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            acc += a(i, j) * x(j);
            rowsum += static_cast<double>(abs(a(i, j)));
        }
        worst = std::max(worst, static_cast<double>(abs(acc)));
        anorm = std::max(anorm, rowsum);
        bnorm = std::max(bnorm, static_cast<double>(abs(rhs(i))));
    }
    for (Eigen::Index j = 0; j < x.size(); ++j) xnorm = std::max(xnorm, static_cast<double>(abs(x(j))));
    const double scale = anorm * xnorm + bnorm;
    return scale > 0.0 ? worst / scale : worst;
}

}  // namespace blockq
