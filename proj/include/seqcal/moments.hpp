#pragma once

#include <cmath>

#include <Eigen/Core>
#include <fmt/format.h>

#include "seqcal/dist.hpp"
#include "seqcal/errors.hpp"

namespace seqcal {

/// Sample mean and biased (1/n) central moments m2..m4.
template <typename Scalar>
struct SampleMoments {
    Eigen::Index n = 0;
    Scalar m1 = 0;
    Scalar m2 = 0;
    Scalar m3 = 0;
    Scalar m4 = 0;

    Scalar operator[](int k) const
    {
        switch (k) {
        case 1: return m1;
        case 2: return m2;
        case 3: return m3;
        case 4: return m4;
        default: throw UnsupportedError("moment order must be in 1..4");
        }
    }
};

/// Two passes: mean first, then powers of the deviations.
template <typename Derived>
SampleMoments<typename Derived::Scalar> sample_moments(const Eigen::DenseBase<Derived>& xs)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = xs.size();
    if (n == 0)
        throw DomainError("sample moments of an empty sample");
    SampleMoments<Scalar> out;
    out.n = n;
    out.m1 = xs.derived().sum() / static_cast<Scalar>(n);
    Scalar s2 = 0, s3 = 0, s4 = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Scalar d = xs.derived().coeff(i) - out.m1;
        const Scalar d2 = d * d;
        s2 += d2;
        s3 += d2 * d;
        s4 += d2 * d2;
    }
    out.m2 = s2 / static_cast<Scalar>(n);
    out.m3 = s3 / static_cast<Scalar>(n);
    out.m4 = s4 / static_cast<Scalar>(n);
    return out;
}

/// k = 1 gives the sample mean; k = 2..4 the biased central moment.
template <typename Derived>
typename Derived::Scalar sample_central_moment(const Eigen::DenseBase<Derived>& xs, int k)
{
    if (k < 1 || k > 4)
        throw UnsupportedError(fmt::format("sample_central_moment: order {} not in 1..4", k));
    return sample_moments(xs)[k];
}

/// Smallest sample size for which E[m_k] (and the unbiased u_k) is defined.
constexpr int min_sample_size(int k) noexcept { return k <= 1 ? 1 : k; }

/// Exact finite-sample expectation of m_k for i.i.d. samples of size n
/// drawn from a population with moments mv.
inline double expected_sample_central_moment(const MomentVector& mv, int n, int k)
{
    if (k < 1 || k > 4)
        throw UnsupportedError(fmt::format("expected_sample_central_moment: order {} not in 1..4", k));
    if (n < min_sample_size(k))
        throw DomainError(fmt::format("expected_sample_central_moment: n = {} too small for k = {}", n, k));
    const double nn = n;
    switch (k) {
    case 1: return mv.mean;
    case 2: return (nn - 1.0) / nn * mv.mu2;
    case 3: return (nn - 1.0) * (nn - 2.0) / (nn * nn) * mv.mu3;
    default:
        return (nn - 1.0) / (nn * nn * nn)
               * ((nn * nn - 3.0 * nn + 3.0) * mv.mu4 + 3.0 * (2.0 * nn - 3.0) * mv.mu2 * mv.mu2);
    }
}

/// Unbiased estimator of mu_k (k = 2..4): Bessel for k = 2, the scaled m3
/// for k = 3 and the fourth h-statistic for k = 4.
template <typename Derived>
typename Derived::Scalar u_central_moment(const Eigen::DenseBase<Derived>& xs, int k)
{
    using Scalar = typename Derived::Scalar;
    if (k < 2 || k > 4)
        throw UnsupportedError(fmt::format("u_central_moment: order {} not in 2..4", k));
    const Eigen::Index size = xs.size();
    if (size < min_sample_size(k))
        throw DomainError(fmt::format("u_central_moment: n = {} too small for k = {}", size, k));
    const auto m = sample_moments(xs);
    const Scalar n = static_cast<Scalar>(size);
    switch (k) {
    case 2: return n / (n - 1) * m.m2;
    case 3: return n * n / ((n - 1) * (n - 2)) * m.m3;
    default:
        return n * ((n * n - 2 * n + 3) * m.m4 - 3 * (2 * n - 3) * m.m2 * m.m2) / ((n - 1) * (n - 2) * (n - 3));
    }
}

} // namespace seqcal
