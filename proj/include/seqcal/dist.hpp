#pragma once

#include <array>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Core>

namespace seqcal {

enum class Family {
    Gaussian,
    Exponential,
    Weibull,
    Gamma,
    Lognormal,
    Pareto,
    GeneralizedGaussian,
    Beta,
    Uniform,
};

/// A parametric family together with its parameters.
///
/// Parameters are stored positionally; the role of each slot depends on the
/// family (see `parameter_names`). Construction validates the parameters, so
/// a DistributionSpec that exists is always usable.
///
/// Textual form is `family(name=value,...)`, e.g. `pareto(alpha=7,xm=1)`.
class DistributionSpec {
public:
    static DistributionSpec gaussian(double mu = 0.0, double sigma = 1.0);
    static DistributionSpec exponential(double lambda = 1.0);
    static DistributionSpec weibull(double k, double scale = 1.0);
    static DistributionSpec gamma(double k, double theta = 1.0);
    static DistributionSpec lognormal(double sigma, double mu = 0.0);
    static DistributionSpec pareto(double alpha, double xm = 1.0);
    /// Density proportional to exp(-|(x - mu)/scale|^beta).
    static DistributionSpec generalized_gaussian(double beta, double mu = 0.0, double scale = 1.0);
    static DistributionSpec beta(double alpha, double beta);
    static DistributionSpec uniform(double a = 0.0, double b = 1.0);

    /// Generic constructor; params are in the order given by parameter_names(family).
    DistributionSpec(Family family, std::array<double, 3> params);

    /// Parses `family(name=value,...)`. Omitted parameters take their defaults;
    /// a bare family name is accepted.
    static DistributionSpec parse(std::string_view token);

    /// Canonical token; parse(token()) reproduces the spec exactly.
    std::string token() const;

    Family family() const noexcept { return family_; }
    double param(std::size_t i) const { return params_.at(i); }
    double param(std::string_view name) const;
    const std::array<double, 3>& params() const noexcept { return params_; }

    /// True when the distribution is symmetric about its mean.
    bool symmetric() const noexcept;

    /// Closure of the support, possibly with infinite endpoints.
    std::pair<double, double> support() const noexcept;

    friend bool operator==(const DistributionSpec&, const DistributionSpec&) = default;

private:
    Family family_;
    std::array<double, 3> params_;
};

std::string_view family_name(Family family);
/// Parameter names for a family, in positional order (empty views past the arity).
std::array<std::string_view, 3> parameter_names(Family family);
std::size_t parameter_count(Family family);

/// Population mean and central moments of order 2..4.
struct MomentVector {
    double mean = 0.0;
    double mu2 = 0.0;
    double mu3 = 0.0;
    double mu4 = 0.0;

    /// Central moment of order k in 1..4; order 1 yields the mean.
    double operator[](int k) const;
};

double quantile(const DistributionSpec& spec, double u);
double cdf(const DistributionSpec& spec, double x);
/// Upper tail 1 - cdf, computed without cancellation.
double survival(const DistributionSpec& spec, double x);
double pdf(const DistributionSpec& spec, double x);

/// Element-wise quantile transform of points in (0,1).
template <typename Derived>
Eigen::ArrayXd quantile(const DistributionSpec& spec, const Eigen::DenseBase<Derived>& u)
{
    Eigen::ArrayXd out(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i)
        out[i] = quantile(spec, static_cast<double>(u.derived().coeff(i)));
    return out;
}

MomentVector central_moments(const DistributionSpec& spec);

/// E[s_n]/sigma for Gaussian samples, s_n the Bessel-corrected sample sd.
double gaussian_sd_expectation_factor(int n);

/// Var(s_n) for Gaussian samples with standard deviation sigma.
double gaussian_sd_variance(int n, double sigma);

/// E[median] of an odd-size sample, by adaptive Gauss-Kronrod quadrature of
/// the order-statistic density.
double expected_median_quadrature(const DistributionSpec& spec, int n);

/// E[median] of an odd-size exponential sample with rate lambda, closed form
/// in harmonic numbers and gamma functions.
double exponential_median_closed_form(int n, double lambda);

} // namespace seqcal
