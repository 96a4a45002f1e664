#include "seqcal/dist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/pareto.hpp>
#include <boost/math/distributions/uniform.hpp>
#include <boost/math/distributions/weibull.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

#include "seqcal/errors.hpp"

namespace seqcal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct FamilyInfo {
    Family family;
    std::string_view name;
    std::array<std::string_view, 3> params;
    // NaN marks a parameter without a default.
    std::array<double, 3> defaults;
    std::size_t arity;
};

constexpr double kNoDefault = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<FamilyInfo, 9> kFamilies{{
    {Family::Gaussian, "gaussian", {"mu", "sigma", ""}, {0.0, 1.0, 0.0}, 2},
    {Family::Exponential, "exponential", {"lambda", "", ""}, {1.0, 0.0, 0.0}, 1},
    {Family::Weibull, "weibull", {"k", "scale", ""}, {kNoDefault, 1.0, 0.0}, 2},
    {Family::Gamma, "gamma", {"k", "theta", ""}, {kNoDefault, 1.0, 0.0}, 2},
    {Family::Lognormal, "lognormal", {"mu", "sigma", ""}, {0.0, kNoDefault, 0.0}, 2},
    {Family::Pareto, "pareto", {"alpha", "xm", ""}, {kNoDefault, 1.0, 0.0}, 2},
    {Family::GeneralizedGaussian, "generalized_gaussian", {"beta", "mu", "scale"}, {kNoDefault, 0.0, 1.0}, 3},
    {Family::Beta, "beta", {"alpha", "beta", ""}, {kNoDefault, kNoDefault, 0.0}, 2},
    {Family::Uniform, "uniform", {"a", "b", ""}, {0.0, 1.0, 0.0}, 2},
}};

const FamilyInfo& info(Family family)
{
    for (const auto& fi : kFamilies)
        if (fi.family == family)
            return fi;
    throw ParameterError("unknown distribution family");
}

void require(bool ok, const char* what)
{
    if (!ok)
        throw ParameterError(what);
}

void validate(Family family, const std::array<double, 3>& p)
{
    for (std::size_t i = 0; i < info(family).arity; ++i)
        require(std::isfinite(p[i]), "distribution parameters must be finite");
    switch (family) {
    case Family::Gaussian: require(p[1] > 0, "gaussian: sigma must be > 0"); break;
    case Family::Exponential: require(p[0] > 0, "exponential: lambda must be > 0"); break;
    case Family::Weibull:
        require(p[0] > 0, "weibull: k must be > 0");
        require(p[1] > 0, "weibull: scale must be > 0");
        break;
    case Family::Gamma:
        require(p[0] > 0, "gamma: k must be > 0");
        require(p[1] > 0, "gamma: theta must be > 0");
        break;
    case Family::Lognormal: require(p[1] > 0, "lognormal: sigma must be > 0"); break;
    case Family::Pareto:
        require(p[0] > 4, "pareto: alpha must be > 4 so that the fourth moment exists");
        require(p[1] > 0, "pareto: xm must be > 0");
        break;
    case Family::GeneralizedGaussian:
        require(p[0] > 0, "generalized_gaussian: beta must be > 0");
        require(p[2] > 0, "generalized_gaussian: scale must be > 0");
        break;
    case Family::Beta: require(p[0] > 0 && p[1] > 0, "beta: shapes must be > 0"); break;
    case Family::Uniform: require(p[0] < p[1], "uniform: a must be < b"); break;
    }
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(fmt::format("not a number: '{}'", s));
    return v;
}

// Generalized Gaussian with unit scale, centred at zero.
double gg_cdf(double beta, double z)
{
    const double a = 1.0 / beta;
    const double t = std::pow(std::abs(z), beta);
    const double tail = 0.5 * boost::math::gamma_q(a, t);
    return z < 0 ? tail : 1.0 - tail;
}

double gg_survival(double beta, double z) { return gg_cdf(beta, -z); }

double gg_quantile(double beta, double u)
{
    if (u == 0.5)
        return 0.0;
    const double a = 1.0 / beta;
    const double tail = u < 0.5 ? 2.0 * u : 2.0 * (1.0 - u);
    const double z = std::pow(boost::math::gamma_q_inv(a, tail), 1.0 / beta);
    return u < 0.5 ? -z : z;
}

double gg_pdf(double beta, double z)
{
    return beta / (2.0 * std::tgamma(1.0 / beta)) * std::exp(-std::pow(std::abs(z), beta));
}

template <typename Fn>
decltype(auto) with_boost_dist(const DistributionSpec& s, Fn&& fn)
{
    namespace bm = boost::math;
    const auto& p = s.params();
    switch (s.family()) {
    case Family::Gaussian: return fn(bm::normal_distribution<double>(p[0], p[1]));
    case Family::Exponential: return fn(bm::exponential_distribution<double>(p[0]));
    case Family::Weibull: return fn(bm::weibull_distribution<double>(p[0], p[1]));
    case Family::Gamma: return fn(bm::gamma_distribution<double>(p[0], p[1]));
    case Family::Lognormal: return fn(bm::lognormal_distribution<double>(p[0], p[1]));
    case Family::Pareto: return fn(bm::pareto_distribution<double>(p[1], p[0]));
    case Family::Beta: return fn(bm::beta_distribution<double>(p[0], p[1]));
    case Family::Uniform: return fn(bm::uniform_distribution<double>(p[0], p[1]));
    case Family::GeneralizedGaussian: break;
    }
    throw UnsupportedError("no boost backend for this family");
}

} // namespace

DistributionSpec::DistributionSpec(Family family, std::array<double, 3> params)
    : family_(family), params_(params)
{
    const auto& fi = info(family);
    for (std::size_t i = fi.arity; i < 3; ++i)
        params_[i] = 0.0;
    validate(family_, params_);
}

DistributionSpec DistributionSpec::gaussian(double mu, double sigma) { return {Family::Gaussian, {mu, sigma, 0}}; }
DistributionSpec DistributionSpec::exponential(double lambda) { return {Family::Exponential, {lambda, 0, 0}}; }
DistributionSpec DistributionSpec::weibull(double k, double scale) { return {Family::Weibull, {k, scale, 0}}; }
DistributionSpec DistributionSpec::gamma(double k, double theta) { return {Family::Gamma, {k, theta, 0}}; }
DistributionSpec DistributionSpec::lognormal(double sigma, double mu) { return {Family::Lognormal, {mu, sigma, 0}}; }
DistributionSpec DistributionSpec::pareto(double alpha, double xm) { return {Family::Pareto, {alpha, xm, 0}}; }
DistributionSpec DistributionSpec::generalized_gaussian(double beta, double mu, double scale)
{
    return {Family::GeneralizedGaussian, {beta, mu, scale}};
}
DistributionSpec DistributionSpec::beta(double alpha, double beta) { return {Family::Beta, {alpha, beta, 0}}; }
DistributionSpec DistributionSpec::uniform(double a, double b) { return {Family::Uniform, {a, b, 0}}; }

std::string_view family_name(Family family) { return info(family).name; }
std::array<std::string_view, 3> parameter_names(Family family) { return info(family).params; }
std::size_t parameter_count(Family family) { return info(family).arity; }

DistributionSpec DistributionSpec::parse(std::string_view token)
{
    token = trim(token);
    const auto open = token.find('(');
    std::string_view name = trim(token.substr(0, open));
    std::string_view body;
    if (open != std::string_view::npos) {
        if (token.back() != ')')
            throw ParseError(fmt::format("distribution token '{}' lacks a closing ')'", token));
        body = token.substr(open + 1, token.size() - open - 2);
    }
    if (name == "normal")
        name = "gaussian";
    const FamilyInfo* fi = nullptr;
    for (const auto& f : kFamilies)
        if (f.name == name)
            fi = &f;
    if (!fi)
        throw ParseError(fmt::format("unknown distribution family '{}'", name));

    std::array<double, 3> values = fi->defaults;
    std::array<bool, 3> seen{};
    while (!trim(body).empty()) {
        const auto comma = body.find(',');
        const std::string_view item = trim(body.substr(0, comma));
        body = comma == std::string_view::npos ? std::string_view{} : body.substr(comma + 1);
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(fmt::format("expected name=value, got '{}'", item));
        const std::string_view key = trim(item.substr(0, eq));
        std::size_t slot = fi->arity;
        for (std::size_t i = 0; i < fi->arity; ++i)
            if (fi->params[i] == key)
                slot = i;
        if (slot == fi->arity)
            throw ParseError(fmt::format("{} has no parameter '{}'", fi->name, key));
        if (seen[slot])
            throw ParseError(fmt::format("parameter '{}' given twice", key));
        seen[slot] = true;
        values[slot] = parse_number(item.substr(eq + 1));
    }
    for (std::size_t i = 0; i < fi->arity; ++i)
        if (std::isnan(values[i]))
            throw ParseError(fmt::format("{} requires parameter '{}'", fi->name, fi->params[i]));
    return {fi->family, values};
}

std::string DistributionSpec::token() const
{
    const auto& fi = info(family_);
    std::string out{fi.name};
    out += '(';
    for (std::size_t i = 0; i < fi.arity; ++i) {
        if (i)
            out += ',';
        out += fmt::format("{}={}", fi.params[i], params_[i] == 0.0 ? 0.0 : params_[i]);
    }
    out += ')';
    return out;
}

double DistributionSpec::param(std::string_view name) const
{
    const auto& fi = info(family_);
    for (std::size_t i = 0; i < fi.arity; ++i)
        if (fi.params[i] == name)
            return params_[i];
    throw ParameterError(fmt::format("{} has no parameter '{}'", fi.name, name));
}

bool DistributionSpec::symmetric() const noexcept
{
    switch (family_) {
    case Family::Gaussian:
    case Family::GeneralizedGaussian:
    case Family::Uniform: return true;
    case Family::Beta: return params_[0] == params_[1];
    default: return false;
    }
}

std::pair<double, double> DistributionSpec::support() const noexcept
{
    switch (family_) {
    case Family::Exponential:
    case Family::Weibull:
    case Family::Gamma:
    case Family::Lognormal: return {0.0, kInf};
    case Family::Pareto: return {params_[1], kInf};
    case Family::Beta: return {0.0, 1.0};
    case Family::Uniform: return {params_[0], params_[1]};
    default: return {-kInf, kInf};
    }
}

double MomentVector::operator[](int k) const
{
    switch (k) {
    case 1: return mean;
    case 2: return mu2;
    case 3: return mu3;
    case 4: return mu4;
    default: throw UnsupportedError("moment order must be in 1..4");
    }
}

double quantile(const DistributionSpec& spec, double u)
{
    if (!(u > 0.0 && u < 1.0))
        throw DomainError(fmt::format("quantile: u = {} is outside (0,1)", u));
    if (spec.family() == Family::GeneralizedGaussian)
        return spec.param(1) + spec.param(2) * gg_quantile(spec.param(0), u);
    if (spec.family() == Family::Uniform)
        return spec.param(0) + (spec.param(1) - spec.param(0)) * u;
    return with_boost_dist(spec, [u](const auto& d) { return boost::math::quantile(d, u); });
}

double cdf(const DistributionSpec& spec, double x)
{
    const auto [lo, hi] = spec.support();
    if (std::isnan(x))
        throw DomainError("cdf: x is NaN");
    if (x <= lo)
        return 0.0;
    if (x >= hi)
        return 1.0;
    if (spec.family() == Family::GeneralizedGaussian)
        return gg_cdf(spec.param(0), (x - spec.param(1)) / spec.param(2));
    return with_boost_dist(spec, [x](const auto& d) { return boost::math::cdf(d, x); });
}

double survival(const DistributionSpec& spec, double x)
{
    const auto [lo, hi] = spec.support();
    if (std::isnan(x))
        throw DomainError("survival: x is NaN");
    if (x <= lo)
        return 1.0;
    if (x >= hi)
        return 0.0;
    if (spec.family() == Family::GeneralizedGaussian)
        return gg_survival(spec.param(0), (x - spec.param(1)) / spec.param(2));
    return with_boost_dist(spec, [x](const auto& d) { return boost::math::cdf(boost::math::complement(d, x)); });
}

double pdf(const DistributionSpec& spec, double x)
{
    const auto [lo, hi] = spec.support();
    if (std::isnan(x))
        throw DomainError("pdf: x is NaN");
    if (x < lo || x > hi || std::isinf(x))
        return 0.0;
    if (spec.family() == Family::GeneralizedGaussian)
        return gg_pdf(spec.param(0), (x - spec.param(1)) / spec.param(2)) / spec.param(2);
    if ((x == lo || x == hi) && spec.family() == Family::Beta) {
        // density at an endpoint is 0, finite or infinite depending on the shape
        const double shape = x == lo ? spec.param(0) : spec.param(1);
        if (shape > 1.0)
            return 0.0;
        if (shape < 1.0)
            return kInf;
    }
    if (spec.family() == Family::Weibull && x > 0.0) {
        // log space: boost forms z^(k-1) * exp(-z^k), which is inf * 0 far out
        const double k = spec.param(0), scale = spec.param(1);
        const double z = x / scale;
        return k / scale * std::exp((k - 1.0) * std::log(z) - std::pow(z, k));
    }
    return with_boost_dist(spec, [x](const auto& d) { return boost::math::pdf(d, x); });
}

MomentVector central_moments(const DistributionSpec& spec)
{
    const auto& p = spec.params();
    MomentVector mv;
    switch (spec.family()) {
    case Family::Gaussian:
        mv = {p[0], p[1] * p[1], 0.0, 3.0 * std::pow(p[1], 4)};
        break;
    case Family::Exponential: {
        const double s = 1.0 / p[0];
        mv = {s, s * s, 2.0 * s * s * s, 9.0 * std::pow(s, 4)};
        break;
    }
    case Family::Uniform: {
        const double w = p[1] - p[0];
        mv = {0.5 * (p[0] + p[1]), w * w / 12.0, 0.0, std::pow(w, 4) / 80.0};
        break;
    }
    case Family::GeneralizedGaussian: {
        const double b = p[0];
        const double s2 = p[2] * p[2];
        const double g1 = std::lgamma(1.0 / b);
        mv = {p[1], s2 * std::exp(std::lgamma(3.0 / b) - g1), 0.0, s2 * s2 * std::exp(std::lgamma(5.0 / b) - g1)};
        break;
    }
    default:
        mv = with_boost_dist(spec, [](const auto& d) {
            const double var = boost::math::variance(d);
            return MomentVector{boost::math::mean(d), var, boost::math::skewness(d) * std::pow(var, 1.5),
                                boost::math::kurtosis(d) * var * var};
        });
        break;
    }
    if (spec.symmetric())
        mv.mu3 = 0.0;
    return mv;
}

double gaussian_sd_expectation_factor(int n)
{
    if (n < 2)
        throw DomainError("gaussian_sd_expectation_factor: n must be >= 2");
    const double a = 0.5 * (n - 1);
    // Gamma(n/2) / Gamma((n-1)/2) = 1 / tgamma_delta_ratio((n-1)/2, 1/2)
    return std::sqrt(1.0 / a) / boost::math::tgamma_delta_ratio(a, 0.5);
}

double gaussian_sd_variance(int n, double sigma)
{
    if (n < 2)
        throw DomainError("gaussian_sd_variance: n must be >= 2");
    if (!(sigma > 0.0))
        throw DomainError("gaussian_sd_variance: sigma must be > 0");
    const double c = gaussian_sd_expectation_factor(n);
    // 1 - c^2 loses digits for large n; (1-c)(1+c) keeps them
    return sigma * sigma * (1.0 - c) * (1.0 + c);
}

double expected_median_quadrature(const DistributionSpec& spec, int n)
{
    if (n < 1 || n % 2 == 0)
        throw DomainError("expected_median_quadrature: n must be odd and >= 1");
    const int m = (n - 1) / 2;
    // log of ((n+1)/2) * C(n, m) = n! / (m! m!)
    const double log_coef = std::lgamma(n + 1.0) - 2.0 * std::lgamma(m + 1.0);

    auto integrand = [&](double x) {
        const double f = pdf(spec, x);
        if (f == 0.0 || !std::isfinite(x))
            return 0.0;
        if (m == 0)
            return x * f;
        const double F = cdf(spec, x);
        const double S = survival(spec, x);
        if (F <= 0.0 || S <= 0.0)
            return 0.0;
        return x * std::exp(log_coef + m * (std::log(F) + std::log(S)) + std::log(f));
    };

    using Quad = boost::math::quadrature::gauss_kronrod<double, 61>;
    const auto [lo, hi] = spec.support();
    const double mid = quantile(spec, 0.5);
    // bounded supports can carry integrable pdf singularities at the ends
    // (U-shaped beta); Gauss-Kronrod stalls there, tanh-sinh does not
    if (std::isfinite(lo) && std::isfinite(hi)) {
        boost::math::quadrature::tanh_sinh<double> ts;
        return ts.integrate(integrand, lo, mid, 1e-13) + ts.integrate(integrand, mid, hi, 1e-13);
    }
    constexpr unsigned depth = 20;
    constexpr double tol = 1e-13;
    return Quad::integrate(integrand, lo, mid, depth, tol) + Quad::integrate(integrand, mid, hi, depth, tol);
}

double exponential_median_closed_form(int n, double lambda)
{
    if (n < 1 || n % 2 == 0)
        throw DomainError("exponential_median_closed_form: n must be odd and >= 1");
    if (!(lambda > 0.0))
        throw DomainError("exponential_median_closed_form: lambda must be > 0");
    const int m = (n - 1) / 2;
    double harmonic_gap = 0.0; // H_n - H_m
    for (int j = n; j > m; --j)
        harmonic_gap += 1.0 / j;
    const double log_prefactor = -(n + 1) * std::numbers::ln2 + std::log(n + 1.0) + std::lgamma(n + 1.0)
                                 - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0) + std::lgamma(0.5 * (n + 1))
                                 + 0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0);
    return std::exp(log_prefactor) * harmonic_gap / lambda;
}

} // namespace seqcal
