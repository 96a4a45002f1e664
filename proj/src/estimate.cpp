#include "seqcal/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "seqcal/errors.hpp"
#include "seqcal/moments.hpp"
#include "seqcal/rng.hpp"

namespace seqcal {

EstimatorSpec::EstimatorSpec(Kind kind, int order, std::string name, int min_n, Function fn)
    : kind_(kind), order_(order), name_(std::move(name)), min_n_(min_n), fn_(std::move(fn))
{
}

EstimatorSpec EstimatorSpec::mean() { return {Kind::Mean, 1, "mean", 1}; }
EstimatorSpec EstimatorSpec::sample_sd() { return {Kind::SampleSD, 2, "sd", 2}; }
EstimatorSpec EstimatorSpec::median() { return {Kind::Median, 0, "median", 1}; }

EstimatorSpec EstimatorSpec::u_central_moment(int k)
{
    if (k < 2 || k > 4)
        throw UnsupportedError(fmt::format("u-central moment of order {} is not supported", k));
    return {Kind::UCentralMoment, k, fmt::format("u{}", k), min_sample_size(k)};
}

EstimatorSpec EstimatorSpec::plugin(std::string name, Function fn, int min_n)
{
    if (!fn)
        throw ParameterError("plugin estimator without a function");
    return {Kind::Plugin, 0, std::move(name), min_n, std::move(fn)};
}

EstimatorSpec EstimatorSpec::parse(std::string_view token)
{
    if (token == "mean")
        return mean();
    if (token == "sd")
        return sample_sd();
    if (token == "median")
        return median();
    if (token.size() == 2 && (token[0] == 'u' || token[0] == 'm') && token[1] >= '2' && token[1] <= '4') {
        const int k = token[1] - '0';
        if (token[0] == 'u')
            return u_central_moment(k);
        return plugin(std::string(token), [k](const Eigen::ArrayXd& x) { return sample_central_moment(x, k); });
    }
    throw ParseError(fmt::format("unknown estimator '{}'", token));
}

double EstimatorSpec::operator()(const Eigen::ArrayXd& x) const
{
    if (x.size() < min_n_)
        throw DomainError(fmt::format("estimator {} needs n >= {}, got {}", name_, min_n_, x.size()));
    switch (kind_) {
    case Kind::Mean: return x.mean();
    case Kind::SampleSD: return std::sqrt(seqcal::u_central_moment(x, 2));
    case Kind::UCentralMoment: return seqcal::u_central_moment(x, order_);
    case Kind::Median: {
        const Eigen::Index n = x.size();
        if (std::is_sorted(x.begin(), x.end()))
            return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
        std::vector<double> v(x.begin(), x.end());
        std::nth_element(v.begin(), v.begin() + n / 2, v.end());
        const double hi = v[n / 2];
        if (n % 2)
            return hi;
        return 0.5 * (*std::max_element(v.begin(), v.begin() + n / 2) + hi);
    }
    case Kind::Plugin: return fn_(x);
    }
    return 0.0;
}

WeightedSummary weighted_summary(const SetPool& pool, const DistributionSpec& dist, const EstimatorSpec& est, int n)
{
    if (n < est.min_n())
        throw DomainError(fmt::format("estimator {} is undefined for n = {}", est.token(), n));
    const auto sets = pool.sets_at(n);
    if (sets.empty())
        throw DimensionError(fmt::format("pool '{}' has no sets calibrated at n = {}", pool.label, n));
    WeightedSummary total;
    std::vector<double> values;
    for (const CalibratedSet* set : sets) {
        const auto seqs = generate(set->recipes);
        values.resize(seqs.size());
        double e = 0.0;
        for (std::size_t i = 0; i < seqs.size(); ++i) {
            values[i] = est(quantile(dist, seqs[i].values));
            e += set->weights[static_cast<Eigen::Index>(i)] * values[i];
        }
        double v = 0.0;
        for (std::size_t i = 0; i < seqs.size(); ++i)
            v += set->weights[static_cast<Eigen::Index>(i)] * (values[i] - e) * (values[i] - e);
        total.expectation += e;
        total.variance += v;
    }
    total.expectation /= static_cast<double>(sets.size());
    total.variance /= static_cast<double>(sets.size());
    return total;
}

double weighted_expectation(const SetPool& pool, const DistributionSpec& dist, const EstimatorSpec& est, int n)
{
    return weighted_summary(pool, dist, est, n).expectation;
}

double weighted_variance(const SetPool& pool, const DistributionSpec& dist, const EstimatorSpec& est, int n)
{
    return weighted_summary(pool, dist, est, n).variance;
}

McResult mc_baseline(const DistributionSpec& dist, const EstimatorSpec& est, int n, int n_samples, std::uint64_t seed)
{
    if (n_samples < 2)
        throw DomainError("mc_baseline: nSamples must be >= 2");
    if (n < est.min_n())
        throw DomainError(fmt::format("estimator {} is undefined for n = {}", est.token(), n));
    const std::uint64_t stream_seed = derive_seed(seed, {static_cast<std::uint64_t>(n)});
    std::vector<double> vals(static_cast<std::size_t>(n_samples));
    for (int r = 0; r < n_samples; ++r)
        vals[r] = est(quantile(dist, pseudo_random_seq(n, stream_seed, static_cast<std::uint64_t>(r)).values));
    McResult out;
    out.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / n_samples;
    double ss = 0.0;
    for (double v : vals)
        ss += (v - out.mean) * (v - out.mean);
    out.variance = ss / (n_samples - 1);
    return out;
}

BiasCurve bias_curve(const CurveMethod& method, std::span<const int> ns, const TruthOracle& truth)
{
    BiasCurve curve;
    int last = std::numeric_limits<int>::min();
    for (int n : ns) {
        if (n <= last)
            throw DomainError("bias_curve: sample sizes must be strictly increasing");
        last = n;
        const double t = truth(n);
        const double e = method(n);
        curve.rows.push_back({n, e, t, e - t});
    }
    return curve;
}

double rmse(const BiasCurve& curve)
{
    if (curve.rows.empty())
        return 0.0;
    double ss = 0.0;
    for (const auto& r : curve.rows)
        ss += r.error * r.error;
    return std::sqrt(ss / static_cast<double>(curve.rows.size()));
}

RMSEReport rmse_report(std::string label, int repeats, const std::function<BiasCurve(int repeat)>& curve_for_repeat)
{
    if (repeats < 1)
        throw DomainError("rmse_report: repeats must be >= 1");
    RMSEReport rep;
    rep.label = std::move(label);
    rep.repeats = repeats;
    for (int r = 0; r < repeats; ++r)
        rep.per_repeat.push_back(rmse(curve_for_repeat(r)));
    rep.rmse = std::accumulate(rep.per_repeat.begin(), rep.per_repeat.end(), 0.0) / repeats;
    return rep;
}

TruthOracle truth_oracle(const DistributionSpec& dist, const EstimatorSpec& est, Quantity quantity)
{
    const MomentVector mv = central_moments(dist);
    using K = EstimatorSpec::Kind;
    const bool bias = quantity == Quantity::Bias;
    switch (est.kind()) {
    case K::Mean:
        if (bias)
            return [m = mv.mean](int) { return m; };
        return [v = mv.mu2](int n) { return v / n; };
    case K::SampleSD:
        if (dist.family() == Family::Gaussian) {
            const double sigma = dist.param(1);
            if (bias)
                return [sigma](int n) { return sigma * gaussian_sd_expectation_factor(n); };
            return [sigma](int n) { return gaussian_sd_variance(n, sigma); };
        }
        break;
    case K::UCentralMoment:
        if (bias)
            return [m = mv[est.order()]](int) { return m; };
        break;
    case K::Median:
        if (bias) {
            auto odd_only = [](int n) {
                if (n % 2 == 0)
                    throw UnsupportedError(fmt::format("no exact median expectation for even n = {}", n));
            };
            if (dist.family() == Family::Exponential)
                return [odd_only, lambda = dist.param(0)](int n) {
                    odd_only(n);
                    return exponential_median_closed_form(n, lambda);
                };
            return [odd_only, dist](int n) {
                odd_only(n);
                return expected_median_quadrature(dist, n);
            };
        }
        break;
    case K::Plugin: break;
    }
    throw UnsupportedError(fmt::format("no exact {} reference for estimator {} under {}", bias ? "bias" : "variance",
                                       est.token(), dist.token()));
}

std::vector<int> n_range(int nmin, int nmax, bool odd_only)
{
    std::vector<int> ns;
    for (int n = nmin; n <= nmax; ++n)
        if (!odd_only || n % 2 == 1)
            ns.push_back(n);
    return ns;
}

SetPool arithmetic_pool(const DistributionSpec& dist, int n)
{
    const std::vector<SequenceRecipe> recipes{{recipe::Arithmetic{}, n}};
    const auto seqs = generate(recipes);
    const auto sys = build_system(dist, n, kDefaultMaxMoment, seqs);
    CalibratedSet set;
    set.dist = dist;
    set.n = n;
    set.generator = std::string(kGeneratorId);
    set.recipes = recipes;
    set.weights = Eigen::VectorXd::Ones(1);
    set.residual = (sys.A * set.weights - sys.b).norm();
    SetPool pool;
    pool.label = "Arithmetic";
    pool.sets.push_back(std::move(set));
    return pool;
}

SetPool designed_pool(const DistributionSpec& dist, int n, int n_sets, std::uint64_t seed)
{
    SetPool pool;
    pool.label = "Designed";
    for (int i = 0; i < n_sets; ++i)
        pool.sets.push_back(calibrate_designed(dist, n, derive_seed(seed, {0x64657369ULL, static_cast<std::uint64_t>(i)})));
    return pool;
}

CurveMethod pool_method(std::function<SetPool(int n)> pool_for_n, const DistributionSpec& dist,
                        const EstimatorSpec& est, Quantity quantity)
{
    return [pool_for_n = std::move(pool_for_n), dist, est, quantity](int n) {
        const auto s = weighted_summary(pool_for_n(n), dist, est, n);
        return quantity == Quantity::Bias ? s.expectation : s.variance;
    };
}

CurveMethod mc_method(const DistributionSpec& dist, const EstimatorSpec& est, Quantity quantity, int n_samples,
                      std::uint64_t seed)
{
    return [=](int n) {
        const auto r = mc_baseline(dist, est, n, n_samples, seed);
        return quantity == Quantity::Bias ? r.mean : r.variance;
    };
}

double standard_error(std::span<const double> column)
{
    if (column.size() < 2)
        throw DomainError("standard_error: at least two rows are required");
    const double n = static_cast<double>(column.size());
    const double m = std::accumulate(column.begin(), column.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : column)
        ss += (v - m) * (v - m);
    return std::sqrt(ss / (n - 1.0));
}

SSEReport scaled_standard_error(const Eigen::MatrixXd& samples, std::span<const std::string> names)
{
    if (samples.rows() < 2)
        throw DomainError("scaled_standard_error: at least two rows are required");
    if (samples.cols() < 1 || static_cast<Eigen::Index>(names.size()) != samples.cols())
        throw DimensionError("scaled_standard_error: one name per column is required");
    const double rows = static_cast<double>(samples.rows());
    auto column_mean = [&](Eigen::Index c) {
        const double m = samples.col(c).mean();
        const double mag = samples.col(c).cwiseAbs().maxCoeff();
        if (!(std::abs(m) > 1e-14 * mag))
            throw DomainError(fmt::format("scaled_standard_error: column '{}' has zero mean; use its standard error",
                                          names[static_cast<std::size_t>(c)]));
        return m;
    };
    const double ref = column_mean(0);
    SSEReport rep;
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
        SSEColumn col;
        col.stat = names[static_cast<std::size_t>(c)];
        col.mean = c == 0 ? ref : column_mean(c);
        col.scale = c == 0 ? 1.0 : ref / col.mean;
        const Eigen::VectorXd raw = samples.col(c);
        const Eigen::VectorXd scaled = raw * col.scale;
        col.se = standard_error(std::span<const double>(raw.data(), static_cast<std::size_t>(raw.size())));
        col.sse = c == 0 ? col.se
                         : standard_error(std::span<const double>(scaled.data(), static_cast<std::size_t>(scaled.size())));
        col.se_of_mean = col.se / std::sqrt(rows);
        col.sse_of_mean = col.sse / std::sqrt(rows);
        rep.columns.push_back(std::move(col));
    }
    return rep;
}

Eigen::MatrixXd replicate_statistics(const DistributionSpec& dist, std::span<const EstimatorSpec> stats, int n,
                                     int reps, std::uint64_t seed)
{
    if (reps < 2)
        throw DomainError("replicate_statistics: reps must be >= 2");
    for (const auto& s : stats)
        if (n < s.min_n())
            throw DomainError(fmt::format("estimator {} is undefined for n = {}", s.token(), n));
    const std::uint64_t stream_seed = derive_seed(seed, {static_cast<std::uint64_t>(n)});
    Eigen::MatrixXd M(reps, static_cast<Eigen::Index>(stats.size()));
    for (int r = 0; r < reps; ++r) {
        const Eigen::ArrayXd x = quantile(dist, pseudo_random_seq(n, stream_seed, static_cast<std::uint64_t>(r)).values);
        for (std::size_t c = 0; c < stats.size(); ++c)
            M(r, static_cast<Eigen::Index>(c)) = stats[c](x);
    }
    return M;
}

} // namespace seqcal
