#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "seqcal/calib.hpp"
#include "seqcal/dist.hpp"

namespace seqcal {

/// A statistic of a sample. Plugins must be deterministic and invariant to
/// the order of the sample.
class EstimatorSpec {
public:
    enum class Kind { Mean, SampleSD, Median, UCentralMoment, Plugin };
    using Function = std::function<double(const Eigen::ArrayXd&)>;

    static EstimatorSpec mean();
    /// Square root of the Bessel-corrected variance.
    static EstimatorSpec sample_sd();
    static EstimatorSpec median();
    static EstimatorSpec u_central_moment(int k);
    static EstimatorSpec plugin(std::string name, Function fn, int min_n = 1);

    /// mean | sd | median | u2 | u3 | u4 | m2 | m3 | m4 (the m's are the
    /// biased central moments, registered as plugins).
    static EstimatorSpec parse(std::string_view token);

    Kind kind() const noexcept { return kind_; }
    int order() const noexcept { return order_; }
    const std::string& token() const noexcept { return name_; }
    int min_n() const noexcept { return min_n_; }

    double operator()(const Eigen::ArrayXd& sample) const;

private:
    EstimatorSpec(Kind kind, int order, std::string name, int min_n, Function fn = {});

    Kind kind_;
    int order_;
    std::string name_;
    int min_n_;
    Function fn_;
};

enum class Quantity { Bias, Variance };

struct WeightedSummary {
    double expectation = 0.0;
    double variance = 0.0;
};

/// Per-set weighted mean and weighted variance of the estimator over the
/// quantile-transformed sequences, each averaged across the pool's sets at n.
WeightedSummary weighted_summary(const SetPool& pool, const DistributionSpec& dist, const EstimatorSpec& est, int n);
double weighted_expectation(const SetPool& pool, const DistributionSpec& dist, const EstimatorSpec& est, int n);
double weighted_variance(const SetPool& pool, const DistributionSpec& dist, const EstimatorSpec& est, int n);

struct McResult {
    double mean = 0.0;
    /// Unbiased sample variance of the estimator across samples.
    double variance = 0.0;
};

/// Plain Monte Carlo over nSamples samples of size n; sample r uses the
/// pseudo-random stream (derive_seed(seed, {n}), r).
McResult mc_baseline(const DistributionSpec& dist, const EstimatorSpec& est, int n, int n_samples, std::uint64_t seed);

struct BiasRow {
    int n;
    double estimate;
    double truth;
    double error;
};

struct BiasCurve {
    std::vector<BiasRow> rows;
};

using CurveMethod = std::function<double(int n)>;
using TruthOracle = std::function<double(int n)>;

BiasCurve bias_curve(const CurveMethod& method, std::span<const int> ns, const TruthOracle& truth);

/// sqrt(mean squared error) over the rows of a curve.
double rmse(const BiasCurve& curve);

struct RMSEReport {
    std::string label;
    double rmse = 0.0; ///< mean of per_repeat
    int repeats = 0;
    std::vector<double> per_repeat;
};

/// Runs `curve_for_repeat(r)` for r = 0..repeats-1 and averages the RMSEs.
RMSEReport rmse_report(std::string label, int repeats, const std::function<BiasCurve(int repeat)>& curve_for_repeat);

/// Exact reference for E[est] (Bias) or Var(est) (Variance) as a function of
/// n. Throws UnsupportedError when no exact value is available; the returned
/// oracle throws UnsupportedError for unsupported n (even-n medians).
TruthOracle truth_oracle(const DistributionSpec& dist, const EstimatorSpec& est, Quantity quantity);

/// nmin..nmax inclusive, optionally odd values only.
std::vector<int> n_range(int nmin, int nmax, bool odd_only = false);

/// Pools used as comparison baselines.
SetPool arithmetic_pool(const DistributionSpec& dist, int n);
SetPool designed_pool(const DistributionSpec& dist, int n, int n_sets, std::uint64_t seed);

/// Curve method evaluating a pool produced per n.
CurveMethod pool_method(std::function<SetPool(int n)> pool_for_n, const DistributionSpec& dist,
                        const EstimatorSpec& est, Quantity quantity);
CurveMethod mc_method(const DistributionSpec& dist, const EstimatorSpec& est, Quantity quantity, int n_samples,
                      std::uint64_t seed);

/// Unbiased standard deviation of a column (at least two entries).
double standard_error(std::span<const double> column);

struct SSEColumn {
    std::string stat;
    double mean = 0.0;
    /// Multiplier applied to the column: mean(reference) / mean(column).
    double scale = 1.0;
    double se = 0.0;  ///< unbiased sd of the raw column
    double sse = 0.0; ///< unbiased sd of the rescaled column
    double se_of_mean = 0.0;
    double sse_of_mean = 0.0;
};

struct SSEReport {
    std::vector<SSEColumn> columns;
};

/// Scaled standard errors of a samples-by-statistics matrix; column 0 is the
/// reference statistic. Throws DomainError when a column mean is zero (use
/// plain standard errors there).
SSEReport scaled_standard_error(const Eigen::MatrixXd& samples, std::span<const std::string> names);

/// Monte Carlo samples-by-statistics matrix for sample size n.
Eigen::MatrixXd replicate_statistics(const DistributionSpec& dist, std::span<const EstimatorSpec> stats, int n,
                                     int reps, std::uint64_t seed);

} // namespace seqcal
