#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "seqcal/dist.hpp"
#include "seqcal/seqlab.hpp"

namespace seqcal {

inline constexpr double kDefaultThreshold = 1e-10;
inline constexpr int kDefaultMaxMoment = 4;
inline constexpr long kDefaultMaxAttemptsPerSet = 100000;

using IndexPair = std::pair<int, int>;

struct CalibrationProblem {
    DistributionSpec dist;
    int n = 0;
    int k_max = kDefaultMaxMoment;
    std::vector<SequenceRecipe> recipes;
    /// Columns constrained to carry equal weight.
    std::vector<IndexPair> pairs;
};

/// Moment-matching system: rows 0..k_max-1 hold m_1..m_{k_max} of each
/// quantile-transformed sequence, the last row is all ones.
struct MomentSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
};

struct WeightSolution {
    Eigen::VectorXd weights;
    double residual = 0.0;
    bool feasible = false;
};

MomentSystem build_system(const DistributionSpec& dist, int n, int k_max, std::span<const UnitSequence> sequences);
MomentSystem build_system(const CalibrationProblem& problem);

/// Minimises ||A w - b|| over w >= 0, sum(w) = 1 and w_i = w_j for each pair.
/// Never throws on infeasibility; `feasible` reports residual < threshold.
/// The minimiser is rarely unique. Without a prior the active-set solution
/// is returned; with one (size N) the result is the minimiser closest to it.
WeightSolution solve_weights(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, std::span<const IndexPair> pairs,
                             double threshold = kDefaultThreshold, const Eigen::VectorXd& prior = {});

/// A qualified set of sequences together with its calibrated weights.
/// Which exact solution to keep when the weights are not unique.
enum class TieBreak {
    ActiveSet, ///< whatever the active-set solver lands on (sparse)
    Baseline,  ///< closest to unit mass on the arithmetic and symmetric beta columns
    Uniform,   ///< closest to equal weights
};

struct CalibratedSet {
    DistributionSpec dist = DistributionSpec::gaussian();
    int n = 0;
    int k_max = kDefaultMaxMoment;
    std::uint64_t seed = 0;
    std::string generator;
    double threshold = kDefaultThreshold;
    std::vector<SequenceRecipe> recipes;
    std::vector<IndexPair> pairs;
    Eigen::VectorXd weights;
    double residual = 0.0;
    /// Rule that picked these weights; resolve() uses it again.
    TieBreak tie_break = TieBreak::Baseline;
    /// Replicate index when a file holds several independent pools.
    int repeat = 0;
    /// Free-form creation stamp; left empty unless the caller sets one so
    /// that files stay byte-stable.
    std::string created;
};

struct SetPool {
    std::string label;
    std::vector<CalibratedSet> sets;
    /// Search bookkeeping (BAR searches): candidates tried and qualified.
    long attempts = 0;
    long qualified = 0;

    double acceptance_rate() const { return attempts > 0 ? static_cast<double>(qualified) / attempts : 0.0; }
    /// Sets calibrated at sample size n.
    std::vector<const CalibratedSet*> sets_at(int n) const;
    std::vector<int> sample_sizes() const;
};

/// Concatenates pools under a new label.
SetPool combine(std::span<const SetPool> pools, std::string label);

/// Thrown when a search runs out of attempts; carries the sets found so far.
class SearchExhausted : public std::runtime_error {
public:
    SearchExhausted(const std::string& what, SetPool partial)
        : std::runtime_error(what), partial_(std::move(partial))
    {
    }
    const SetPool& partial() const noexcept { return partial_; }

private:
    SetPool partial_;
};

/// Re-solves a stored set from its recipes.
WeightSolution resolve(const CalibratedSet& set);

CalibratedSet calibrate_designed(const DistributionSpec& dist, int n, std::uint64_t seed,
                                 double threshold = kDefaultThreshold);

struct BarSearchOptions {
    double threshold = kDefaultThreshold;
    TieBreak tie_break = TieBreak::Uniform;
    long max_attempts_per_set = kDefaultMaxAttemptsPerSet;
    int k_max = kDefaultMaxMoment;
};

/// Recipes of candidate number `attempt` in a BAR search: arithmetic,
/// Beta(0.547,0.547) and ten pseudo-random sequences on streams
/// 10*attempt .. 10*attempt+9 of `stream_seed`.
std::vector<SequenceRecipe> bar_candidate(int n, std::uint64_t stream_seed, long attempt);

/// Stochastic search for nSets qualified BAR sets at sample size n.
/// Candidates are tried in attempt order, so the pool depends only on the
/// arguments. Throws SearchExhausted when the attempt budget runs out.
SetPool bar_search(const DistributionSpec& dist, int n, int n_sets, std::uint64_t seed,
                   const BarSearchOptions& options = {});

/// BAR search per distribution, pooled. Each spec uses a seed derived from
/// (seed, spec index).
SetPool multi_dist_pool(std::span<const DistributionSpec> specs, int sets_per_spec, int n, std::uint64_t seed,
                        const BarSearchOptions& options = {});

/// The ten non-Gaussian parameterisations pooled into BAR-5D.
std::vector<DistributionSpec> five_family_specs();

} // namespace seqcal
