#include "seqcal/calib.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <variant>

#include <fmt/format.h>

#include "seqcal/errors.hpp"
#include "seqcal/moments.hpp"
#include "seqcal/rng.hpp"
#include "seqcal/simplex_lsq.hpp"

namespace seqcal {

namespace {

Eigen::VectorXd target_moments(const DistributionSpec& dist, int n, int k_max)
{
    const MomentVector mv = central_moments(dist);
    Eigen::VectorXd b(k_max + 1);
    for (int k = 1; k <= k_max; ++k)
        b[k - 1] = expected_sample_central_moment(mv, n, k);
    b[k_max] = 1.0;
    return b;
}

Eigen::VectorXd moment_column(const DistributionSpec& dist, const Eigen::ArrayXd& unit_values, int k_max)
{
    const Eigen::ArrayXd x = quantile(dist, unit_values);
    const auto m = sample_moments(x);
    Eigen::VectorXd col(k_max + 1);
    for (int k = 1; k <= k_max; ++k)
        col[k - 1] = m[k];
    col[k_max] = 1.0;
    return col;
}

void check_k_max(int k_max)
{
    if (k_max < 1 || k_max > 4)
        throw UnsupportedError(fmt::format("k_max = {} not in 1..4", k_max));
}

CalibratedSet make_set(const DistributionSpec& dist, int n, int k_max, std::uint64_t seed, double threshold,
                       std::vector<SequenceRecipe> recipes, std::vector<IndexPair> pairs, const WeightSolution& sol)
{
    CalibratedSet set;
    set.dist = dist;
    set.n = n;
    set.k_max = k_max;
    set.seed = seed;
    set.generator = std::string(kGeneratorId);
    set.threshold = threshold;
    set.recipes = std::move(recipes);
    set.pairs = std::move(pairs);
    set.weights = sol.weights;
    set.residual = sol.residual;
    return set;
}

// Ties between exact solutions go to the deterministic baseline columns
// (arithmetic grid and symmetric beta quantiles): phase two pulls towards a
// point with unit mass on each of them.
Eigen::VectorXd baseline_prior(std::span<const SequenceRecipe> recipes)
{
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(recipes.size()));
    for (std::size_t j = 0; j < recipes.size(); ++j) {
        const auto& k = recipes[j].kind;
        if (std::holds_alternative<recipe::Arithmetic>(k))
            p[static_cast<Eigen::Index>(j)] = 1.0;
        else if (const auto* b = std::get_if<recipe::BetaQuantile>(&k); b && b->alpha == b->beta)
            p[static_cast<Eigen::Index>(j)] = 1.0;
    }
    return p;
}

Eigen::VectorXd tie_break_prior(TieBreak rule, std::span<const SequenceRecipe> recipes)
{
    switch (rule) {
    case TieBreak::Baseline:
        return baseline_prior(recipes);
    case TieBreak::Uniform: {
        const auto m = static_cast<Eigen::Index>(recipes.size());
        return Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
    }
    case TieBreak::ActiveSet:
        break;
    }
    return {};
}

} // namespace

MomentSystem build_system(const DistributionSpec& dist, int n, int k_max, std::span<const UnitSequence> sequences)
{
    check_k_max(k_max);
    if (sequences.empty())
        throw DimensionError("build_system: no sequences");
    MomentSystem sys;
    sys.b = target_moments(dist, n, k_max);
    sys.A.resize(k_max + 1, static_cast<Eigen::Index>(sequences.size()));
    for (std::size_t j = 0; j < sequences.size(); ++j) {
        if (sequences[j].values.size() != n)
            throw DimensionError(
                fmt::format("build_system: sequence {} has {} values, expected n = {}", j, sequences[j].values.size(), n));
        sys.A.col(static_cast<Eigen::Index>(j)) = moment_column(dist, sequences[j].values, k_max);
    }
    return sys;
}

MomentSystem build_system(const CalibrationProblem& problem)
{
    check_k_max(problem.k_max);
    if (static_cast<int>(problem.recipes.size()) < problem.k_max + 1)
        throw DimensionError(fmt::format("build_system: {} recipes, at least k_max + 1 = {} required",
                                         problem.recipes.size(), problem.k_max + 1));
    for (const auto& r : problem.recipes)
        if (r.n != problem.n)
            throw DimensionError("build_system: recipe sample size differs from problem n");
    const auto seqs = generate(problem.recipes);
    return build_system(problem.dist, problem.n, problem.k_max, seqs);
}

WeightSolution solve_weights(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, std::span<const IndexPair> pairs,
                             double threshold, const Eigen::VectorXd& prior)
{
    if (A.rows() != b.size())
        throw DimensionError(fmt::format("solve_weights: A has {} rows but b has {} entries", A.rows(), b.size()));
    const int N = static_cast<int>(A.cols());
    if (N == 0)
        throw DimensionError("solve_weights: no columns");

    // group columns: each pair becomes one variable holding the pair's total weight
    std::vector<int> group(N, -1);
    std::vector<std::vector<int>> members;
    for (const auto& [i, j] : pairs) {
        if (i < 0 || j < 0 || i >= N || j >= N || i == j)
            throw DimensionError(fmt::format("solve_weights: invalid pair ({}, {})", i, j));
        if (group[i] != -1 || group[j] != -1)
            throw DimensionError(fmt::format("solve_weights: pair ({}, {}) overlaps another pair", i, j));
        group[i] = group[j] = -2;
    }
    for (int c = 0; c < N; ++c) {
        if (group[c] == -1) {
            group[c] = static_cast<int>(members.size());
            members.push_back({c});
        } else if (group[c] == -2) {
            for (const auto& [i, j] : pairs)
                if (i == c || j == c) {
                    group[i] = group[j] = static_cast<int>(members.size());
                    members.push_back({std::min(i, j), std::max(i, j)});
                }
        }
    }

    Eigen::MatrixXd reduced(A.rows(), static_cast<Eigen::Index>(members.size()));
    for (std::size_t g = 0; g < members.size(); ++g) {
        Eigen::VectorXd col = Eigen::VectorXd::Zero(A.rows());
        for (int c : members[g])
            col += A.col(c);
        reduced.col(static_cast<Eigen::Index>(g)) = col / static_cast<double>(members[g].size());
    }

    auto res = simplex_lsq<double>(reduced, b);
    if (prior.size() == N) {
        Eigen::VectorXd rp = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(members.size()));
        for (std::size_t g = 0; g < members.size(); ++g)
            for (int c : members[g])
                rp[static_cast<Eigen::Index>(g)] += prior[c];
        res.x = simplex_closest<double>(reduced, res.x, rp);
    }
    WeightSolution sol;
    sol.weights = Eigen::VectorXd::Zero(N);
    for (std::size_t g = 0; g < members.size(); ++g) {
        const double share = res.x[static_cast<Eigen::Index>(g)] / static_cast<double>(members[g].size());
        for (int c : members[g])
            sol.weights[c] = share;
    }
    sol.residual = (A * sol.weights - b).norm();
    sol.feasible = sol.residual < threshold;
    return sol;
}

std::vector<const CalibratedSet*> SetPool::sets_at(int n) const
{
    std::vector<const CalibratedSet*> out;
    for (const auto& s : sets)
        if (s.n == n)
            out.push_back(&s);
    return out;
}

std::vector<int> SetPool::sample_sizes() const
{
    std::set<int> ns;
    for (const auto& s : sets)
        ns.insert(s.n);
    return {ns.begin(), ns.end()};
}

SetPool combine(std::span<const SetPool> pools, std::string label)
{
    SetPool out;
    out.label = std::move(label);
    for (const auto& p : pools) {
        out.sets.insert(out.sets.end(), p.sets.begin(), p.sets.end());
        out.attempts += p.attempts;
        out.qualified += p.qualified;
    }
    return out;
}

WeightSolution resolve(const CalibratedSet& set)
{
    const auto seqs = generate(set.recipes);
    const auto sys = build_system(set.dist, set.n, set.k_max, seqs);
    return solve_weights(sys.A, sys.b, set.pairs, set.threshold, tie_break_prior(set.tie_break, set.recipes));
}

CalibratedSet calibrate_designed(const DistributionSpec& dist, int n, std::uint64_t seed, double threshold)
{
    auto recipes = designed_12_recipes(n, derive_seed(seed, {static_cast<std::uint64_t>(n)}));
    auto pairs = designed_12_pairs();
    const auto seqs = generate(recipes);
    const auto sys = build_system(dist, n, kDefaultMaxMoment, seqs);
    const auto sol = solve_weights(sys.A, sys.b, pairs, threshold, baseline_prior(recipes));
    return make_set(dist, n, kDefaultMaxMoment, seed, threshold, std::move(recipes), std::move(pairs), sol);
}

std::vector<SequenceRecipe> bar_candidate(int n, std::uint64_t stream_seed, long attempt)
{
    std::vector<SequenceRecipe> r;
    r.reserve(12);
    r.push_back({recipe::Arithmetic{}, n});
    r.push_back({recipe::BetaQuantile{0.547, 0.547}, n});
    for (std::uint64_t j = 0; j < 10; ++j)
        r.push_back({recipe::PseudoRandom{stream_seed, static_cast<std::uint64_t>(attempt) * 10 + j}, n});
    return r;
}

SetPool bar_search(const DistributionSpec& dist, int n, int n_sets, std::uint64_t seed,
                   const BarSearchOptions& options)
{
    if (n < 5)
        throw DomainError(fmt::format("bar_search: n = {} is below 5", n));
    if (n_sets < 1)
        throw DomainError("bar_search: nSets must be >= 1");
    check_k_max(options.k_max);
    const int k_max = options.k_max;
    const std::uint64_t stream_seed = derive_seed(seed, {static_cast<std::uint64_t>(n)});

    // the two fixed columns are shared by every candidate
    const Eigen::VectorXd b = target_moments(dist, n, k_max);
    const Eigen::VectorXd arith_col = moment_column(dist, arithmetic(n).values, k_max);
    const Eigen::VectorXd beta_col = moment_column(dist, beta_quantile_seq(n, 0.547, 0.547).values, k_max);

    SetPool pool;
    pool.label = "BAR";
    const long budget = options.max_attempts_per_set * n_sets;
    Eigen::MatrixXd A(k_max + 1, 12);
    A.col(0) = arith_col;
    A.col(1) = beta_col;
    long attempt = 0;
    Eigen::VectorXd prior;
    while (static_cast<int>(pool.sets.size()) < n_sets && attempt < budget) {
        auto recipes = bar_candidate(n, stream_seed, attempt);
        for (int j = 2; j < 12; ++j) {
            const auto& pr = std::get<recipe::PseudoRandom>(recipes[j].kind);
            A.col(j) = moment_column(dist, pseudo_random_seq(n, pr.seed, pr.stream).values, k_max);
        }
        if (attempt == 0)
            prior = tie_break_prior(options.tie_break, recipes);
        const auto sol = solve_weights(A, b, {}, options.threshold, prior);
        ++attempt;
        if (sol.feasible) {
            auto set = make_set(dist, n, k_max, seed, options.threshold, std::move(recipes), {}, sol);
            set.tie_break = options.tie_break;
            pool.sets.push_back(std::move(set));
        }
    }
    pool.attempts = attempt;
    pool.qualified = static_cast<long>(pool.sets.size());
    if (static_cast<int>(pool.sets.size()) < n_sets)
        throw SearchExhausted(fmt::format("bar_search: {} of {} sets qualified after {} attempts for {} at n = {}",
                                          pool.sets.size(), n_sets, attempt, dist.token(), n),
                              std::move(pool));
    return pool;
}

SetPool multi_dist_pool(std::span<const DistributionSpec> specs, int sets_per_spec, int n, std::uint64_t seed,
                        const BarSearchOptions& options)
{
    if (specs.empty())
        throw DomainError("multi_dist_pool: no distributions given");
    std::vector<SetPool> pools;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const std::uint64_t spec_seed = derive_seed(seed, {0x6d756c7469ULL, i});
        try {
            pools.push_back(bar_search(specs[i], n, sets_per_spec, spec_seed, options));
        } catch (const SearchExhausted& e) {
            pools.push_back(e.partial());
            throw SearchExhausted(e.what(), combine(pools, "BAR-multi"));
        }
    }
    return combine(pools, "BAR-multi");
}

std::vector<DistributionSpec> five_family_specs()
{
    return {
        DistributionSpec::weibull(2.0),   DistributionSpec::weibull(5.0),
        DistributionSpec::gamma(1.0),     DistributionSpec::lognormal(0.25),
        DistributionSpec::lognormal(0.5), DistributionSpec::pareto(7.0),
        DistributionSpec::pareto(10.0),   DistributionSpec::pareto(15.0),
        DistributionSpec::generalized_gaussian(2.0), DistributionSpec::generalized_gaussian(4.0),
    };
}

} // namespace seqcal
