#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace seqcal {

enum class Orientation { Left, Right };

namespace recipe {

struct Arithmetic {
    friend bool operator==(const Arithmetic&, const Arithmetic&) = default;
};

struct BetaQuantile {
    double alpha;
    double beta;
    friend bool operator==(const BetaQuantile&, const BetaQuantile&) = default;
};

/// Lower part of the grid through Beta(a1,a1), upper part through Beta(a2,a2)
/// (for Left; Right is the mirror image).
struct SelfMixture {
    double a1;
    double a2;
    Orientation orientation;
    friend bool operator==(const SelfMixture&, const SelfMixture&) = default;
};

/// As SelfMixture with the second component replaced by the plain grid.
struct ArithMixture {
    double alpha;
    Orientation orientation;
    friend bool operator==(const ArithMixture&, const ArithMixture&) = default;
};

struct PseudoRandom {
    std::uint64_t seed;
    std::uint64_t stream;
    friend bool operator==(const PseudoRandom&, const PseudoRandom&) = default;
};

/// Fills the gaps of the listed sibling recipes (indices into the enclosing
/// recipe list; each must precede the complement).
struct Complement {
    std::vector<int> siblings;
    friend bool operator==(const Complement&, const Complement&) = default;
};

} // namespace recipe

/// Deterministic rule that produces a sorted sequence of n points in (0,1).
struct SequenceRecipe {
    using Kind = std::variant<recipe::Arithmetic, recipe::BetaQuantile, recipe::SelfMixture, recipe::ArithMixture,
                              recipe::PseudoRandom, recipe::Complement>;
    Kind kind;
    int n = 0;
    /// Apply x -> 1 - x after generation; only set for kinds without a
    /// closed-form mirror (pseudo-random, complement).
    bool reflected = false;

    std::string kind_name() const;
    friend bool operator==(const SequenceRecipe&, const SequenceRecipe&) = default;
};

struct UnitSequence {
    SequenceRecipe recipe;
    Eigen::ArrayXd values;
};

/// {i/(n+1)}, i = 1..n.
UnitSequence arithmetic(int n);

/// Arithmetic grid pushed through the Beta(alpha, beta) quantile.
UnitSequence beta_quantile_seq(int n, double alpha, double beta);

/// {1 - x} sorted; the recipe is mirrored too.
UnitSequence reflect(const UnitSequence& seq);
SequenceRecipe reflect(const SequenceRecipe& recipe);

UnitSequence self_mixture_seq(int n, double a1, double a2, Orientation orientation);
UnitSequence arith_mixture_seq(int n, double alpha, Orientation orientation);
UnitSequence pseudo_random_seq(int n, std::uint64_t seed, std::uint64_t stream);

/// Residual-density filler for a pool of equally weighted siblings.
///
/// The pooled values are histogrammed on kComplementBins bins; the residual
/// density max(g) - g is normalised and its quantiles at the arithmetic grid
/// are returned. A flat pool yields the arithmetic grid.
UnitSequence complement_seq(int n, std::span<const UnitSequence> siblings);
inline constexpr int kComplementBins = 1024;

/// The twelve designed sequences in fixed order:
///  0 arithmetic, 1 Beta(0.547,0.547), 2/3 Beta(46.761,20.108) and mirror,
///  4/5 Beta(0.478,38.53) and mirror, 6/7 self-mixture(0.369,18.933) L/R,
///  8/9 arith-mixture(0.328) L/R, 10 pseudo-random(seed, 0), 11 complement of 0..10.
std::vector<UnitSequence> designed_12(int n, std::uint64_t seed);
std::vector<SequenceRecipe> designed_12_recipes(int n, std::uint64_t seed);
/// Index pairs of designed_12 that are mirror images of each other.
std::vector<std::pair<int, int>> designed_12_pairs();

UnitSequence generate(const SequenceRecipe& recipe);
/// Generates a recipe list, resolving Complement siblings within the list.
std::vector<UnitSequence> generate(std::span<const SequenceRecipe> recipes);

/// sup |F_n(x) - x| for the empirical distribution of values.
double kolmogorov_distance_uniform(std::span<const double> values);
/// sup |F_a(x) - F_b(x)| between two empirical distributions.
double kolmogorov_distance(std::span<const double> a, std::span<const double> b);

} // namespace seqcal
