#include "seqcal/seqlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/beta.hpp>
#include <fmt/format.h>

#include "seqcal/errors.hpp"
#include "seqcal/rng.hpp"

namespace seqcal {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_size(int n, int min_n, const char* what)
{
    if (n < min_n)
        throw DomainError(fmt::format("{}: n = {} is below the minimum {}", what, n, min_n));
}

void require_shape(double s, const char* what)
{
    if (!(s > 0.0) || !std::isfinite(s))
        throw ParameterError(fmt::format("{}: shape parameters must be finite and > 0", what));
}

// Keeps values strictly inside (0,1) when a transform rounds onto an endpoint.
double clamp_open(double x)
{
    constexpr double lo = std::numeric_limits<double>::min();
    const double hi = std::nextafter(1.0, 0.0);
    return std::clamp(x, lo, hi);
}

Eigen::ArrayXd grid(int n)
{
    Eigen::ArrayXd g(n);
    for (int i = 0; i < n; ++i)
        g[i] = static_cast<double>(i + 1) / static_cast<double>(n + 1);
    return g;
}

double beta_q(double a, double b, double u)
{
    if (a == 1.0 && b == 1.0)
        return u;
    return clamp_open(boost::math::ibeta_inv(a, b, u));
}

Eigen::ArrayXd mirror(const Eigen::ArrayXd& v)
{
    Eigen::ArrayXd out(v.size());
    const Eigen::Index n = v.size();
    for (Eigen::Index i = 0; i < n; ++i)
        out[i] = clamp_open(1.0 - v[n - 1 - i]);
    return out;
}

// Lower ceil(n/2) points from `lower` squeezed into (0,1/2), the rest from
// `upper` into (1/2,1). Each component sees its own arithmetic sub-grid.
template <typename Lower, typename Upper>
Eigen::ArrayXd split_grid(int n, Lower lower, Upper upper)
{
    const int n_lo = (n + 1) / 2;
    const int n_hi = n / 2;
    Eigen::ArrayXd v(n);
    for (int j = 0; j < n_lo; ++j)
        v[j] = clamp_open(0.5 * lower(static_cast<double>(j + 1) / (n_lo + 1)));
    for (int j = 0; j < n_hi; ++j)
        v[n_lo + j] = clamp_open(0.5 + 0.5 * upper(static_cast<double>(j + 1) / (n_hi + 1)));
    std::sort(v.begin(), v.end());
    return v;
}

Eigen::ArrayXd self_mixture_values(int n, double a1, double a2, Orientation o)
{
    auto v = split_grid(
        n, [a1](double u) { return beta_q(a1, a1, u); }, [a2](double u) { return beta_q(a2, a2, u); });
    return o == Orientation::Left ? v : mirror(v);
}

Eigen::ArrayXd arith_mixture_values(int n, double alpha, Orientation o)
{
    auto v = split_grid(
        n, [alpha](double u) { return beta_q(alpha, alpha, u); }, [](double u) { return u; });
    return o == Orientation::Left ? v : mirror(v);
}

Eigen::ArrayXd pseudo_random_values(int n, std::uint64_t seed, std::uint64_t stream)
{
    UniformStream rng(seed, stream);
    Eigen::ArrayXd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = rng();
    std::sort(v.begin(), v.end());
    return v;
}

Eigen::ArrayXd complement_values(int n, std::span<const UnitSequence> siblings)
{
    // pooled cdf: linear through the plotting positions (x_(i), i/(T+1)),
    // pinned at (0,0) and (1,1); bin masses are its increments. A raw
    // histogram would be mostly 0/1 counts at n in the hundreds.
    std::vector<double> xs;
    for (const auto& s : siblings)
        xs.insert(xs.end(), s.values.begin(), s.values.end());
    std::sort(xs.begin(), xs.end());
    const double total = static_cast<double>(xs.size());
    std::vector<double> kx{0.0}, ky{0.0};
    for (std::size_t i = 0; i < xs.size(); ++i) {
        kx.push_back(std::clamp(xs[i], 0.0, 1.0));
        ky.push_back(static_cast<double>(i + 1) / (total + 1.0));
    }
    kx.push_back(1.0);
    ky.push_back(1.0);
    auto pooled_cdf = [&](double x) {
        auto it = std::upper_bound(kx.begin(), kx.end(), x);
        if (it == kx.end())
            return 1.0;
        const auto j = static_cast<std::size_t>(it - kx.begin());
        const double x0 = kx[j - 1], x1 = kx[j];
        const double t = x1 > x0 ? (x - x0) / (x1 - x0) : 1.0;
        return ky[j - 1] + t * (ky[j] - ky[j - 1]);
    };
    std::vector<double> counts(kComplementBins);
    double prev = 0.0;
    for (int b = 0; b < kComplementBins; ++b) {
        const double next = pooled_cdf(static_cast<double>(b + 1) / kComplementBins);
        counts[b] = next - prev;
        prev = next;
    }

    // residual mass per bin: (max level - pooled density), normalised
    const double peak = *std::max_element(counts.begin(), counts.end());
    std::vector<double> mass(kComplementBins);
    double mass_total = 0.0;
    for (int b = 0; b < kComplementBins; ++b) {
        mass[b] = peak - counts[b];
        mass_total += mass[b];
    }
    if (mass_total <= 0.0 || total == 0.0) {
        std::fill(mass.begin(), mass.end(), 1.0);
        mass_total = kComplementBins;
    }
    std::vector<double> cum(kComplementBins + 1, 0.0);
    for (int b = 0; b < kComplementBins; ++b)
        cum[b + 1] = cum[b] + mass[b] / mass_total;

    Eigen::ArrayXd v(n);
    for (int i = 0; i < n; ++i) {
        const double u = static_cast<double>(i + 1) / (n + 1);
        // first bin whose upper cumulative edge reaches u
        auto it = std::lower_bound(cum.begin() + 1, cum.end(), u);
        const int b = std::min(static_cast<int>(it - cum.begin()) - 1, kComplementBins - 1);
        const double p = cum[b + 1] - cum[b];
        const double frac = p > 0.0 ? std::clamp((u - cum[b]) / p, 0.0, 1.0) : 0.5;
        v[i] = clamp_open((b + frac) / kComplementBins);
    }
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace

std::string SequenceRecipe::kind_name() const
{
    return std::visit(overloaded{
                          [](const recipe::Arithmetic&) { return std::string("arithmetic"); },
                          [](const recipe::BetaQuantile&) { return std::string("beta_quantile"); },
                          [](const recipe::SelfMixture&) { return std::string("self_mixture"); },
                          [](const recipe::ArithMixture&) { return std::string("arith_mixture"); },
                          [](const recipe::PseudoRandom&) { return std::string("pseudo_random"); },
                          [](const recipe::Complement&) { return std::string("complement"); },
                      },
                      kind);
}

UnitSequence arithmetic(int n)
{
    require_size(n, 1, "arithmetic");
    return {{recipe::Arithmetic{}, n}, grid(n)};
}

UnitSequence beta_quantile_seq(int n, double alpha, double beta)
{
    require_size(n, 1, "beta_quantile_seq");
    require_shape(alpha, "beta_quantile_seq");
    require_shape(beta, "beta_quantile_seq");
    Eigen::ArrayXd v = grid(n);
    for (auto& x : v)
        x = beta_q(alpha, beta, x);
    return {{recipe::BetaQuantile{alpha, beta}, n}, std::move(v)};
}

SequenceRecipe reflect(const SequenceRecipe& r)
{
    SequenceRecipe out = r;
    auto flip = [](Orientation o) { return o == Orientation::Left ? Orientation::Right : Orientation::Left; };
    std::visit(overloaded{
                   [](recipe::Arithmetic&) {},
                   [](recipe::BetaQuantile& b) { std::swap(b.alpha, b.beta); },
                   [&](recipe::SelfMixture& m) { m.orientation = flip(m.orientation); },
                   [&](recipe::ArithMixture& m) { m.orientation = flip(m.orientation); },
                   [&](recipe::PseudoRandom&) { out.reflected = !out.reflected; },
                   [&](recipe::Complement&) { out.reflected = !out.reflected; },
               },
               out.kind);
    return out;
}

UnitSequence reflect(const UnitSequence& seq) { return {reflect(seq.recipe), mirror(seq.values)}; }

UnitSequence self_mixture_seq(int n, double a1, double a2, Orientation orientation)
{
    require_size(n, 2, "self_mixture_seq");
    require_shape(a1, "self_mixture_seq");
    require_shape(a2, "self_mixture_seq");
    return {{recipe::SelfMixture{a1, a2, orientation}, n}, self_mixture_values(n, a1, a2, orientation)};
}

UnitSequence arith_mixture_seq(int n, double alpha, Orientation orientation)
{
    require_size(n, 2, "arith_mixture_seq");
    require_shape(alpha, "arith_mixture_seq");
    return {{recipe::ArithMixture{alpha, orientation}, n}, arith_mixture_values(n, alpha, orientation)};
}

UnitSequence pseudo_random_seq(int n, std::uint64_t seed, std::uint64_t stream)
{
    require_size(n, 1, "pseudo_random_seq");
    return {{recipe::PseudoRandom{seed, stream}, n}, pseudo_random_values(n, seed, stream)};
}

UnitSequence complement_seq(int n, std::span<const UnitSequence> siblings)
{
    require_size(n, 1, "complement_seq");
    if (siblings.empty())
        throw DimensionError("complement_seq: at least one sibling is required");
    recipe::Complement c;
    for (std::size_t i = 0; i < siblings.size(); ++i) {
        if (siblings[i].values.size() != n)
            throw DimensionError(fmt::format("complement_seq: sibling {} has {} values, expected {}", i,
                                             siblings[i].values.size(), n));
        c.siblings.push_back(static_cast<int>(i));
    }
    return {{std::move(c), n}, complement_values(n, siblings)};
}

std::vector<SequenceRecipe> designed_12_recipes(int n, std::uint64_t seed)
{
    require_size(n, 5, "designed_12");
    using namespace recipe;
    std::vector<SequenceRecipe> r{
        {Arithmetic{}, n},
        {BetaQuantile{0.547, 0.547}, n},
        {BetaQuantile{46.761, 20.108}, n},
        {BetaQuantile{20.108, 46.761}, n},
        {BetaQuantile{0.478, 38.53}, n},
        {BetaQuantile{38.53, 0.478}, n},
        {SelfMixture{0.369, 18.933, Orientation::Left}, n},
        {SelfMixture{0.369, 18.933, Orientation::Right}, n},
        {ArithMixture{0.328, Orientation::Left}, n},
        {ArithMixture{0.328, Orientation::Right}, n},
        {PseudoRandom{seed, 0}, n},
    };
    Complement c;
    for (int i = 0; i < 11; ++i)
        c.siblings.push_back(i);
    r.push_back({std::move(c), n});
    return r;
}

std::vector<std::pair<int, int>> designed_12_pairs() { return {{2, 3}, {4, 5}, {6, 7}, {8, 9}}; }

std::vector<UnitSequence> designed_12(int n, std::uint64_t seed)
{
    const auto recipes = designed_12_recipes(n, seed);
    return generate(recipes);
}

UnitSequence generate(const SequenceRecipe& r)
{
    if (std::holds_alternative<recipe::Complement>(r.kind))
        throw ParameterError("complement recipes can only be generated inside a recipe list");
    return generate(std::span<const SequenceRecipe>(&r, 1)).front();
}

std::vector<UnitSequence> generate(std::span<const SequenceRecipe> recipes)
{
    std::vector<UnitSequence> out;
    out.reserve(recipes.size());
    for (std::size_t idx = 0; idx < recipes.size(); ++idx) {
        const auto& r = recipes[idx];
        const int n = r.n;
        UnitSequence seq = std::visit(
            overloaded{
                [n](const recipe::Arithmetic&) { return arithmetic(n); },
                [n](const recipe::BetaQuantile& b) { return beta_quantile_seq(n, b.alpha, b.beta); },
                [n](const recipe::SelfMixture& m) { return self_mixture_seq(n, m.a1, m.a2, m.orientation); },
                [n](const recipe::ArithMixture& m) { return arith_mixture_seq(n, m.alpha, m.orientation); },
                [n](const recipe::PseudoRandom& p) { return pseudo_random_seq(n, p.seed, p.stream); },
                [&](const recipe::Complement& c) {
                    std::vector<UnitSequence> sib;
                    for (int s : c.siblings) {
                        if (s < 0 || static_cast<std::size_t>(s) >= idx)
                            throw ParameterError(
                                fmt::format("complement at position {} references invalid sibling {}", idx, s));
                        sib.push_back(out[s]);
                    }
                    auto cs = complement_seq(n, sib);
                    cs.recipe.kind = c;
                    return cs;
                },
            },
            r.kind);
        if (r.reflected) {
            seq.values = mirror(seq.values);
            seq.recipe.reflected = true;
        }
        out.push_back(std::move(seq));
    }
    return out;
}

double kolmogorov_distance_uniform(std::span<const double> values)
{
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double N = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        d = std::max({d, (i + 1) / N - v[i], v[i] - i / N});
    return d;
}

double kolmogorov_distance(std::span<const double> a, std::span<const double> b)
{
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() || j < y.size()) {
        const double t = j == y.size() || (i < x.size() && x[i] <= y[j]) ? x[i] : y[j];
        while (i < x.size() && x[i] <= t)
            ++i;
        while (j < y.size() && y[j] <= t)
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / x.size() - static_cast<double>(j) / y.size()));
    }
    return d;
}

} // namespace seqcal
