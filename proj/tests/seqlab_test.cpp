#include <doctest.h>

#include <cmath>
#include <vector>

#include "seqcal/dist.hpp"
#include "seqcal/errors.hpp"
#include "seqcal/moments.hpp"
#include "seqcal/seqlab.hpp"

using namespace seqcal;

namespace {

std::vector<double> vec(const Eigen::ArrayXd& a) { return {a.data(), a.data() + a.size()}; }

void check_close(const Eigen::ArrayXd& a, const std::vector<double>& b, double tol)
{
    REQUIRE(a.size() == static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < b.size(); ++i)
        CHECK(std::abs(a[static_cast<Eigen::Index>(i)] - b[i]) <= tol);
}

double max_abs_diff(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b) { return (a - b).abs().maxCoeff(); }

bool valid_unit(const Eigen::ArrayXd& v)
{
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0 && v[i] < 1.0))
            return false;
        if (i > 0 && v[i] < v[i - 1])
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("arithmetic grid")
{
    check_close(arithmetic(3).values, {0.25, 0.5, 0.75}, 0.0);
    check_close(arithmetic(1).values, {0.5}, 0.0);
    check_close(arithmetic(4).values, {0.2, 0.4, 0.6, 0.8}, 1e-17);
    CHECK(arithmetic(37).values.mean() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(arithmetic(0), DomainError);
}

TEST_CASE("beta quantile sequences")
{
    check_close(beta_quantile_seq(3, 1.0, 1.0).values, {0.25, 0.5, 0.75}, 1e-15);
    check_close(beta_quantile_seq(3, 2.0, 1.0).values, {0.5, std::sqrt(0.5), std::sqrt(0.75)}, 1e-14);
    CHECK(beta_quantile_seq(11, 0.547, 0.547).values[5] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(beta_quantile_seq(5, 0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(beta_quantile_seq(5, 1.0, -2.0), ParameterError);
}

TEST_CASE("reflect")
{
    UnitSequence s{{recipe::Arithmetic{}, 3}, Eigen::ArrayXd(3)};
    s.values << 0.2, 0.5, 0.9;
    check_close(reflect(s).values, {0.1, 0.5, 0.8}, 1e-15);
    CHECK(max_abs_diff(reflect(reflect(s)).values, s.values) < 1e-15);
    for (int n : {1, 4, 9, 50})
        CHECK(max_abs_diff(reflect(arithmetic(n)).values, arithmetic(n).values) < 1e-15);
}

TEST_CASE("reflection duality of beta quantiles")
{
    const std::vector<std::pair<double, double>> shipped{{0.547, 0.547}, {46.761, 20.108}, {0.478, 38.53}};
    for (int n : {5, 10, 33, 100}) {
        for (auto [a, b] : shipped) {
            CAPTURE(n);
            CAPTURE(a);
            const auto r = reflect(beta_quantile_seq(n, a, b));
            const auto direct = beta_quantile_seq(n, b, a);
            CHECK(max_abs_diff(r.values, direct.values) < 1e-12);
            CHECK(r.recipe == direct.recipe);
        }
    }
}

TEST_CASE("self mixture construction")
{
    check_close(self_mixture_seq(4, 1.0, 1.0, Orientation::Left).values, {1.0 / 6, 1.0 / 3, 2.0 / 3, 5.0 / 6}, 1e-15);
    for (int n : {4, 10, 80}) {
        const auto l = self_mixture_seq(n, 0.369, 18.933, Orientation::Left);
        const auto r = self_mixture_seq(n, 0.369, 18.933, Orientation::Right);
        CHECK(max_abs_diff(reflect(l).values, r.values) < 1e-15);
        CHECK(reflect(l.recipe) == r.recipe);
    }
    const auto l80 = self_mixture_seq(80, 0.369, 18.933, Orientation::Left);
    CHECK(sample_central_moment(l80.values, 3) < 0.0);
    CHECK(sample_central_moment(self_mixture_seq(80, 0.369, 18.933, Orientation::Right).values, 3) > 0.0);
    CHECK_THROWS_AS(self_mixture_seq(4, 0.0, 1.0, Orientation::Left), ParameterError);
    CHECK_THROWS_AS(self_mixture_seq(1, 1.0, 1.0, Orientation::Left), DomainError);
}

TEST_CASE("arith mixture construction")
{
    check_close(arith_mixture_seq(4, 1.0, Orientation::Left).values, {1.0 / 6, 1.0 / 3, 2.0 / 3, 5.0 / 6}, 1e-15);
    for (int n : {4, 12, 80}) {
        const auto l = arith_mixture_seq(n, 0.328, Orientation::Left);
        const auto r = arith_mixture_seq(n, 0.328, Orientation::Right);
        CHECK(max_abs_diff(reflect(l).values, r.values) < 1e-15);
    }
    CHECK(sample_central_moment(arith_mixture_seq(80, 0.328, Orientation::Left).values, 3) < 0.0);
    CHECK_THROWS_AS(arith_mixture_seq(4, -1.0, Orientation::Left), ParameterError);
}

TEST_CASE("odd n mixtures stay mirror images")
{
    for (int n : {5, 7, 21}) {
        const auto l = self_mixture_seq(n, 0.369, 18.933, Orientation::Left);
        const auto r = self_mixture_seq(n, 0.369, 18.933, Orientation::Right);
        CHECK(max_abs_diff(reflect(l).values, r.values) < 1e-15);
        CHECK(valid_unit(l.values));
    }
}

TEST_CASE("pseudo-random streams")
{
    const auto a = pseudo_random_seq(50, 7, 0);
    const auto b = pseudo_random_seq(50, 7, 0);
    CHECK(vec(a.values) == vec(b.values));
    CHECK(vec(a.values) != vec(pseudo_random_seq(50, 7, 1).values));
    CHECK(vec(a.values) != vec(pseudo_random_seq(50, 8, 0).values));
    CHECK(valid_unit(a.values));
    const auto big = pseudo_random_seq(100000, 12345, 3);
    CHECK(std::abs(big.values.mean() - 0.5) < 0.005);
    CHECK(valid_unit(big.values));
}

TEST_CASE("complement of a uniform pool is close to the grid")
{
    for (int n : {10, 50, 200}) {
        CAPTURE(n);
        const std::vector<UnitSequence> sib{arithmetic(n)};
        const auto c = complement_seq(n, sib);
        CHECK(valid_unit(c.values));
        const auto a = arithmetic(n);
        CHECK(kolmogorov_distance(vec(c.values), vec(a.values)) < 2.0 / n);
    }
}

TEST_CASE("complement fills the empty half")
{
    // a dense sibling living in (0, 1/2)
    const int n = 400;
    UnitSequence low{{recipe::Arithmetic{}, n}, arithmetic(n).values * 0.5};
    const std::vector<UnitSequence> sib{low};
    const auto c = complement_seq(n, sib);
    CHECK(c.values.minCoeff() >= 0.5);

    // the shipped monotone beta piles its mass near 0; its thin tail still
    // needs filling, but not its dense head
    const auto mono = beta_quantile_seq(n, 0.478, 38.53);
    const std::vector<UnitSequence> sib2{mono};
    const auto c2 = complement_seq(n, sib2);
    const double head = mono.values[n / 2];
    CHECK((c2.values < head).count() <= n / 100);
    CHECK((c2.values > 0.5).count() > n / 2);
}

TEST_CASE("complement never worsens uniformity")
{
    for (int n : {5, 10, 30, 100}) {
        CAPTURE(n);
        auto seqs = designed_12(n, 99);
        std::vector<double> without, with;
        for (int i = 0; i < 11; ++i)
            for (double x : seqs[static_cast<std::size_t>(i)].values)
                without.push_back(x);
        with = without;
        for (double x : seqs[11].values)
            with.push_back(x);
        CHECK(kolmogorov_distance_uniform(with) <= kolmogorov_distance_uniform(without));
    }
}

TEST_CASE("complement size checks")
{
    const std::vector<UnitSequence> none;
    CHECK_THROWS_AS(complement_seq(5, none), DimensionError);
    const std::vector<UnitSequence> mixed{arithmetic(5), arithmetic(6)};
    CHECK_THROWS_AS(complement_seq(5, mixed), DimensionError);
}

TEST_CASE("designed 12")
{
    for (int n = 5; n <= 100; ++n) {
        const auto s = designed_12(n, 2024);
        REQUIRE(s.size() == 12);
        for (const auto& q : s) {
            CHECK(q.values.size() == n);
            CHECK(valid_unit(q.values));
        }
        for (auto [i, j] : designed_12_pairs())
            CHECK(max_abs_diff(reflect(s[static_cast<std::size_t>(i)]).values, s[static_cast<std::size_t>(j)].values) <
                  1e-12);
    }
    const auto pairs = designed_12_pairs();
    REQUIRE(pairs.size() == 4);
    CHECK(pairs[0] == std::pair{2, 3});
    CHECK(pairs[3] == std::pair{8, 9});
    CHECK_THROWS_AS(designed_12(4, 1), DomainError);
}

TEST_CASE("designed 12 recipes")
{
    const auto r = designed_12_recipes(20, 5);
    REQUIRE(r.size() == 12);
    CHECK(std::holds_alternative<recipe::Arithmetic>(r[0].kind));
    CHECK(std::get<recipe::BetaQuantile>(r[1].kind) == recipe::BetaQuantile{0.547, 0.547});
    CHECK(std::get<recipe::BetaQuantile>(r[2].kind) == recipe::BetaQuantile{46.761, 20.108});
    CHECK(std::get<recipe::BetaQuantile>(r[3].kind) == recipe::BetaQuantile{20.108, 46.761});
    CHECK(std::get<recipe::BetaQuantile>(r[4].kind) == recipe::BetaQuantile{0.478, 38.53});
    CHECK(std::get<recipe::BetaQuantile>(r[5].kind) == recipe::BetaQuantile{38.53, 0.478});
    CHECK(std::get<recipe::SelfMixture>(r[6].kind).orientation == Orientation::Left);
    CHECK(std::get<recipe::SelfMixture>(r[7].kind).orientation == Orientation::Right);
    CHECK(std::get<recipe::ArithMixture>(r[8].kind).alpha == 0.328);
    CHECK(std::get<recipe::PseudoRandom>(r[10].kind) == recipe::PseudoRandom{5, 0});
    CHECK(std::get<recipe::Complement>(r[11].kind).siblings.size() == 11);

    // generating the recipes reproduces the sequences bit for bit
    const auto from_recipes = generate(r);
    const auto direct = designed_12(20, 5);
    for (std::size_t i = 0; i < 12; ++i)
        CHECK(vec(from_recipes[i].values) == vec(direct[i].values));
}

TEST_CASE("every recipe regenerates identically")
{
    auto r = designed_12_recipes(31, 77);
    r.push_back(reflect(r[10]));
    r.push_back(reflect(r[11]));
    const auto a = generate(r);
    const auto b = generate(r);
    for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(vec(a[i].values) == vec(b[i].values));
        CHECK(vec(generate(r[i].n == 31 && i < 11 ? r[i] : r[0]).values).size() == 31);
    }
    // reflected pseudo-random recipe is the mirror image of the plain one
    CHECK(max_abs_diff(a[12].values, reflect(a[10]).values) < 1e-15);
}

TEST_CASE("arithmetic limit of the grid moments")
{
    const int n = 100000;
    const auto a = arithmetic(n).values;
    const auto mv = central_moments(DistributionSpec::uniform());
    for (int k = 2; k <= 4; k += 2) {
        CAPTURE(k);
        CHECK(std::abs(sample_central_moment(a, k) - mv[k]) <= 10.0 / n * mv[k]);
    }
    CHECK(std::abs(sample_central_moment(a, 3)) < 1e-15);
}

TEST_CASE("kolmogorov distances")
{
    CHECK(kolmogorov_distance_uniform(std::vector<double>{0.5}) == doctest::Approx(0.5));
    const auto g = arithmetic(9).values;
    CHECK(kolmogorov_distance_uniform(vec(g)) == doctest::Approx(0.1));
    const std::vector<double> a{0.1, 0.2}, b{0.1, 0.2};
    CHECK(kolmogorov_distance(a, b) == 0.0);
    const std::vector<double> c{0.3, 0.4};
    CHECK(kolmogorov_distance(a, c) == doctest::Approx(1.0));
}
