// Acceptance report: one PASS/FAIL line per criterion, followed by the
// measured numbers. Always exits 0 once the report is printed; a FAIL line is
// a result, not a crash.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "seqcal/calib.hpp"
#include "seqcal/dist.hpp"
#include "seqcal/estimate.hpp"
#include "seqcal/io.hpp"
#include "seqcal/moments.hpp"
#include "seqcal/rng.hpp"
#include "seqcal/seqlab.hpp"

using namespace seqcal;

namespace {

constexpr std::uint64_t kSeed = 20240601;
constexpr int kRepeats = 10;

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, std::string note)
    {
        pass = pass && ok;
        notes.push_back(fmt::format("{} {}", ok ? "ok  " : "MISS", std::move(note)));
    }
    void info(std::string note) { notes.push_back("info " + std::move(note)); }
};

int g_passed = 0;

void report(int id, const std::string& title, const std::function<void(Outcome&)>& body)
{
    const auto t0 = Clock::now();
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.check(false, fmt::format("threw: {}", e.what()));
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    fmt::print("criterion {}: {} | {} [{:.1f}s]\n", id, o.pass ? "PASS" : "FAIL", title, secs);
    for (const auto& n : o.notes)
        fmt::print("    {}\n", n);
    std::fflush(stdout);
    g_passed += o.pass;
}

double curve_rmse(const std::string& label, const DistributionSpec& dist, const EstimatorSpec& est, Quantity q,
                  std::span<const int> ns, const std::function<CurveMethod(std::uint64_t)>& method_for_seed)
{
    const auto truth = truth_oracle(dist, est, q);
    const auto rep = rmse_report(label, kRepeats, [&](int r) {
        return bias_curve(method_for_seed(derive_seed(kSeed, {static_cast<std::uint64_t>(r)})), ns, truth);
    });
    return rep.rmse;
}

std::function<CurveMethod(std::uint64_t)> bar_method(const DistributionSpec& dist, const EstimatorSpec& est,
                                                      Quantity q, int sets)
{
    return [=](std::uint64_t seed) {
        return pool_method([=](int n) { return bar_search(dist, n, sets, seed); }, dist, est, q);
    };
}

std::function<CurveMethod(std::uint64_t)> mc(const DistributionSpec& dist, const EstimatorSpec& est, Quantity q,
                                              int samples)
{
    return [=](std::uint64_t seed) { return mc_method(dist, est, q, samples, seed); };
}

// ---- 1 ----------------------------------------------------------------------

void exact_oracles(Outcome& o)
{
    std::mt19937_64 rng(kSeed);
    std::normal_distribution<double> z;
    constexpr long reps = 10'000'000;
    for (int n : {2, 5, 10, 50}) {
        std::vector<double> x(static_cast<std::size_t>(n));
        double sum = 0.0, sum2 = 0.0;
        for (long r = 0; r < reps; ++r) {
            double m = 0.0;
            for (auto& v : x) {
                v = z(rng);
                m += v;
            }
            m /= n;
            double ss = 0.0;
            for (double v : x)
                ss += (v - m) * (v - m);
            const double s = std::sqrt(ss / (n - 1));
            sum += s;
            sum2 += s * s;
        }
        const double mean = sum / reps;
        const double se = std::sqrt((sum2 / reps - mean * mean) / (reps - 1));
        const double exact = gaussian_sd_expectation_factor(n);
        const double zscore = std::abs(mean - exact) / se;
        o.check(zscore < 4.0, fmt::format("n={:<3} E[s]={:.7f} mc={:.7f} |z|={:.2f} (< 4)", n, exact, mean, zscore));
    }
    double worst = 0.0;
    for (int n = 1; n <= 101; n += 2)
        worst = std::max(worst, std::abs(exponential_median_closed_form(n, 1.0) -
                                         expected_median_quadrature(DistributionSpec::exponential(), n)));
    o.check(worst < 1e-9, fmt::format("exponential median closed form vs quadrature, odd n<=101: max diff {:.2e}", worst));
}

// ---- 2 ----------------------------------------------------------------------

void consistency_n10(Outcome& o)
{
    const auto g = DistributionSpec::gaussian();
    const auto designed = calibrate_designed(g, 10, kSeed);
    o.check(designed.residual < 1e-10, fmt::format("designed-12 residual {:.3e}", designed.residual));
    const auto pool = bar_search(g, 10, 10, kSeed);
    double worst = 0.0;
    for (const auto& s : pool.sets)
        worst = std::max(worst, s.residual);
    o.check(pool.sets.size() == 10 && worst < 1e-10,
            fmt::format("BAR sets={} max residual {:.3e} (attempts {})", pool.sets.size(), worst, pool.attempts));
}

// ---- 3 ----------------------------------------------------------------------

void weight_structure(Outcome& o)
{
    const auto g = DistributionSpec::gaussian();
    const auto ns = n_range(5, 100);
    int above = 0;
    double noise = 0.0;
    std::string misses;
    for (int n : ns) {
        const auto set = calibrate_designed(g, n, derive_seed(kSeed, {3, static_cast<std::uint64_t>(n)}));
        double base = 0.0, rand = 0.0;
        for (std::size_t j = 0; j < set.recipes.size(); ++j) {
            const auto& k = set.recipes[j].kind;
            const double w = set.weights[static_cast<Eigen::Index>(j)];
            if (std::holds_alternative<recipe::Arithmetic>(k))
                base += w;
            else if (const auto* b = std::get_if<recipe::BetaQuantile>(&k); b && b->alpha == b->beta)
                base += w;
            else if (std::holds_alternative<recipe::PseudoRandom>(k) || std::holds_alternative<recipe::Complement>(k))
                rand += w;
        }
        if (base > 0.70)
            ++above;
        else
            misses += fmt::format(" {}", n);
        noise += rand;
    }
    const int need = static_cast<int>(std::ceil(0.9 * static_cast<double>(ns.size())));
    o.check(above >= need, fmt::format("arith+betaU > 0.70 at {} of {} n (need {}); below at n ={}", above,
                                       ns.size(), need, misses));
    const double mean_noise = noise / static_cast<double>(ns.size());
    o.check(mean_noise < 0.03, fmt::format("mean random+complement weight {:.4f} (< 0.03)", mean_noise));
}

// ---- 4 ----------------------------------------------------------------------

void bias_rows(Outcome& o)
{
    const auto g = DistributionSpec::gaussian();
    const auto sd = EstimatorSpec::sample_sd();
    const auto ns = n_range(5, 100);
    const auto q = Quantity::Bias;

    const double arith = curve_rmse("Arithmetic", g, sd, q, ns, [&](std::uint64_t) {
        return pool_method([&](int n) { return arithmetic_pool(g, n); }, g, sd, q);
    });
    o.check(std::abs(arith - 0.0736) <= 0.010, fmt::format("Arithmetic   {:.5f} in 0.0736 +- 0.010", arith));
    const double random = curve_rmse("Random 10S", g, sd, q, ns, mc(g, sd, q, 120));
    o.check(random >= 0.008 && random <= 0.020, fmt::format("Random 10S   {:.5f} in [0.008, 0.020]", random));
    const double g10 = curve_rmse("BAR-G 10S", g, sd, q, ns, bar_method(g, sd, q, 10));
    o.check(g10 <= 0.008, fmt::format("BAR-G 10S    {:.5f} <= 0.008", g10));
    const double g50 = curve_rmse("BAR-G 50S", g, sd, q, ns, bar_method(g, sd, q, 50));
    o.check(g50 <= 0.008, fmt::format("BAR-G 50S    {:.5f} <= 0.008", g50));

    // 10 parameterisations of five families x 3 sets + 20 Gaussian sets = 50 per n
    const auto specs = five_family_specs();
    const double d50 = curve_rmse("BAR-5D 50S", g, sd, q, ns, [&](std::uint64_t seed) {
        return pool_method(
            [=](int n) {
                std::vector<SetPool> parts{multi_dist_pool(specs, 3, n, seed), bar_search(g, n, 20, seed)};
                return combine(parts, "BAR-5D");
            },
            g, sd, q);
    });
    o.check(d50 <= 0.004, fmt::format("BAR-5D 50S   {:.5f} <= 0.004", d50));
    o.check(d50 < g50, fmt::format("BAR-5D 50S   {:.5f} < BAR-G 50S {:.5f}", d50, g50));
}

// ---- 5 ----------------------------------------------------------------------

void median_rows(Outcome& o)
{
    const auto e = DistributionSpec::exponential();
    const auto med = EstimatorSpec::median();
    const auto ns = n_range(5, 100, true);
    const auto q = Quantity::Bias;
    const double random = curve_rmse("Random 10S", e, med, q, ns, mc(e, med, q, 120));
    o.check(random >= 0.012 && random <= 0.030, fmt::format("Random 10S  {:.5f} in [0.012, 0.030]", random));
    const double e10 = curve_rmse("BAR-E 10S", e, med, q, ns, bar_method(e, med, q, 10));
    o.check(e10 <= 0.016, fmt::format("BAR-E 10S   {:.5f} <= 0.016", e10));
    const double e30 = curve_rmse("BAR-E 30S", e, med, q, ns, bar_method(e, med, q, 30));
    o.check(e30 <= 0.011, fmt::format("BAR-E 30S   {:.5f} <= 0.011", e30));
}

// ---- 6 ----------------------------------------------------------------------

// RMSE of the square roots of the variance curve: the spread of the estimator
// on the standard-error scale.
double se_scale_rmse(const DistributionSpec& dist, const EstimatorSpec& est, std::span<const int> ns,
                     const std::function<CurveMethod(std::uint64_t)>& method_for_seed)
{
    const auto truth = truth_oracle(dist, est, Quantity::Variance);
    double acc = 0.0;
    long cnt = 0;
    for (int r = 0; r < kRepeats; ++r) {
        const auto curve = bias_curve(method_for_seed(derive_seed(kSeed, {static_cast<std::uint64_t>(r)})), ns, truth);
        for (const auto& row : curve.rows) {
            const double d = std::sqrt(std::max(row.estimate, 0.0)) - std::sqrt(row.truth);
            acc += d * d;
            ++cnt;
        }
    }
    return std::sqrt(acc / static_cast<double>(cnt));
}

void variance_rows(Outcome& o)
{
    const auto g = DistributionSpec::gaussian();
    const auto sd = EstimatorSpec::sample_sd();
    const auto ns = n_range(5, 100);
    const auto q = Quantity::Variance;
    const double bar10 = curve_rmse("BAR-G 10S", g, sd, q, ns, bar_method(g, sd, q, 10));
    o.check(bar10 >= 0.0350 / 2 && bar10 <= 0.0350 * 2,
            fmt::format("BAR-G 10S Var-curve  {:.5f} in [0.0175, 0.0700]", bar10));
    const double mc50 = curve_rmse("Random 50S", g, sd, q, ns, mc(g, sd, q, 600));
    o.check(mc50 >= 0.0032 / 2 && mc50 <= 0.0032 * 2,
            fmt::format("Random 50S Var-curve {:.5f} in [0.0016, 0.0064]", mc50));
    const double mc10 = curve_rmse("Random 10S", g, sd, q, ns, mc(g, sd, q, 120));
    o.check(bar10 > mc10, fmt::format("BAR-G 10S {:.5f} worse than Random 10S {:.5f} at 120 sequences", bar10, mc10));

    o.info(fmt::format("standard-error scale: BAR-G 10S {:.5f} (table 0.0350), Random 10S {:.5f} (0.0085), "
                       "Random 50S {:.5f} (0.0032)",
                       se_scale_rmse(g, sd, ns, bar_method(g, sd, q, 10)), se_scale_rmse(g, sd, ns, mc(g, sd, q, 120)),
                       se_scale_rmse(g, sd, ns, mc(g, sd, q, 600))));
}

// ---- 7 ----------------------------------------------------------------------

void sse(Outcome& o)
{
    const std::vector<EstimatorSpec> stats{EstimatorSpec::mean(), EstimatorSpec::median()};
    const std::vector<std::string> names{"mean", "median"};
    const auto samples = replicate_statistics(DistributionSpec::exponential(), stats, 100, 100'000, kSeed);
    const auto rep = scaled_standard_error(samples, names);
    const auto& mean = rep.columns[0];
    const auto& median = rep.columns[1];
    const double rel = std::abs(median.se - mean.se) / mean.se;
    o.check(rel < 0.05, fmt::format("SE(median)={:.5f} SE(mean)={:.5f} relative gap {:.4f} (< 0.05)", median.se,
                                    mean.se, rel));
    const double ratio = median.sse / mean.se;
    o.check(ratio >= 1.35 && ratio <= 1.55,
            fmt::format("SSE(median)/SE(mean) = {:.4f} in [1.35, 1.55] (1/ln 2 = {:.4f})", ratio, 1 / std::log(2.0)));
}

// ---- 8 ----------------------------------------------------------------------

// Exact expectation of stat over every sample of size n from a discrete law.
double enumerate(const std::vector<double>& atoms, const std::vector<double>& probs, int n,
                 const std::function<double(const Eigen::ArrayXd&)>& stat)
{
    const std::size_t m = atoms.size();
    std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
    Eigen::ArrayXd x(n);
    double total = 0.0;
    while (true) {
        double p = 1.0;
        for (int i = 0; i < n; ++i) {
            x[i] = atoms[idx[static_cast<std::size_t>(i)]];
            p *= probs[idx[static_cast<std::size_t>(i)]];
        }
        total += p * stat(x);
        int pos = 0;
        while (pos < n && ++idx[static_cast<std::size_t>(pos)] == m)
            idx[static_cast<std::size_t>(pos++)] = 0;
        if (pos == n)
            break;
    }
    return total;
}

void properties(Outcome& o)
{
    // moments enumeration oracle
    {
        const std::vector<double> atoms{-1.0, 0.5, 4.0}, probs{0.5, 0.3, 0.2};
        MomentVector mv;
        for (std::size_t i = 0; i < 3; ++i)
            mv.mean += probs[i] * atoms[i];
        for (std::size_t i = 0; i < 3; ++i) {
            const double d = atoms[i] - mv.mean;
            mv.mu2 += probs[i] * d * d;
            mv.mu3 += probs[i] * d * d * d;
            mv.mu4 += probs[i] * d * d * d * d;
        }
        double worst = 0.0;
        for (int n = 2; n <= 6; ++n)
            for (int k = 1; k <= 4; ++k) {
                if (n < min_sample_size(k))
                    continue;
                const double exact =
                    enumerate(atoms, probs, n, [k](const Eigen::ArrayXd& x) { return sample_central_moment(x, k); });
                worst = std::max(worst, std::abs(exact - expected_sample_central_moment(mv, n, k)));
                if (k >= 2) {
                    const double u =
                        enumerate(atoms, probs, n, [k](const Eigen::ArrayXd& x) { return u_central_moment(x, k); });
                    worst = std::max(worst, std::abs(u - mv[k]));
                }
            }
        o.check(worst < 1e-12, fmt::format("moments enumeration oracle: max diff {:.2e}", worst));
    }
    // quantile/cdf round trip
    {
        std::vector<DistributionSpec> specs = five_family_specs();
        specs.push_back(DistributionSpec::gaussian(2.0, 3.0));
        specs.push_back(DistributionSpec::exponential(2.5));
        specs.push_back(DistributionSpec::uniform(-1.0, 2.0));
        double worst = 0.0;
        for (const auto& d : specs)
            for (int i = 1; i <= 1000; ++i) {
                const double u = i / 1001.0;
                worst = std::max(worst, std::abs(cdf(d, quantile(d, u)) - u));
            }
        o.check(worst < 1e-10, fmt::format("quantile/cdf round trip over {} laws: max diff {:.2e}", specs.size(), worst));
    }
    // a sequence set of one is consistent with its own moments
    {
        double worst = 0.0;
        for (int n : {5, 10, 37})
            for (const auto& seq : designed_12(n, kSeed)) {
                const auto x = quantile(DistributionSpec::gaussian(), seq.values);
                const auto m = sample_moments(x);
                Eigen::MatrixXd A(5, 1);
                Eigen::VectorXd b(5);
                for (int k = 1; k <= 4; ++k)
                    A(k - 1, 0) = b[k - 1] = m[k];
                A(4, 0) = b[4] = 1.0;
                const auto sol = solve_weights(A, b, {});
                worst = std::max({worst, std::abs(sol.weights[0] - 1.0), sol.residual});
            }
        o.check(worst < 1e-12, fmt::format("single-sequence consistency: max deviation {:.2e}", worst));
    }
    // reflection duality
    {
        double worst = 0.0;
        for (int n : {5, 10, 33, 100})
            for (auto [a, b] : {std::pair{0.547, 0.547}, {46.761, 20.108}, {0.478, 38.53}}) {
                const auto r = reflect(beta_quantile_seq(n, a, b));
                const auto d = beta_quantile_seq(n, b, a);
                worst = std::max(worst, (r.values - d.values).abs().maxCoeff());
            }
        o.check(worst < 1e-12, fmt::format("reflection duality: max diff {:.2e}", worst));
    }
    // determinism
    {
        RunMetadata meta;
        meta.command = "acceptance";
        meta.seed = kSeed;
        const auto text = [&] {
            SetPool p = bar_search(DistributionSpec::gaussian(), 12, 5, kSeed);
            p.sets.push_back(calibrate_designed(DistributionSpec::gaussian(), 12, kSeed));
            return dump_json(to_json(p, meta));
        };
        o.check(text() == text(), "determinism: two pool runs serialise byte-identically");
    }
    // solver invariants
    {
        std::mt19937_64 rng(kSeed);
        std::normal_distribution<double> z;
        double worst = 0.0;
        for (int trial = 0; trial < 300; ++trial) {
            const int m = 1 + trial % 5;
            const int n = 2 + trial % 11;
            Eigen::MatrixXd A(m + 1, n);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j)
                    A(i, j) = z(rng);
            A.row(m).setOnes();
            Eigen::VectorXd b(m + 1);
            for (int i = 0; i < m; ++i)
                b[i] = z(rng) * (trial % 2 ? 0.3 : 3.0);
            b[m] = 1.0;
            std::vector<IndexPair> pairs;
            if (n >= 4 && trial % 3 == 0)
                pairs = {{0, n - 1}, {1, 2}};
            const auto sol = solve_weights(A, b, pairs);
            worst = std::max({worst, -sol.weights.minCoeff(), std::abs(sol.weights.sum() - 1.0)});
            for (auto [i, j] : pairs)
                worst = std::max(worst, std::abs(sol.weights[i] - sol.weights[j]));
        }
        o.check(worst < 1e-12, fmt::format("solver invariants on 300 random systems: max violation {:.2e}", worst));
    }
}

} // namespace

int main()
{
    fmt::print("seqcal {} acceptance, seed {}, {} repeats\n", kVersion, kSeed, kRepeats);
    report(1, "exact oracles", exact_oracles);
    report(2, "consistency at n=10", consistency_n10);
    report(3, "designed weight structure", weight_structure);
    report(4, "bias rows, Gaussian sd", bias_rows);
    report(5, "median rows, exponential", median_rows);
    report(6, "variance rows, Gaussian sd", variance_rows);
    report(7, "scaled standard error", sse);
    report(8, "property suites", properties);
    fmt::print("{} of 8 criteria passed\n", g_passed);
    return 0;
}
