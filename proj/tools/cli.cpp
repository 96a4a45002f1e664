#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "seqcal/calib.hpp"
#include "seqcal/dist.hpp"
#include "seqcal/errors.hpp"
#include "seqcal/estimate.hpp"
#include "seqcal/io.hpp"
#include "seqcal/rng.hpp"

namespace seqcal::cli {

namespace {

// Usage problems found after CLI11 has parsed (bad tokens, missing pairs of
// options, contradictory flags).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NRange {
    std::optional<int> n;
    int nmin = 5;
    int nmax = 100;
    bool odd_only = false;

    std::vector<int> values() const
    {
        if (n)
            return {*n};
        if (nmin > nmax)
            throw UsageError(fmt::format("--nmin {} exceeds --nmax {}", nmin, nmax));
        return n_range(nmin, nmax, odd_only);
    }
};

void add_range(CLI::App* app, NRange& r, int default_min = 5)
{
    r.nmin = default_min;
    auto* n = app->add_option("--n", r.n, "Single sample size");
    app->add_option("--nmin", r.nmin, "Smallest sample size")->capture_default_str()->excludes(n);
    app->add_option("--nmax", r.nmax, "Largest sample size")->capture_default_str()->excludes(n);
    app->add_flag("--odd-only", r.odd_only, "Use odd sample sizes only");
}

DistributionSpec parse_dist(const std::string& token)
{
    try {
        return DistributionSpec::parse(token);
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    } catch (const ParameterError& e) {
        throw UsageError(e.what());
    }
}

EstimatorSpec parse_estimator(const std::string& token)
{
    try {
        return EstimatorSpec::parse(token);
    } catch (const ParseError& e) {
        throw UsageError(e.what());
    }
}

Quantity parse_quantity(const std::string& s)
{
    if (s == "bias")
        return Quantity::Bias;
    if (s == "variance")
        return Quantity::Variance;
    throw UsageError(fmt::format("--quantity must be bias or variance, got '{}'", s));
}

// Repeat 0 uses the seed itself so a single run matches a direct library call.
std::uint64_t repeat_seed(std::uint64_t seed, int repeat)
{
    return repeat == 0 ? seed : derive_seed(seed, {0x726570ULL, static_cast<std::uint64_t>(repeat)});
}

std::string join_command(const std::vector<std::string>& args)
{
    std::string s;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i)
            s += ' ';
        s += args[i];
    }
    return s;
}

// Writes to the path if given, else to `out`.
void emit(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty())
        out << text;
    else
        write_text(path, text);
}

struct CurveResult {
    BiasCurve mean_curve;
    RMSEReport report;
};

// Runs one curve per repeat, then averages the estimates across repeats for
// the emitted curve. RMSEs are per repeat.
CurveResult run_curves(const std::string& label, int repeats, std::span<const int> ns, const TruthOracle& truth,
                       const std::function<CurveMethod(int repeat)>& method_for)
{
    std::vector<BiasCurve> curves;
    auto report = rmse_report(label, repeats, [&](int r) {
        curves.push_back(bias_curve(method_for(r), ns, truth));
        return curves.back();
    });
    CurveResult out;
    out.report = std::move(report);
    out.mean_curve = curves.front();
    for (std::size_t i = 0; i < out.mean_curve.rows.size(); ++i) {
        double s = 0.0;
        for (const auto& c : curves)
            s += c.rows[i].estimate;
        auto& row = out.mean_curve.rows[i];
        row.estimate = s / static_cast<double>(curves.size());
        row.error = row.estimate - row.truth;
    }
    return out;
}

void emit_curve(const CurveResult& res, const RunMetadata& meta, const std::string& curve_path,
                const std::string& report_path, std::ostream& out)
{
    std::ostringstream csv;
    write_bias_curve_csv(csv, res.mean_curve, meta);
    emit(curve_path, csv.str(), out);
    const std::string json = dump_json(to_json(res.report, meta));
    if (!report_path.empty())
        write_text(report_path, json);
    else if (!curve_path.empty())
        out << json;
    if (!curve_path.empty() || !report_path.empty())
        out << fmt::format("{}: rmse {:.6g} over {} repeat(s)\n", res.report.label, res.report.rmse,
                           res.report.repeats);
}

// ---- calibrate ------------------------------------------------------------

struct CalibrateArgs {
    std::vector<std::string> dists;
    std::string mode = "designed";
    NRange range;
    int sets = -1;
    int gaussian_sets = 0;
    int repeats = 1;
    double threshold = kDefaultThreshold;
    long max_attempts = kDefaultMaxAttemptsPerSet;
    std::string tie_break = "uniform";
    std::string label;
    std::string out_path;
};

void summarise(const SetPool& pool, std::ostream& out)
{
    for (int n : pool.sample_sizes()) {
        const auto sets = pool.sets_at(n);
        double worst = 0.0;
        for (const auto* s : sets)
            worst = std::max(worst, s->residual);
        out << fmt::format("n={} sets={} max_residual={:.3e}\n", n, sets.size(), worst);
    }
    if (pool.attempts > 0)
        out << fmt::format("attempts={} qualified={} acceptance_rate={:.4f}\n", pool.attempts, pool.qualified,
                           pool.acceptance_rate());
}

SetPool calibrate_one(const CalibrateArgs& a, const std::vector<DistributionSpec>& dists, int n, std::uint64_t seed)
{
    BarSearchOptions opt;
    opt.threshold = a.threshold;
    opt.max_attempts_per_set = a.max_attempts;
    opt.tie_break = parse_tie_break(a.tie_break);
    if (a.mode == "designed") {
        SetPool pool = designed_pool(dists.front(), n, a.sets < 0 ? 1 : a.sets, seed);
        for (auto& s : pool.sets)
            s.threshold = a.threshold;
        return pool;
    }
    if (a.mode == "bar")
        return bar_search(dists.front(), n, a.sets < 0 ? 10 : a.sets, seed, opt);
    // multi
    std::vector<SetPool> parts;
    try {
        parts.push_back(multi_dist_pool(dists, a.sets < 0 ? 3 : a.sets, n, seed, opt));
        if (a.gaussian_sets > 0)
            parts.push_back(bar_search(DistributionSpec::gaussian(), n, a.gaussian_sets, seed, opt));
    } catch (const SearchExhausted& e) {
        parts.push_back(e.partial());
        throw SearchExhausted(e.what(), combine(parts, ""));
    }
    return combine(parts, "");
}

std::string default_label(const CalibrateArgs& a, const std::vector<DistributionSpec>& dists)
{
    if (!a.label.empty())
        return a.label;
    if (a.mode == "designed")
        return "Designed";
    if (a.mode == "multi")
        return a.gaussian_sets > 0 ? "BAR-5D" : "BAR-multi";
    switch (dists.front().family()) {
    case Family::Gaussian: return "BAR-G";
    case Family::Exponential: return "BAR-E";
    default: return "BAR";
    }
}

int cmd_calibrate(const CalibrateArgs& a, std::uint64_t seed, const RunMetadata& meta, std::ostream& out,
                  std::ostream& err)
{
    if (a.mode != "designed" && a.mode != "bar" && a.mode != "multi")
        throw UsageError(fmt::format("--mode must be designed, bar or multi, got '{}'", a.mode));
    std::vector<DistributionSpec> dists;
    for (const auto& t : a.dists)
        dists.push_back(parse_dist(t));
    if (a.mode == "multi" && dists.empty())
        dists = five_family_specs();
    if (dists.empty())
        throw UsageError("--dist is required");
    if (a.mode != "multi" && dists.size() != 1)
        throw UsageError(fmt::format("--mode {} takes exactly one --dist", a.mode));
    if (a.repeats < 1)
        throw UsageError("--repeats must be >= 1");

    SetPool pool;
    pool.label = default_label(a, dists);
    int code = kOk;
    try {
        for (int r = 0; r < a.repeats; ++r) {
            for (int n : a.range.values()) {
                SetPool part = calibrate_one(a, dists, n, repeat_seed(seed, r));
                for (auto& s : part.sets)
                    s.repeat = r;
                pool.sets.insert(pool.sets.end(), part.sets.begin(), part.sets.end());
                pool.attempts += part.attempts;
                pool.qualified += part.qualified;
            }
        }
    } catch (const SearchExhausted& e) {
        const auto& part = e.partial();
        pool.sets.insert(pool.sets.end(), part.sets.begin(), part.sets.end());
        pool.attempts += part.attempts;
        pool.qualified += part.qualified;
        err << "search exhausted: " << e.what() << "\n";
        code = kSearchExhausted;
    }
    if (!a.out_path.empty())
        write_pool(a.out_path, pool, meta);
    summarise(pool, out);
    return code;
}

// ---- estimate -------------------------------------------------------------

struct EstimateArgs {
    std::string quantity = "bias";
    std::string estimator;
    std::string dist;
    std::string pool_path;
    NRange range;
    int repeats = 0;
    std::string label;
    std::string curve_path;
    std::string report_path;
};

int cmd_estimate(const EstimateArgs& a, const RunMetadata& meta, std::ostream& out)
{
    const Quantity q = parse_quantity(a.quantity);
    const EstimatorSpec est = parse_estimator(a.estimator);
    const SetPool pool = read_pool(a.pool_path);
    if (pool.sets.empty())
        throw DimensionError(fmt::format("pool '{}' holds no sets", a.pool_path));

    std::optional<DistributionSpec> dist;
    if (!a.dist.empty()) {
        dist = parse_dist(a.dist);
    } else {
        dist = pool.sets.front().dist;
        for (const auto& s : pool.sets)
            if (!(s.dist == *dist))
                throw UsageError("pool spans several distributions; give --dist");
    }

    int file_repeats = 0;
    for (const auto& s : pool.sets)
        file_repeats = std::max(file_repeats, s.repeat + 1);
    const int repeats = a.repeats > 0 ? a.repeats : file_repeats;
    if (repeats > file_repeats)
        throw DimensionError(
            fmt::format("--repeats {} requested but '{}' holds {} repeat(s)", repeats, a.pool_path, file_repeats));

    std::vector<SetPool> by_repeat(static_cast<std::size_t>(repeats));
    for (const auto& s : pool.sets)
        if (s.repeat < repeats)
            by_repeat[static_cast<std::size_t>(s.repeat)].sets.push_back(s);

    const auto ns = a.range.values();
    for (int r = 0; r < repeats; ++r)
        for (int n : ns)
            if (by_repeat[static_cast<std::size_t>(r)].sets_at(n).empty())
                throw DimensionError(fmt::format("pool '{}' has no sets at n = {} (repeat {})", a.pool_path, n, r));

    const auto truth = truth_oracle(*dist, est, q);
    const std::string label = a.label.empty() ? pool.label : a.label;
    const auto res = run_curves(label, repeats, ns, truth, [&](int r) {
        const SetPool& p = by_repeat[static_cast<std::size_t>(r)];
        return pool_method([&p](int) { return p; }, *dist, est, q);
    });
    emit_curve(res, meta, a.curve_path, a.report_path, out);
    return kOk;
}

// ---- mc -------------------------------------------------------------------

struct McArgs {
    std::string quantity = "bias";
    std::string estimator;
    std::string dist;
    int samples = 120;
    NRange range;
    int repeats = 1;
    std::string label;
    std::string curve_path;
    std::string report_path;
};

int cmd_mc(const McArgs& a, std::uint64_t seed, const RunMetadata& meta, std::ostream& out)
{
    const Quantity q = parse_quantity(a.quantity);
    const EstimatorSpec est = parse_estimator(a.estimator);
    const DistributionSpec dist = parse_dist(a.dist);
    if (a.samples < 2)
        throw UsageError("--samples must be >= 2");
    if (a.repeats < 1)
        throw UsageError("--repeats must be >= 1");
    const auto ns = a.range.values();
    const auto truth = truth_oracle(dist, est, q);
    const std::string label = a.label.empty() ? fmt::format("Random {}", a.samples) : a.label;
    const auto res = run_curves(label, a.repeats, ns, truth,
                                [&](int r) { return mc_method(dist, est, q, a.samples, repeat_seed(seed, r)); });
    emit_curve(res, meta, a.curve_path, a.report_path, out);
    return kOk;
}

// ---- truth ----------------------------------------------------------------

struct TruthArgs {
    std::string dist;
    std::string quantity;
    NRange range;
    std::string out_path;
};

int cmd_truth(const TruthArgs& a, const RunMetadata& meta, std::ostream& out)
{
    const DistributionSpec dist = parse_dist(a.dist);
    std::function<double(int)> f;
    if (a.quantity == "sd-bias")
        f = truth_oracle(dist, EstimatorSpec::sample_sd(), Quantity::Bias);
    else if (a.quantity == "sd-variance")
        f = truth_oracle(dist, EstimatorSpec::sample_sd(), Quantity::Variance);
    else if (a.quantity == "sd-factor")
        f = [](int n) { return gaussian_sd_expectation_factor(n); };
    else if (a.quantity == "median")
        f = truth_oracle(dist, EstimatorSpec::median(), Quantity::Bias);
    else if (a.quantity == "median-quadrature")
        f = [&dist](int n) { return expected_median_quadrature(dist, n); };
    else if (a.quantity == "mean")
        f = truth_oracle(dist, EstimatorSpec::mean(), Quantity::Bias);
    else
        throw UsageError(fmt::format("unknown --quantity '{}'", a.quantity));

    std::ostringstream csv;
    write_csv_metadata(csv, meta);
    csv << "n,value\n";
    for (int n : a.range.values())
        csv << n << ',' << format_double(f(n)) << '\n';
    emit(a.out_path, csv.str(), out);
    return kOk;
}

// ---- compare --------------------------------------------------------------

struct CompareArgs {
    std::vector<std::string> inputs;
    std::string out_path;
};

int cmd_compare(const CompareArgs& a, const RunMetadata& meta, std::ostream& out)
{
    std::ostringstream csv;
    write_csv_metadata(csv, meta);
    csv << "method,rmse,repeats\n";
    for (const auto& in : a.inputs) {
        const auto eq = in.find('=');
        std::string label = eq == std::string::npos ? std::string{} : in.substr(0, eq);
        const std::string path = eq == std::string::npos ? in : in.substr(eq + 1);
        double value = 0.0;
        int repeats = 1;
        if (path.size() >= 5 && path.ends_with(".json")) {
            const auto rep = rmse_report_from_json(parse_json(read_text(path)));
            value = rep.rmse;
            repeats = rep.repeats;
            if (label.empty())
                label = rep.label;
        } else {
            std::istringstream is(read_text(path));
            value = rmse(read_bias_curve_csv(is));
            if (label.empty())
                label = path;
        }
        if (label.find(',') != std::string::npos)
            throw UsageError(fmt::format("label '{}' contains a comma", label));
        csv << label << ',' << format_double(value) << ',' << repeats << '\n';
    }
    emit(a.out_path, csv.str(), out);
    return kOk;
}

// ---- sse ------------------------------------------------------------------

struct SseArgs {
    std::string dist;
    std::string stats = "mean,median";
    NRange range;
    int reps = 100000;
    std::string out_path;
};

int cmd_sse(const SseArgs& a, std::uint64_t seed, const RunMetadata& meta, std::ostream& out)
{
    const DistributionSpec dist = parse_dist(a.dist);
    std::vector<EstimatorSpec> stats;
    std::vector<std::string> names;
    {
        std::stringstream ss(a.stats);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            stats.push_back(parse_estimator(tok));
            names.push_back(stats.back().token());
        }
    }
    if (stats.empty())
        throw UsageError("--stats is empty");
    if (a.reps < 2)
        throw UsageError("--reps must be >= 2");

    std::vector<SSERow> rows;
    for (int n : a.range.values()) {
        const auto report = scaled_standard_error(replicate_statistics(dist, stats, n, a.reps, seed), names);
        for (const auto& c : report.columns)
            rows.push_back({n, c.stat, c.se, c.sse});
    }
    std::ostringstream csv;
    write_sse_csv(csv, rows, meta);
    emit(a.out_path, csv.str(), out);
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Calibrated low-discrepancy sequences for finite-sample bias and variance", "seqcal"};
    app.require_subcommand(1);
    std::uint64_t seed = kDefaultSeed;
    app.add_option("--seed", seed, "Master seed")->capture_default_str();

    CalibrateArgs cal;
    auto* c_cal = app.add_subcommand("calibrate", "Calibrate sequence sets and write a pool file");
    c_cal->add_option("--dist", cal.dists, "Target distribution token (repeat for --mode multi)");
    c_cal->add_option("--mode", cal.mode, "designed | bar | multi")->capture_default_str();
    add_range(c_cal, cal.range);
    c_cal->add_option("--sets", cal.sets, "Sets per n (per distribution for multi)");
    c_cal->add_option("--gaussian-sets", cal.gaussian_sets, "multi: extra Gaussian BAR sets per n");
    c_cal->add_option("--repeats", cal.repeats, "Independent pools, tagged by repeat index")->capture_default_str();
    c_cal->add_option("--threshold", cal.threshold, "Qualification residual")->capture_default_str();
    c_cal->add_option("--max-attempts", cal.max_attempts, "BAR attempts allowed per requested set")
        ->capture_default_str();
    c_cal->add_option("--tie-break", cal.tie_break, "BAR rule among exact solutions: uniform | baseline | active")
        ->check(CLI::IsMember({"uniform", "baseline", "active"}))
        ->capture_default_str();
    c_cal->add_option("--label", cal.label, "Pool label");
    c_cal->add_option("--out", cal.out_path, "Pool JSON path");
    c_cal->add_option("--seed", seed, "Master seed");

    EstimateArgs est;
    auto* c_est = app.add_subcommand("estimate", "Bias or variance curves from a pool file");
    c_est->add_option("--quantity", est.quantity, "bias | variance")->capture_default_str();
    c_est->add_option("--estimator", est.estimator, "mean | sd | median | u2..u4 | m2..m4")->required();
    c_est->add_option("--dist", est.dist, "Distribution the sequences are evaluated under");
    c_est->add_option("--pool", est.pool_path, "Pool JSON from calibrate")->required();
    add_range(c_est, est.range);
    c_est->add_option("--repeats", est.repeats, "Repeats to use (default: all in the file)");
    c_est->add_option("--label", est.label, "Report label (default: pool label)");
    c_est->add_option("--out", est.curve_path, "Curve CSV path");
    c_est->add_option("--report", est.report_path, "RMSE report JSON path");

    TruthArgs tr;
    auto* c_tr = app.add_subcommand("truth", "Exact reference curves");
    c_tr->add_option("--dist", tr.dist, "Distribution token")->required();
    c_tr->add_option("--quantity", tr.quantity, "sd-bias | sd-variance | sd-factor | median | median-quadrature | mean")
        ->required();
    add_range(c_tr, tr.range, 2);
    c_tr->add_option("--out", tr.out_path, "CSV path");

    McArgs mc;
    auto* c_mc = app.add_subcommand("mc", "Plain Monte Carlo baseline curves");
    c_mc->add_option("--quantity", mc.quantity, "bias | variance")->capture_default_str();
    c_mc->add_option("--estimator", mc.estimator, "Estimator token")->required();
    c_mc->add_option("--dist", mc.dist, "Distribution token")->required();
    c_mc->add_option("--samples", mc.samples, "Samples per n")->capture_default_str();
    add_range(c_mc, mc.range);
    c_mc->add_option("--repeats", mc.repeats, "Independent repeats")->capture_default_str();
    c_mc->add_option("--label", mc.label, "Report label");
    c_mc->add_option("--out", mc.curve_path, "Curve CSV path");
    c_mc->add_option("--report", mc.report_path, "RMSE report JSON path");
    c_mc->add_option("--seed", seed, "Master seed");

    CompareArgs cmp;
    auto* c_cmp = app.add_subcommand("compare", "RMSE table from reports and curves");
    c_cmp->add_option("--input", cmp.inputs, "[label=]path to an RMSE JSON or curve CSV")->required();
    c_cmp->add_option("--out", cmp.out_path, "CSV path");

    SseArgs sse;
    auto* c_sse = app.add_subcommand("sse", "Standard errors and scaled standard errors");
    c_sse->add_option("--dist", sse.dist, "Distribution token")->required();
    c_sse->add_option("--stats", sse.stats, "Comma-separated estimators; the first is the reference")
        ->capture_default_str();
    add_range(c_sse, sse.range);
    c_sse->add_option("--reps", sse.reps, "Replicate samples per n")->capture_default_str();
    c_sse->add_option("--out", sse.out_path, "CSV path");
    c_sse->add_option("--seed", seed, "Master seed");

    try {
        std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
        std::reverse(rev.begin(), rev.end());
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    RunMetadata meta;
    meta.command = join_command(args);
    meta.seed = seed;

    try {
        if (c_cal->parsed())
            return cmd_calibrate(cal, seed, meta, out, err);
        if (c_est->parsed())
            return cmd_estimate(est, meta, out);
        if (c_tr->parsed())
            return cmd_truth(tr, meta, out);
        if (c_mc->parsed())
            return cmd_mc(mc, seed, meta, out);
        if (c_cmp->parsed())
            return cmd_compare(cmp, meta, out);
        if (c_sse->parsed())
            return cmd_sse(sse, seed, meta, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kUsage;
    } catch (const SearchExhausted& e) {
        err << "search exhausted: " << e.what() << "\n";
        return kSearchExhausted;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kDomain;
    } catch (const UnsupportedError& e) {
        err << "error: " << e.what() << "\n";
        return kDomain;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << "\n";
        return kDomain;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ParameterError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}

} // namespace seqcal::cli
