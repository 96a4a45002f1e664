#include "seqcal/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "seqcal/errors.hpp"

namespace seqcal {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_scalar(const Json& j) { return !j.is_object() && !j.is_array(); }

void dump_scalar(std::string& out, const Json& j)
{
    if (j.is_number_float())
        out += format_double(j.get<double>());
    else
        out += j.dump();
}

void dump_rec(std::string& out, const Json& j, int indent, int depth)
{
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
    if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            if (!first)
                out += ",\n";
            first = false;
            out += pad;
            out += Json(k).dump();
            out += ": ";
            dump_rec(out, v, indent, depth + 1);
        }
        out += "\n" + close_pad + "}";
    } else if (j.is_array()) {
        // short rows of plain values stay on one line
        const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) {
            return is_scalar(e) || (e.is_array() && std::all_of(e.begin(), e.end(), is_scalar));
        });
        if (j.empty()) {
            out += "[]";
        } else if (flat) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i)
                    out += ", ";
                if (j[i].is_array()) {
                    out += "[";
                    for (std::size_t k = 0; k < j[i].size(); ++k) {
                        if (k)
                            out += ", ";
                        dump_scalar(out, j[i][k]);
                    }
                    out += "]";
                } else {
                    dump_scalar(out, j[i]);
                }
            }
            out += "]";
        } else {
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i)
                    out += ",\n";
                out += pad;
                dump_rec(out, j[i], indent, depth + 1);
            }
            out += "\n" + close_pad + "]";
        }
    } else {
        dump_scalar(out, j);
    }
}

const Json& field(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw ParseError(fmt::format("missing field '{}'", key));
    return j.at(key);
}

template <typename T>
T get(const Json& j, const char* key)
{
    try {
        return field(j, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("field '{}': {}", key, e.what()));
    }
}

std::string orientation_name(Orientation o) { return o == Orientation::Left ? "left" : "right"; }

Orientation parse_orientation(const std::string& s)
{
    if (s == "left")
        return Orientation::Left;
    if (s == "right")
        return Orientation::Right;
    throw ParseError(fmt::format("unknown orientation '{}'", s));
}

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(cell);
    return out;
}

double to_double(const std::string& s)
{
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size())
            throw ParseError(fmt::format("trailing characters in number '{}'", s));
        return v;
    } catch (const std::logic_error&) {
        throw ParseError(fmt::format("not a number: '{}'", s));
    }
}

} // namespace

std::string format_double(double x)
{
    if (!std::isfinite(x))
        throw DomainError(fmt::format("cannot serialise non-finite value {}", x));
    return fmt::format("{:.17g}", x);
}

std::string dump_json(const Json& j, int indent)
{
    std::string out;
    dump_rec(out, j, indent, 0);
    out += "\n";
    return out;
}

Json parse_json(std::string_view text)
{
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what());
    }
}

Json to_json(const RunMetadata& meta)
{
    Json j;
    j["version"] = meta.version;
    j["command"] = meta.command;
    j["seed"] = meta.seed;
    j["generator"] = meta.generator;
    return j;
}

RunMetadata metadata_from_json(const Json& j)
{
    RunMetadata m;
    m.version = get<std::string>(j, "version");
    m.command = get<std::string>(j, "command");
    m.seed = get<std::uint64_t>(j, "seed");
    m.generator = get<std::string>(j, "generator");
    return m;
}

Json to_json(const SequenceRecipe& r)
{
    Json j;
    j["kind"] = r.kind_name();
    j["n"] = r.n;
    std::visit(overloaded{
                   [](const recipe::Arithmetic&) {},
                   [&](const recipe::BetaQuantile& b) {
                       j["alpha"] = b.alpha;
                       j["beta"] = b.beta;
                   },
                   [&](const recipe::SelfMixture& m) {
                       j["a1"] = m.a1;
                       j["a2"] = m.a2;
                       j["orientation"] = orientation_name(m.orientation);
                   },
                   [&](const recipe::ArithMixture& m) {
                       j["alpha"] = m.alpha;
                       j["orientation"] = orientation_name(m.orientation);
                   },
                   [&](const recipe::PseudoRandom& p) {
                       j["seed"] = p.seed;
                       j["streamIndex"] = p.stream;
                   },
                   [&](const recipe::Complement& c) { j["siblings"] = c.siblings; },
               },
               r.kind);
    if (r.reflected)
        j["reflected"] = true;
    return j;
}

SequenceRecipe recipe_from_json(const Json& j)
{
    SequenceRecipe r;
    const auto kind = get<std::string>(j, "kind");
    r.n = get<int>(j, "n");
    if (kind == "arithmetic")
        r.kind = recipe::Arithmetic{};
    else if (kind == "beta_quantile")
        r.kind = recipe::BetaQuantile{get<double>(j, "alpha"), get<double>(j, "beta")};
    else if (kind == "self_mixture")
        r.kind = recipe::SelfMixture{get<double>(j, "a1"), get<double>(j, "a2"),
                                     parse_orientation(get<std::string>(j, "orientation"))};
    else if (kind == "arith_mixture")
        r.kind = recipe::ArithMixture{get<double>(j, "alpha"), parse_orientation(get<std::string>(j, "orientation"))};
    else if (kind == "pseudo_random")
        r.kind = recipe::PseudoRandom{get<std::uint64_t>(j, "seed"), get<std::uint64_t>(j, "streamIndex")};
    else if (kind == "complement")
        r.kind = recipe::Complement{get<std::vector<int>>(j, "siblings")};
    else
        throw ParseError(fmt::format("unknown recipe kind '{}'", kind));
    r.reflected = j.contains("reflected") && get<bool>(j, "reflected");
    return r;
}

std::string_view tie_break_name(TieBreak t)
{
    switch (t) {
    case TieBreak::ActiveSet:
        return "active";
    case TieBreak::Baseline:
        return "baseline";
    case TieBreak::Uniform:
        return "uniform";
    }
    return "baseline";
}

TieBreak parse_tie_break(const std::string& s)
{
    if (s == "active")
        return TieBreak::ActiveSet;
    if (s == "baseline")
        return TieBreak::Baseline;
    if (s == "uniform")
        return TieBreak::Uniform;
    throw ParseError(fmt::format("unknown tieBreak '{}'", s));
}

Json to_json(const CalibratedSet& set)
{
    Json j;
    j["dist"] = set.dist.token();
    j["n"] = set.n;
    j["kMax"] = set.k_max;
    j["seed"] = set.seed;
    if (set.repeat != 0)
        j["repeat"] = set.repeat;
    j["threshold"] = set.threshold;
    j["residual"] = set.residual;
    j["tieBreak"] = tie_break_name(set.tie_break);
    if (!set.created.empty())
        j["created"] = set.created;
    Json recipes = Json::array();
    for (const auto& r : set.recipes)
        recipes.push_back(to_json(r));
    j["recipes"] = std::move(recipes);
    j["weights"] = std::vector<double>(set.weights.data(), set.weights.data() + set.weights.size());
    Json pairs = Json::array();
    for (const auto& [a, b] : set.pairs)
        pairs.push_back({a, b});
    j["pairs"] = std::move(pairs);
    return j;
}

CalibratedSet set_from_json(const Json& j)
{
    CalibratedSet s;
    try {
        s.dist = DistributionSpec::parse(get<std::string>(j, "dist"));
    } catch (const ParameterError& e) {
        throw ParseError(e.what());
    }
    s.n = get<int>(j, "n");
    s.k_max = get<int>(j, "kMax");
    s.seed = get<std::uint64_t>(j, "seed");
    s.repeat = j.contains("repeat") ? get<int>(j, "repeat") : 0;
    s.threshold = j.contains("threshold") ? get<double>(j, "threshold") : kDefaultThreshold;
    s.residual = get<double>(j, "residual");
    s.tie_break = j.contains("tieBreak") ? parse_tie_break(get<std::string>(j, "tieBreak")) : TieBreak::Baseline;
    s.created = j.contains("created") ? get<std::string>(j, "created") : std::string{};
    for (const auto& r : field(j, "recipes"))
        s.recipes.push_back(recipe_from_json(r));
    const auto w = get<std::vector<double>>(j, "weights");
    if (w.size() != s.recipes.size())
        throw ParseError(fmt::format("set has {} recipes but {} weights", s.recipes.size(), w.size()));
    s.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    if (j.contains("pairs"))
        for (const auto& p : j.at("pairs")) {
            if (!p.is_array() || p.size() != 2)
                throw ParseError("pairs must be two-element arrays");
            s.pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
        }
    for (const auto& r : s.recipes)
        if (r.n != s.n)
            throw ParseError(fmt::format("recipe sample size {} differs from set n = {}", r.n, s.n));
    s.generator = j.contains("generator") ? get<std::string>(j, "generator") : std::string(kGeneratorId);
    return s;
}

Json to_json(const SetPool& pool, const RunMetadata& meta)
{
    Json j;
    j["label"] = pool.label;
    j["generator"] = meta.generator;
    j["metadata"] = to_json(meta);
    j["attempts"] = pool.attempts;
    j["qualified"] = pool.qualified;
    Json sets = Json::array();
    for (const auto& s : pool.sets)
        sets.push_back(to_json(s));
    j["sets"] = std::move(sets);
    return j;
}

SetPool pool_from_json(const Json& j)
{
    SetPool pool;
    pool.label = get<std::string>(j, "label");
    const auto generator = get<std::string>(j, "generator");
    if (generator != kGeneratorId)
        throw ParseError(fmt::format("file was written with generator '{}', this build uses '{}'", generator,
                                     kGeneratorId));
    pool.attempts = j.contains("attempts") ? get<long>(j, "attempts") : 0;
    pool.qualified = j.contains("qualified") ? get<long>(j, "qualified") : 0;
    for (const auto& s : field(j, "sets")) {
        pool.sets.push_back(set_from_json(s));
        pool.sets.back().generator = generator;
    }
    return pool;
}

void write_pool(const std::filesystem::path& path, const SetPool& pool, const RunMetadata& meta)
{
    write_text(path, dump_json(to_json(pool, meta)));
}

SetPool read_pool(const std::filesystem::path& path) { return pool_from_json(parse_json(read_text(path))); }

Json to_json(const RMSEReport& report, const RunMetadata& meta)
{
    Json j;
    j["label"] = report.label;
    j["rmse"] = report.rmse;
    j["repeats"] = report.repeats;
    j["per_repeat"] = report.per_repeat;
    j["metadata"] = to_json(meta);
    return j;
}

RMSEReport rmse_report_from_json(const Json& j)
{
    RMSEReport r;
    r.label = get<std::string>(j, "label");
    r.rmse = get<double>(j, "rmse");
    r.repeats = get<int>(j, "repeats");
    r.per_repeat = get<std::vector<double>>(j, "per_repeat");
    return r;
}

void write_csv_metadata(std::ostream& os, const RunMetadata& meta)
{
    os << "# version=" << meta.version << "\n";
    os << "# command=" << meta.command << "\n";
    os << "# seed=" << meta.seed << "\n";
    os << "# generator=" << meta.generator << "\n";
}

void write_bias_curve_csv(std::ostream& os, const BiasCurve& curve, const RunMetadata& meta)
{
    write_csv_metadata(os, meta);
    os << "n,estimate,truth,error\n";
    for (const auto& r : curve.rows)
        os << r.n << ',' << format_double(r.estimate) << ',' << format_double(r.truth) << ','
           << format_double(r.error) << '\n';
}

BiasCurve read_bias_curve_csv(std::istream& is)
{
    BiasCurve curve;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (!header) {
            if (line != "n,estimate,truth,error")
                throw ParseError(fmt::format("unexpected curve header '{}'", line));
            header = true;
            continue;
        }
        const auto cells = split_csv(line);
        if (cells.size() != 4)
            throw ParseError(fmt::format("curve row has {} cells: '{}'", cells.size(), line));
        curve.rows.push_back(
            {static_cast<int>(to_double(cells[0])), to_double(cells[1]), to_double(cells[2]), to_double(cells[3])});
    }
    if (!header)
        throw ParseError("curve file has no header");
    return curve;
}

void write_sse_csv(std::ostream& os, std::span<const SSERow> rows, const RunMetadata& meta)
{
    write_csv_metadata(os, meta);
    os << "n,stat,se,sse\n";
    for (const auto& r : rows)
        os << r.n << ',' << r.stat << ',' << format_double(r.se) << ',' << format_double(r.sse) << '\n';
}

std::string read_text(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out)
        throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

} // namespace seqcal
