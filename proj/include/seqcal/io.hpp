#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "seqcal/calib.hpp"
#include "seqcal/estimate.hpp"
#include "seqcal/rng.hpp"

namespace seqcal {

#ifndef SEQCAL_VERSION
#define SEQCAL_VERSION "0.0.0"
#endif
inline constexpr std::string_view kVersion = SEQCAL_VERSION;

/// Provenance embedded in every file we write.
struct RunMetadata {
    std::string version{kVersion};
    std::string command;
    std::uint64_t seed = 0;
    std::string generator{kGeneratorId};
};

using Json = nlohmann::ordered_json;

/// Serialises with every floating-point number at 17 significant digits.
/// Keys keep insertion order, so output is byte-stable.
std::string dump_json(const Json& j, int indent = 2);
Json parse_json(std::string_view text);

Json to_json(const RunMetadata& meta);
RunMetadata metadata_from_json(const Json& j);

Json to_json(const SequenceRecipe& r);
SequenceRecipe recipe_from_json(const Json& j);

std::string_view tie_break_name(TieBreak t);
TieBreak parse_tie_break(const std::string& s);

Json to_json(const CalibratedSet& set);
CalibratedSet set_from_json(const Json& j);

Json to_json(const SetPool& pool, const RunMetadata& meta);
SetPool pool_from_json(const Json& j);

void write_pool(const std::filesystem::path& path, const SetPool& pool, const RunMetadata& meta);
SetPool read_pool(const std::filesystem::path& path);

Json to_json(const RMSEReport& report, const RunMetadata& meta);
RMSEReport rmse_report_from_json(const Json& j);

/// `# key=value` header lines followed by the column header.
void write_csv_metadata(std::ostream& os, const RunMetadata& meta);

/// `n,estimate,truth,error`
void write_bias_curve_csv(std::ostream& os, const BiasCurve& curve, const RunMetadata& meta);
/// Skips `#` lines; throws ParseError on malformed rows.
BiasCurve read_bias_curve_csv(std::istream& is);

struct SSERow {
    int n;
    std::string stat;
    double se;
    double sse;
};

/// `n,stat,se,sse`
void write_sse_csv(std::ostream& os, std::span<const SSERow> rows, const RunMetadata& meta);

/// Text of a file, or ParseError if it cannot be opened.
std::string read_text(const std::filesystem::path& path);
/// Writes atomically enough for our purposes: to path directly, throwing on failure.
void write_text(const std::filesystem::path& path, std::string_view text);

/// 17 significant digits.
std::string format_double(double x);

} // namespace seqcal
