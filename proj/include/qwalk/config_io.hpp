#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qwalk/walk.hpp"

namespace qwalk {

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// Number in script expression syntax (e.g. -pi/2); `what` names it in errors.
double parse_real(const std::string& what, const std::string& text);

/// A parsed key = value file: walk parameters plus pass-through keys used by
/// the command line (subcommand options, manifest bookkeeping).
struct RunSettings {
    WalkConfig config;
    std::map<std::string, std::string> extras;
};

/// One `key = value` per line, '#' comments. Numeric values accept the
/// script expression syntax (e.g. -pi/2). `k = x` sets k1 = -x, k2 = x.
/// Unknown keys are errors.
RunSettings parse_config(std::string_view text, const std::string& source_name = "config");
RunSettings load_config(const std::filesystem::path& path);

/// Applies one key to a config; throws InvalidArgument for unknown keys or bad values.
void set_config_value(WalkConfig& config, const std::string& key, const std::string& value);

/// Every walk parameter in a fixed order, values round-trip exactly.
std::vector<std::pair<std::string, std::string>> config_entries(const WalkConfig& config);

void write_walk_csv(std::ostream& out, const WalkRecord& record);
void write_series_csv(std::ostream& out, const WalkRecord& record);
void write_scan_csv(std::ostream& out, std::span<const ScanPoint> points);
/// `n,P`; rows with P = 0 are skipped.
void write_distribution_csv(std::ostream& out, const Distribution& dist);

}  // namespace qwalk
