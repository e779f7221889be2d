#pragma once

// Small helpers shared by everything that speaks the key=value dialect:
// checkpoints, run configs, dataset metadata. Parsers throw ConfigError with
// the offending key so messages stay actionable.

#include <cstdint>
#include <string>
#include <vector>

namespace fanet::kv {

std::string format_double(double v);  // shortest round-trip form
std::string format_bool(bool b);
std::string format_index_list(const std::vector<std::size_t>& v);

double parse_double(const std::string& key, const std::string& value);
std::uint64_t parse_u64(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);
std::vector<std::size_t> parse_index_list(const std::string& key,
                                          const std::string& value);

// Splits "a.b=c" lines; '#' starts a comment, blank lines are skipped.
// Returns pairs in file order. Throws ConfigError on lines without '='.
std::vector<std::pair<std::string, std::string>> parse_lines(
    const std::string& text, const std::string& origin);

}  // namespace fanet::kv
