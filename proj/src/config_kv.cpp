#include "fanet/kv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "fanet/errors.hpp"

namespace fanet::kv {

std::string format_double(double v) {
  // %.17g always round-trips an IEEE double; among the precisions that parse
  // back bit-exact, keep the shortest text ("40" beats "4e+01").
  char buf[64];
  std::string best;
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v &&
        (best.empty() || std::strlen(buf) < best.size())) {
      best = buf;
    }
  }
  if (!best.empty()) return best;
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

std::string format_index_list(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || errno == ERANGE ||
      value.find('-') != std::string::npos) {
    throw ConfigError("config: key '" + key + "' expects a non-negative integer, got '" +
                      value + "'");
  }
  return static_cast<std::uint64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: key '" + key + "' expects true/false, got '" + value + "'");
}

std::vector<std::size_t> parse_index_list(const std::string& key,
                                          const std::string& value) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t comma = value.find(',', pos);
    std::string item = value.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (item.empty()) {
      throw ConfigError("config: key '" + key + "' has an empty list item in '" + value + "'");
    }
    out.push_back(static_cast<std::size_t>(parse_u64(key, item)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) {
    throw ConfigError("config: key '" + key + "' expects a comma-separated index list");
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> parse_lines(
    const std::string& text, const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line =
        text.substr(pos, nl == std::string::npos ? nl : nl - pos);
    ++line_no;
    pos = (nl == std::string::npos) ? text.size() + 1 : nl + 1;
    // Trim whitespace from both ends.
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected key=value, got '" + line + "'");
    }
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    std::size_t ke = key.find_last_not_of(" \t");
    key = key.substr(0, ke + 1);
    std::size_t vb = value.find_first_not_of(" \t");
    value = (vb == std::string::npos) ? "" : value.substr(vb);
    out.emplace_back(key, value);
  }
  return out;
}

}  // namespace fanet::kv
