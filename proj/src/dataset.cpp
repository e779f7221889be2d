#include "fanet/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fanet/errors.hpp"
#include "fanet/kv.hpp"

namespace fanet {

const std::array<const char*, Dataset::kChannels>& Dataset::channel_names() {
  static const std::array<const char*, kChannels> names = {
      "wg1", "wg2", "wg3", "wg4", "wg5", "wg6", "wg7", "wg8", "wg9",
      "surge", "heave", "pitch"};
  return names;
}

double Dataset::sample_dt() const {
  if (times.size() < 2) {
    throw DataError("dataset '" + name + "': need at least 2 rows to define a sample step");
  }
  return times[1] - times[0];
}

void Dataset::validate() const {
  if (times.size() < 2) {
    throw DataError("dataset '" + name + "': fewer than 2 rows");
  }
  if (channels.size() != times.size() * kChannels) {
    throw DataError("dataset '" + name + "': channel buffer size does not match row count");
  }
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) {
    throw DataError("dataset '" + name + "': non-increasing time column");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::fabs((times[i] - times[i - 1]) - dt) > 1e-9) {
      throw DataError("dataset '" + name + "': non-uniform time step at row " +
                      std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) {
      throw DataError("dataset '" + name + "': non-finite time at row " + std::to_string(i));
    }
    for (std::size_t c = 0; c < kChannels; ++c) {
      if (!std::isfinite(at(i, c))) {
        throw DataError("dataset '" + name + "': non-finite value at row " +
                        std::to_string(i) + ", column '" + channel_names()[c] + "'");
      }
    }
  }
}

namespace {

std::string expected_header() {
  std::string h = "time";
  for (const char* n : Dataset::channel_names()) {
    h += ',';
    h += n;
  }
  return h;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_field(const std::string& text, const char* column, std::size_t row,
                   const std::string& path) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw DataError("dataset '" + path + "': cannot parse column '" + column +
                    "' at data row " + std::to_string(row) + " ('" + text + "')");
  }
  if (!std::isfinite(v)) {
    throw DataError("dataset '" + path + "': non-finite value in column '" +
                    std::string(column) + "' at data row " + std::to_string(row));
  }
  return v;
}

std::string file_stem(const std::string& path) {
  std::size_t slash = path.find_last_of("/\\");
  std::string base = (slash == std::string::npos) ? path : path.substr(slash + 1);
  std::size_t dot = base.find_last_of('.');
  return (dot == std::string::npos) ? base : base.substr(0, dot);
}

}  // namespace

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("dataset: cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("dataset '" + path + "': empty file");
  }
  const auto header = split_csv_line(line);
  const auto& names = Dataset::channel_names();
  if (header.empty() || header[0] != "time") {
    throw DataError("dataset '" + path + "': missing column 'time' in header");
  }
  for (std::size_t c = 0; c < Dataset::kChannels; ++c) {
    if (header.size() <= c + 1) {
      throw DataError("dataset '" + path + "': missing column '" + names[c] + "' in header");
    }
    if (header[c + 1] != names[c]) {
      throw DataError("dataset '" + path + "': expected column '" + names[c] +
                      "' at position " + std::to_string(c + 2) + ", found '" +
                      header[c + 1] + "' (header must be '" + expected_header() + "')");
    }
  }
  if (header.size() != Dataset::kChannels + 1) {
    throw DataError("dataset '" + path + "': unexpected extra column '" +
                    header[Dataset::kChannels + 1] + "'");
  }

  Dataset ds;
  ds.name = file_stem(path);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != Dataset::kChannels + 1) {
      throw DataError("dataset '" + path + "': data row " + std::to_string(row) +
                      " has " + std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(Dataset::kChannels + 1));
    }
    ds.times.push_back(parse_field(fields[0], "time", row, path));
    for (std::size_t c = 0; c < Dataset::kChannels; ++c) {
      ds.channels.push_back(parse_field(fields[c + 1], names[c], row, path));
    }
    ++row;
  }
  ds.validate();
  return ds;
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("dataset: cannot write '" + path + "'");
  }
  out << expected_header() << '\n';
  char buf[64];
  for (std::size_t i = 0; i < ds.rows(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.9g", ds.times[i]);
    out << buf;
    for (std::size_t c = 0; c < Dataset::kChannels; ++c) {
      std::snprintf(buf, sizeof(buf), "%.9g", ds.at(i, c));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) {
    throw DataError("dataset: write failed for '" + path + "'");
  }
}

void write_metadata(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("metadata: cannot write '" + path + "'");
  }
  for (const auto& [key, value] : entries) {
    out << key << '=' << value << '\n';
  }
  if (!out) {
    throw DataError("metadata: write failed for '" + path + "'");
  }
}

}  // namespace fanet
