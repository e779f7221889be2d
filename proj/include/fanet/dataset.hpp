#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace fanet {

// One simulated (or measured) flume record: nine gauge elevations followed by
// the three body-motion channels, sampled on a uniform time grid.
struct Dataset {
  static constexpr std::size_t kChannels = 12;
  static constexpr std::size_t kEndoChannels = 9;   // wg1..wg9
  static constexpr std::size_t kExoChannels = 3;    // surge, heave, pitch

  std::vector<double> times;
  std::vector<double> channels;  // row-major [rows x kChannels]
  std::string name;

  static const std::array<const char*, kChannels>& channel_names();

  std::size_t rows() const { return times.size(); }
  double at(std::size_t row, std::size_t ch) const {
    return channels[row * kChannels + ch];
  }
  double& at(std::size_t row, std::size_t ch) {
    return channels[row * kChannels + ch];
  }
  double sample_dt() const;

  // Uniform spacing within 1e-9 and finite values everywhere.
  void validate() const;
};

// Strict CSV exchange: header `time,wg1,...,wg9,surge,heave,pitch`, values
// printed with 9 significant digits. The loader names the first offending
// column or row in its error.
Dataset load_dataset_csv(const std::string& path);
void write_dataset_csv(const Dataset& ds, const std::string& path);

// Companion key=value metadata (same stem as the CSV by convention).
void write_metadata(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace fanet
