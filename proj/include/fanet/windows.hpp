#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

#include "fanet/dataset.hpp"
#include "fanet/model.hpp"
#include "fanet/tensor.hpp"

namespace fanet {

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the last row
  std::size_t size() const { return end - begin; }
};

struct SplitRanges {
  RowRange train, val, test;
};

// Ordered, contiguous, disjoint split with boundaries at floor(N * cumulative
// fraction); the remainder lands in the test range. Throws DataError naming
// the first segment shorter than min_rows.
SplitRanges chrono_split(std::size_t n_rows, std::size_t min_rows,
                         double train_frac = 0.7, double val_frac = 0.1,
                         double test_frac = 0.2);

// Which dataset channels feed the model, in model row order.
struct WindowSpec {
  std::size_t lookback = 48;
  std::size_t horizon = 48;
  std::vector<std::size_t> endo_channels;  // dataset channel ids, length F
  std::vector<std::size_t> exo_channels;   // dataset channel ids, length C

  // Default wiring: first n_endo gauge channels, first n_exo motion channels.
  static WindowSpec for_model(const ModelConfig& cfg);
  void validate() const;
};

struct Window {
  Tensor x;  // [L x F], normalized
  Tensor z;  // [L x C], normalized
  Tensor y;  // [F x H], normalized future of every endogenous channel
  std::size_t start = 0;  // absolute dataset row of the first lookback step
};

// Stride-1 windows over one split range, all sharing a normalized copy of the
// full channel matrix.
struct WindowSet {
  WindowSpec spec;
  std::shared_ptr<const std::vector<double>> data;  // [n_rows x kChannels]
  std::size_t n_rows = 0;
  std::vector<std::size_t> starts;

  std::size_t size() const { return starts.size(); }
  Window materialize(std::size_t i) const;
};

WindowSet make_windows(std::shared_ptr<const std::vector<double>> data,
                       std::size_t n_rows, RowRange range, const WindowSpec& spec);

// Per-channel affine normalization fit on training rows only, with a floor on
// the standard deviation so constant channels stay finite.
struct Normalizer {
  std::array<double, Dataset::kChannels> mean{};
  std::array<double, Dataset::kChannels> stdev{};

  static Normalizer identity();
  static Normalizer fit(const Dataset& ds, RowRange rows);

  double apply(std::size_t ch, double v) const { return (v - mean[ch]) / stdev[ch]; }
  double invert(std::size_t ch, double v) const { return v * stdev[ch] + mean[ch]; }
};

// Split, normalize, window: the standard preparation pipeline.
struct SplitWindows {
  Normalizer norm;
  SplitRanges ranges;
  WindowSet train, val, test;
};

SplitWindows prepare_windows(const Dataset& ds, const WindowSpec& spec, bool normalize);

// Same pipeline with an externally supplied normalizer (e.g. the statistics
// the checkpoint was trained with, applied to a different-condition dataset).
SplitWindows prepare_windows_with(const Dataset& ds, const WindowSpec& spec,
                                  const Normalizer& norm);

// Key=value persistence keyed by channel name, so a checkpoint's statistics
// can travel with it across datasets.
void save_normalizer(const std::string& path, const Normalizer& norm);
Normalizer load_normalizer(const std::string& path);

}  // namespace fanet
