#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "fanet/model.hpp"
#include "fanet/windows.hpp"

namespace fanet {

// Samples with |truth| below this are excluded from MAPE (elevation crosses
// zero constantly, so the relative error is otherwise unbounded); the skip
// count is part of the report.
inline constexpr double kMapeEps = 1e-8;

struct MetricValues {
  double mse = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;        // percent; meaningful only when mape_defined
  bool mape_defined = false;
  std::size_t n = 0;
  std::size_t mape_skipped = 0;
};

class MetricsAccumulator {
 public:
  void add(double truth, double predicted);
  MetricValues finalize() const;  // rmse = sqrt(mse) by construction
  double total_abs_error() const { return abs_sum_; }
  std::size_t count() const { return n_; }

 private:
  double sq_sum_ = 0.0;
  double abs_sum_ = 0.0;
  double ape_sum_ = 0.0;
  std::size_t n_ = 0;
  std::size_t kept_ = 0;
};

struct MetricsReport {
  MetricValues aggregate;
  std::vector<std::string> gauge_names;      // target gauges, dataset naming
  std::vector<MetricValues> per_gauge;
  std::vector<std::size_t> horizon_offsets;  // 1-based forecast steps
  std::vector<MetricValues> per_horizon;
  std::vector<double> cumulative_abs_error;  // per target gauge, physical units
  std::string fingerprint;
};

// Flat key=value rendering (machine-readable report tree). An undefined MAPE
// is emitted as the literal string "undefined".
std::vector<std::pair<std::string, std::string>> metrics_to_kv(const MetricsReport& r);

// Representative forecast steps reported individually (1-based), trimmed to
// the configured horizon.
std::vector<std::size_t> horizon_report_offsets(std::size_t horizon);

// Runs the model over every window and scores target gauges in physical
// units (normalization inverted before accumulation).
MetricsReport evaluate_model(const ModelConfig& cfg, const ModelParams& params,
                             const WindowSet& windows, const Normalizer& norm,
                             const std::string& fingerprint);

// Same scoring with the forecaster that holds each target gauge's last
// observed value across the whole horizon.
MetricsReport persistence_baseline(const ModelConfig& cfg, const WindowSet& windows,
                                   const Normalizer& norm,
                                   const std::string& fingerprint);

// Cross-attention weights averaged over every window: [F x C], still
// row-stochastic because each summand is.
Tensor average_cross_attention(const ModelConfig& cfg, const ModelParams& params,
                               const WindowSet& windows);

// Prediction dump rows: window_index,gauge,step,measured,predicted. Only
// every stride-th window is written to keep files reviewable.
void write_predictions_csv(const std::string& path, const ModelConfig& cfg,
                           const ModelParams& params, const WindowSet& windows,
                           const Normalizer& norm, std::size_t stride);

}  // namespace fanet
