#include "fanet/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fanet/errors.hpp"
#include "fanet/kv.hpp"

namespace fanet {

void MetricsAccumulator::add(double truth, double predicted) {
  const double err = predicted - truth;
  sq_sum_ += err * err;
  abs_sum_ += std::fabs(err);
  ++n_;
  if (std::fabs(truth) >= kMapeEps) {
    ape_sum_ += std::fabs(err / truth);
    ++kept_;
  }
}

MetricValues MetricsAccumulator::finalize() const {
  MetricValues v;
  v.n = n_;
  if (n_ == 0) return v;
  v.mse = sq_sum_ / static_cast<double>(n_);
  v.mae = abs_sum_ / static_cast<double>(n_);
  v.rmse = std::sqrt(v.mse);
  v.mape_skipped = n_ - kept_;
  if (kept_ > 0) {
    v.mape = 100.0 * ape_sum_ / static_cast<double>(kept_);
    v.mape_defined = true;
  }
  return v;
}

std::vector<std::size_t> horizon_report_offsets(std::size_t horizon) {
  std::vector<std::size_t> out;
  for (std::size_t step : {1, 7, 13, 19, 25, 31, 37, 43}) {
    if (step <= horizon) out.push_back(step);
  }
  return out;
}

namespace {

void append_values(std::vector<std::pair<std::string, std::string>>& kv,
                   const std::string& prefix, const MetricValues& v) {
  kv.emplace_back(prefix + ".mse", kv::format_double(v.mse));
  kv.emplace_back(prefix + ".mae", kv::format_double(v.mae));
  kv.emplace_back(prefix + ".rmse", kv::format_double(v.rmse));
  kv.emplace_back(prefix + ".mape", v.mape_defined ? kv::format_double(v.mape) : "undefined");
  kv.emplace_back(prefix + ".n", std::to_string(v.n));
  kv.emplace_back(prefix + ".mape_skipped", std::to_string(v.mape_skipped));
}

// Shared scoring loop: predict(window, out[f * H + t]) fills the normalized
// forecast for every endogenous row; only target rows are scored.
template <class PredictFn>
MetricsReport score_windows(const ModelConfig& cfg, const WindowSet& windows,
                            const Normalizer& norm, const std::string& fingerprint,
                            PredictFn&& predict) {
  if (windows.size() == 0) throw DataError("metrics: empty window set");
  cfg.validate();
  const auto& targets = cfg.target_indices;
  const std::size_t h = cfg.horizon;

  MetricsReport r;
  r.fingerprint = fingerprint;
  r.horizon_offsets = horizon_report_offsets(h);
  std::vector<std::size_t> horizon_bucket(h, static_cast<std::size_t>(-1));
  for (std::size_t b = 0; b < r.horizon_offsets.size(); ++b) {
    horizon_bucket[r.horizon_offsets[b] - 1] = b;
  }

  MetricsAccumulator aggregate;
  std::vector<MetricsAccumulator> per_gauge(targets.size());
  std::vector<MetricsAccumulator> per_horizon(r.horizon_offsets.size());

  std::vector<double> pred(cfg.n_endo * h);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Window w = windows.materialize(i);
    predict(w, pred);
    for (std::size_t g = 0; g < targets.size(); ++g) {
      const std::size_t f = targets[g];
      const std::size_t ch = windows.spec.endo_channels.at(f);
      for (std::size_t t = 0; t < h; ++t) {
        const double truth = norm.invert(ch, w.y.at(f, t));
        const double predicted = norm.invert(ch, pred[f * h + t]);
        aggregate.add(truth, predicted);
        per_gauge[g].add(truth, predicted);
        if (horizon_bucket[t] != static_cast<std::size_t>(-1)) {
          per_horizon[horizon_bucket[t]].add(truth, predicted);
        }
      }
    }
  }

  r.aggregate = aggregate.finalize();
  for (std::size_t g = 0; g < targets.size(); ++g) {
    const std::size_t ch = windows.spec.endo_channels.at(targets[g]);
    r.gauge_names.push_back(Dataset::channel_names()[ch]);
    r.per_gauge.push_back(per_gauge[g].finalize());
    r.cumulative_abs_error.push_back(per_gauge[g].total_abs_error());
  }
  for (const auto& acc : per_horizon) r.per_horizon.push_back(acc.finalize());
  return r;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> metrics_to_kv(const MetricsReport& r) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("fingerprint", r.fingerprint);
  append_values(kv, "aggregate", r.aggregate);
  for (std::size_t g = 0; g < r.gauge_names.size(); ++g) {
    const std::string prefix = "gauge." + r.gauge_names[g];
    append_values(kv, prefix, r.per_gauge[g]);
    kv.emplace_back(prefix + ".cumulative_abs_error",
                    kv::format_double(r.cumulative_abs_error[g]));
  }
  for (std::size_t i = 0; i < r.horizon_offsets.size(); ++i) {
    append_values(kv, "horizon." + std::to_string(r.horizon_offsets[i]), r.per_horizon[i]);
  }
  return kv;
}

MetricsReport evaluate_model(const ModelConfig& cfg, const ModelParams& params,
                             const WindowSet& windows, const Normalizer& norm,
                             const std::string& fingerprint) {
  const DbfmBases bases = DbfmBases::make(cfg.lookback);
  return score_windows(cfg, windows, norm, fingerprint,
                       [&](const Window& w, std::vector<double>& out) {
                         Tape tape(false);
                         const auto fwd = forward(tape, w.x, w.z, params, cfg, bases);
                         out = fwd.prediction.values();
                       });
}

MetricsReport persistence_baseline(const ModelConfig& cfg, const WindowSet& windows,
                                   const Normalizer& norm,
                                   const std::string& fingerprint) {
  const std::size_t l = cfg.lookback;
  const std::size_t h = cfg.horizon;
  return score_windows(cfg, windows, norm, fingerprint,
                       [&, l, h](const Window& w, std::vector<double>& out) {
                         for (std::size_t f = 0; f < cfg.n_endo; ++f) {
                           const double held = w.x.at(l - 1, f);
                           for (std::size_t t = 0; t < h; ++t) out[f * h + t] = held;
                         }
                       });
}

Tensor average_cross_attention(const ModelConfig& cfg, const ModelParams& params,
                               const WindowSet& windows) {
  if (windows.size() == 0) throw DataError("metrics: empty window set");
  const DbfmBases bases = DbfmBases::make(cfg.lookback);
  Tensor sum = Tensor::zeros({cfg.n_endo, cfg.n_exo});
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Window w = windows.materialize(i);
    Tape tape(false);
    const auto fwd = forward(tape, w.x, w.z, params, cfg, bases);
    for (std::size_t r = 0; r < cfg.n_endo; ++r) {
      for (std::size_t c = 0; c < cfg.n_exo; ++c) {
        sum.at(r, c) += fwd.cross_attention.at(r, c);
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(windows.size());
  for (std::size_t r = 0; r < cfg.n_endo; ++r) {
    for (std::size_t c = 0; c < cfg.n_exo; ++c) sum.at(r, c) *= inv;
  }
  return sum;
}

void write_predictions_csv(const std::string& path, const ModelConfig& cfg,
                           const ModelParams& params, const WindowSet& windows,
                           const Normalizer& norm, std::size_t stride) {
  if (stride == 0) stride = 1;
  std::ofstream out(path);
  if (!out) throw DataError("predictions: cannot write '" + path + "'");
  out << "window_index,gauge,step,measured,predicted\n";

  const DbfmBases bases = DbfmBases::make(cfg.lookback);
  char buf[64];
  for (std::size_t i = 0; i < windows.size(); i += stride) {
    const Window w = windows.materialize(i);
    Tape tape(false);
    const auto fwd = forward(tape, w.x, w.z, params, cfg, bases);
    for (std::size_t g = 0; g < cfg.target_indices.size(); ++g) {
      const std::size_t f = cfg.target_indices[g];
      const std::size_t ch = windows.spec.endo_channels.at(f);
      for (std::size_t t = 0; t < cfg.horizon; ++t) {
        out << i << ',' << Dataset::channel_names()[ch] << ',' << (t + 1);
        std::snprintf(buf, sizeof(buf), "%.9g", norm.invert(ch, w.y.at(f, t)));
        out << ',' << buf;
        std::snprintf(buf, sizeof(buf), "%.9g", norm.invert(ch, fwd.prediction.at(f, t)));
        out << ',' << buf << '\n';
      }
    }
  }
  if (!out) throw DataError("predictions: write failed for '" + path + "'");
}

}  // namespace fanet
