#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "fanet/dataset.hpp"
#include "fanet/metrics.hpp"
#include "fanet/model.hpp"
#include "fanet/windows.hpp"

namespace fanet {

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch = 32;
  std::size_t max_epochs = 20;
  std::size_t patience = 3;  // epochs without validation improvement; 0 disables
  double dropout = 0.1;      // overrides the model config during training
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_opt = 1e-8;
  std::uint64_t seed = 42;   // shuffling and dropout streams
  bool normalize = true;

  void validate() const;  // throws ConfigError
};

// Adam moments keyed by parameter name, so the state survives parameter
// reordering and ablation toggles.
struct OptimizerState {
  std::size_t t = 0;
  std::map<std::string, std::vector<double>> m;
  std::map<std::string, std::vector<double>> v;
};

// One bias-corrected Adam update from the gradients accumulated in params.
// Parameters with requires_grad() false are skipped entirely; a missing grad
// buffer counts as zero. Throws NumericError naming the first parameter with
// a non-finite gradient.
void optimizer_step(ModelParams& params, OptimizerState& st, const TrainConfig& cfg);

// Strict-improvement early stopping: an epoch is the new best only if its
// validation loss is strictly lower than every previous one.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  bool observe(double val_loss);  // true when this epoch is a new best
  bool should_stop() const { return patience_ > 0 && wait_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }  // 1-based, 0 before any
  double best_value() const { return best_; }

 private:
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
  std::size_t seen_ = 0;
  std::size_t wait_ = 0;
};

struct TrainResult {
  ModelConfig cfg;                // as trained (dropout applied)
  ModelParams params;             // best-validation snapshot
  std::vector<double> train_loss; // per epoch, normalized units
  std::vector<double> val_loss;
  std::size_t best_epoch = 0;     // 1-based; 0 means the initial weights won
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t epochs_run = 0;
};

// Full training run from fresh initialization (seeded by cfg.seed): shuffled
// mini-batches, per-epoch validation, strict-improvement early stopping, and
// the best-validation snapshot returned. Per-epoch train losses are averaged
// in window-id order, so an lr=0 run reports bit-identical losses each epoch.
TrainResult train_model(const ModelConfig& cfg, const TrainConfig& tcfg,
                        const WindowSet& train_ws, const WindowSet& val_ws);

// Resumes from existing weights updating only the forecast head; every other
// parameter is bit-identical afterwards. The initial weights count as the
// epoch-0 candidate, so the returned snapshot never validates worse than the
// checkpoint itself.
TrainResult fine_tune_head(const ModelConfig& cfg, const ModelParams& start,
                           const TrainConfig& tcfg, const WindowSet& train_ws,
                           const WindowSet& val_ws);

struct AblationRow {
  std::string name;    // e2eca | ta-e2eca | dbfm-e2eca | full
  double val_mse = 0;  // best validation loss, normalized units
  MetricsReport test;
};

// Trains the four architecture variants with identical seeds and splits.
std::vector<AblationRow> run_ablation(const Dataset& ds, const ModelConfig& base,
                                      const TrainConfig& tcfg);

enum class SweepAxis { Layers, ExoCount };

struct SweepRow {
  std::string axis;
  std::size_t value = 0;
  double val_mse = 0;
  MetricsReport test;
};

// Layers axis: 1..4 encoder layers. ExoCount axis: the first k of
// (surge, heave, pitch) wired in as exogenous inputs, k = 1..3.
std::vector<SweepRow> run_sweep(const Dataset& ds, const ModelConfig& base,
                                const TrainConfig& tcfg, SweepAxis axis);

}  // namespace fanet
