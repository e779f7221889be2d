#include "fanet/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fanet/errors.hpp"
#include "fanet/rng.hpp"

namespace fanet {

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("train: lr must be >= 0");
  if (batch == 0) throw ConfigError("train: batch must be positive");
  if (max_epochs == 0) throw ConfigError("train: max_epochs must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("train: dropout must be in [0, 1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train: Adam betas must be in [0, 1)");
  }
  if (!(eps_opt > 0.0)) throw ConfigError("train: eps_opt must be positive");
}

void optimizer_step(ModelParams& params, OptimizerState& st, const TrainConfig& cfg) {
  st.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));

  for (auto& [name, tensor] : params.named()) {
    if (!tensor->requires_grad()) continue;
    const std::size_t n = tensor->size();
    auto& m = st.m[name];
    auto& v = st.v[name];
    if (m.size() != n) m.assign(n, 0.0);
    if (v.size() != n) v.assign(n, 0.0);

    const bool has_grad = tensor->has_grad();
    const std::vector<double>* grad = has_grad ? &tensor->grad() : nullptr;
    double* w = tensor->data();
    for (std::size_t i = 0; i < n; ++i) {
      const double g = has_grad ? (*grad)[i] : 0.0;
      if (!std::isfinite(g)) {
        throw NumericError("optimizer: non-finite gradient in '" + name + "'");
      }
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      w[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps_opt);
    }
  }
}

bool EarlyStopper::observe(double val_loss) {
  ++seen_;
  if (val_loss < best_) {
    best_ = val_loss;
    best_epoch_ = seen_;
    wait_ = 0;
    return true;
  }
  ++wait_;
  return false;
}

namespace {

double validation_loss(const ModelConfig& cfg, const ModelParams& params,
                       const DbfmBases& bases, const WindowSet& val_ws,
                       std::size_t epoch) {
  double sum = 0.0;
  for (std::size_t i = 0; i < val_ws.size(); ++i) {
    const Window w = val_ws.materialize(i);
    Tape tape(false);
    const auto out = forward(tape, w.x, w.z, params, cfg, bases);
    sum += mse_loss(tape, out.prediction, w.y, cfg.target_indices).item();
  }
  const double loss = sum / static_cast<double>(val_ws.size());
  if (!std::isfinite(loss)) {
    throw NumericError("train: non-finite validation loss at epoch " +
                       std::to_string(epoch));
  }
  return loss;
}

TrainResult train_core(ModelConfig cfg, const TrainConfig& tcfg, ModelParams params,
                       const WindowSet& train_ws, const WindowSet& val_ws,
                       bool keep_initial_candidate) {
  cfg.dropout_rate = tcfg.dropout;
  cfg.validate();
  tcfg.validate();
  if (train_ws.size() == 0 || val_ws.size() == 0) {
    throw DataError("train: empty train or validation window set");
  }

  const DbfmBases bases = DbfmBases::make(cfg.lookback);
  const std::size_t n = train_ws.size();

  TrainResult result;
  result.cfg = cfg;
  if (keep_initial_candidate) {
    result.params = params.clone();
    result.best_val = validation_loss(cfg, params, bases, val_ws, 0);
    result.best_epoch = 0;
  }

  OptimizerState opt;
  EarlyStopper stopper(tcfg.patience);
  Rng shuffle_rng = Rng(tcfg.seed).fork("shuffle");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> window_loss(n, 0.0);

  for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);

    for (std::size_t b0 = 0; b0 < n; b0 += tcfg.batch) {
      const std::size_t b1 = std::min(b0 + tcfg.batch, n);
      const std::size_t batch_index = b0 / tcfg.batch;
      params.zero_grad();

      for (std::size_t k = b0; k < b1; ++k) {
        const std::size_t wid = order[k];
        const Window w = train_ws.materialize(wid);
        // The dropout stream is keyed to the window alone, so a zero-lr run
        // reproduces bit-identical losses every epoch.
        Rng drop_rng = Rng(tcfg.seed).fork("dropout-w" + std::to_string(wid));
        Tape tape(true);
        const auto out = forward(tape, w.x, w.z, params, cfg, bases, true, &drop_rng);
        const Tensor loss = mse_loss(tape, out.prediction, w.y, cfg.target_indices);
        const double lv = loss.item();
        if (!std::isfinite(lv)) {
          throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_index));
        }
        window_loss[wid] = lv;
        tape.backward(loss);
      }

      // Average the accumulated per-window gradients over the batch.
      const double inv = 1.0 / static_cast<double>(b1 - b0);
      for (auto& [name, tensor] : params.named()) {
        (void)name;
        if (tensor->requires_grad() && tensor->has_grad()) {
          for (double& g : tensor->grad()) g *= inv;
        }
      }
      optimizer_step(params, opt, tcfg);
    }

    // Sum in window-id order: independent of the shuffle for reproducibility.
    double train_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) train_sum += window_loss[i];
    result.train_loss.push_back(train_sum / static_cast<double>(n));

    const double val = validation_loss(cfg, params, bases, val_ws, epoch);
    result.val_loss.push_back(val);
    result.epochs_run = epoch;

    const bool improved = stopper.observe(val);
    if (improved && val < result.best_val) {
      result.params = params.clone();
      result.best_val = val;
      result.best_epoch = epoch;
    }
    if (stopper.should_stop()) break;
  }

  if (!result.params.embed_matrix.defined()) {
    // No validation improvement was ever recorded (cannot happen with finite
    // losses, but keep the contract: return the last state).
    result.params = params.clone();
    result.best_epoch = result.epochs_run;
  }
  return result;
}

std::string describe(const ModelConfig& cfg, const TrainConfig& tcfg,
                     const std::string& extra) {
  std::string s = "layers=" + std::to_string(cfg.n_layers) +
                  " exo=" + std::to_string(cfg.n_exo) +
                  " width=" + std::to_string(cfg.width) +
                  " seed=" + std::to_string(tcfg.seed);
  if (!extra.empty()) s += " " + extra;
  return s;
}

}  // namespace

TrainResult train_model(const ModelConfig& cfg, const TrainConfig& tcfg,
                        const WindowSet& train_ws, const WindowSet& val_ws) {
  ModelConfig c = cfg;
  c.dropout_rate = tcfg.dropout;
  c.validate();
  ModelParams params = init_params(c);
  return train_core(c, tcfg, std::move(params), train_ws, val_ws, false);
}

TrainResult fine_tune_head(const ModelConfig& cfg, const ModelParams& start,
                           const TrainConfig& tcfg, const WindowSet& train_ws,
                           const WindowSet& val_ws) {
  ModelParams params = start.clone();
  params.set_requires_grad(false);
  if (Tensor* head = params.find("head")) head->set_requires_grad(true);
  if (Tensor* bias = params.find("head_bias")) bias->set_requires_grad(true);
  return train_core(cfg, tcfg, std::move(params), train_ws, val_ws, true);
}

std::vector<AblationRow> run_ablation(const Dataset& ds, const ModelConfig& base,
                                      const TrainConfig& tcfg) {
  const SplitWindows sw = prepare_windows(ds, WindowSpec::for_model(base), tcfg.normalize);

  struct Variant {
    const char* name;
    bool dbfm, ta;
  };
  const Variant variants[] = {{"e2eca", false, false},
                              {"ta-e2eca", false, true},
                              {"dbfm-e2eca", true, false},
                              {"full", true, true}};

  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    ModelConfig cfg = base;
    cfg.enable_dbfm = v.dbfm;
    cfg.enable_ta = v.ta;
    cfg.enable_e2eca = true;
    const TrainResult tr = train_model(cfg, tcfg, sw.train, sw.val);
    AblationRow row;
    row.name = v.name;
    row.val_mse = tr.best_val;
    row.test = evaluate_model(tr.cfg, tr.params, sw.test, sw.norm,
                              describe(tr.cfg, tcfg, "ablation=" + row.name));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> run_sweep(const Dataset& ds, const ModelConfig& base,
                                const TrainConfig& tcfg, SweepAxis axis) {
  std::vector<SweepRow> rows;
  if (axis == SweepAxis::Layers) {
    const SplitWindows sw =
        prepare_windows(ds, WindowSpec::for_model(base), tcfg.normalize);
    for (std::size_t layers : {1, 2, 3, 4}) {
      ModelConfig cfg = base;
      cfg.n_layers = layers;
      const TrainResult tr = train_model(cfg, tcfg, sw.train, sw.val);
      SweepRow row;
      row.axis = "layers";
      row.value = layers;
      row.val_mse = tr.best_val;
      row.test = evaluate_model(tr.cfg, tr.params, sw.test, sw.norm,
                                describe(tr.cfg, tcfg, "sweep=layers value=" +
                                                           std::to_string(layers)));
      rows.push_back(std::move(row));
    }
  } else {
    for (std::size_t k : {1, 2, 3}) {
      ModelConfig cfg = base;
      cfg.n_exo = k;
      const SplitWindows sw =
          prepare_windows(ds, WindowSpec::for_model(cfg), tcfg.normalize);
      const TrainResult tr = train_model(cfg, tcfg, sw.train, sw.val);
      SweepRow row;
      row.axis = "exo_count";
      row.value = k;
      row.val_mse = tr.best_val;
      row.test = evaluate_model(tr.cfg, tr.params, sw.test, sw.norm,
                                describe(tr.cfg, tcfg, "sweep=exo_count value=" +
                                                           std::to_string(k)));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace fanet
