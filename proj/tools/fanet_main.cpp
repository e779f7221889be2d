// Command-line front end: simulate a flume record, train and evaluate the
// forecaster, run ablations and sweeps, fine-tune a checkpoint's head. Every
// command reads one flat key=value config, writes its outputs plus the fully
// resolved config into --out, and exits 0 on success, 2 on configuration
// errors, 3 on data errors, 4 on numerical failures.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "fanet/config.hpp"
#include "fanet/dataset.hpp"
#include "fanet/errors.hpp"
#include "fanet/flume.hpp"
#include "fanet/kv.hpp"
#include "fanet/metrics.hpp"
#include "fanet/model.hpp"
#include "fanet/train.hpp"
#include "fanet/windows.hpp"

namespace fs = std::filesystem;
using namespace fanet;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("output: cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("output: write failed for '" + path.string() + "'");
}

fs::path prepare_out_dir(const std::string& out, const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    throw DataError("output: cannot create directory '" + out + "': " + ec.message());
  }
  const fs::path dir(out);
  write_text(dir / "config.resolved", cfg.resolved_text());
  return dir;
}

std::string metrics_text(const std::string& prefix, const MetricsReport& r) {
  std::string text;
  for (const auto& [key, value] : metrics_to_kv(r)) {
    text += prefix + key + "=" + value + "\n";
  }
  return text;
}

std::string loss_history_csv(const TrainResult& tr) {
  std::string csv = "epoch,train_loss,val_loss\n";
  for (std::size_t i = 0; i < tr.train_loss.size(); ++i) {
    csv += std::to_string(i + 1) + "," + kv::format_double(tr.train_loss[i]) + "," +
           kv::format_double(tr.val_loss[i]) + "\n";
  }
  return csv;
}

std::string metric_columns(const MetricValues& v) {
  return kv::format_double(v.mse) + "," + kv::format_double(v.mae) + "," +
         kv::format_double(v.rmse) + "," +
         (v.mape_defined ? kv::format_double(v.mape) : "undefined");
}

void apply_ablation(ModelConfig& cfg, const std::string& name) {
  cfg.enable_e2eca = true;
  if (name == "e2eca") {
    cfg.enable_dbfm = false;
    cfg.enable_ta = false;
  } else if (name == "ta-e2eca") {
    cfg.enable_dbfm = false;
    cfg.enable_ta = true;
  } else if (name == "dbfm-e2eca") {
    cfg.enable_dbfm = true;
    cfg.enable_ta = false;
  } else if (name == "full") {
    cfg.enable_dbfm = true;
    cfg.enable_ta = true;
  } else {
    throw ConfigError("config: unknown ablation '" + name +
                      "' (expected e2eca, ta-e2eca, dbfm-e2eca or full)");
  }
}

std::vector<std::string> endo_names(const ModelConfig& cfg) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < cfg.n_endo; ++i) {
    names.emplace_back(Dataset::channel_names()[i]);
  }
  return names;
}

std::vector<std::string> exo_names(const ModelConfig& cfg) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < cfg.n_exo; ++i) {
    names.emplace_back(Dataset::channel_names()[Dataset::kEndoChannels + i]);
  }
  return names;
}

// ---------------------------------------------------------------------------
// Commands.

void cmd_simulate(const RunConfig& cfg, const fs::path& out) {
  Dataset ds = generate_dataset(cfg.wave, FloatBody{}, MooringLineSpec{}, HydroCoeffs{},
                                cfg.transmission, FlumeLayout{}, cfg.sim);
  ds.name = "dataset";
  write_dataset_csv(ds, (out / "dataset.csv").string());
  write_metadata((out / "dataset.meta").string(),
                 {{"version", kToolVersion},
                  {"rows", std::to_string(ds.rows())},
                  {"columns", std::to_string(Dataset::kChannels + 1)},
                  {"duration", kv::format_double(cfg.sim.duration)},
                  {"dt", kv::format_double(cfg.sim.dt_sample)},
                  {"hs", kv::format_double(cfg.wave.hs)},
                  {"tp", kv::format_double(cfg.wave.tp)},
                  {"depth", kv::format_double(cfg.wave.depth)},
                  {"seed", std::to_string(cfg.seed)}});
  std::cout << "simulate: wrote " << ds.rows() << " rows x "
            << (Dataset::kChannels + 1) << " columns to " << (out / "dataset.csv")
            << "\n";
}

void cmd_train(const RunConfig& cfg, const std::string& dataset_path,
               const std::string& ablation, const fs::path& out) {
  ModelConfig mc = cfg.model;
  if (!ablation.empty()) apply_ablation(mc, ablation);

  const Dataset ds = load_dataset_csv(dataset_path);
  const SplitWindows sw = prepare_windows(ds, WindowSpec::for_model(mc),
                                          cfg.train.normalize);
  const TrainResult tr = train_model(mc, cfg.train, sw.train, sw.val);

  save_checkpoint((out / "checkpoint.fanet").string(), tr.cfg, tr.params);
  save_normalizer((out / "normalizer.kv").string(), sw.norm);
  write_text(out / "loss_history.csv", loss_history_csv(tr));

  const std::string fp = "command=train dataset=" + ds.name +
                         (ablation.empty() ? "" : " ablation=" + ablation) +
                         " seed=" + std::to_string(cfg.seed);
  const MetricsReport rep = evaluate_model(tr.cfg, tr.params, sw.test, sw.norm, fp);

  std::string report = std::string("version=") + kToolVersion + "\n";
  report += "best_epoch=" + std::to_string(tr.best_epoch) + "\n";
  report += "best_val_mse=" + kv::format_double(tr.best_val) + "\n";
  report += "epochs_run=" + std::to_string(tr.epochs_run) + "\n";
  report += metrics_text("model.", rep);
  write_text(out / "report.txt", report);

  std::cout << "train: best validation MSE " << tr.best_val << " at epoch "
            << tr.best_epoch << " (" << tr.epochs_run << " run), test MSE "
            << rep.aggregate.mse << "\n";
}

void cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path,
              const std::string& normalizer_path, const std::string& dataset_path,
              const fs::path& out) {
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  const std::string norm_path =
      normalizer_path.empty()
          ? (fs::path(checkpoint_path).parent_path() / "normalizer.kv").string()
          : normalizer_path;
  const Normalizer norm = load_normalizer(norm_path);
  const Dataset ds = load_dataset_csv(dataset_path);
  const SplitWindows sw = prepare_windows_with(ds, WindowSpec::for_model(ck.cfg), norm);

  const std::string fp = "command=eval dataset=" + ds.name +
                         " seed=" + std::to_string(cfg.seed);
  const MetricsReport model_rep =
      evaluate_model(ck.cfg, ck.params, sw.test, sw.norm, fp);
  const MetricsReport pers_rep =
      persistence_baseline(ck.cfg, sw.test, sw.norm, fp + " baseline=persistence");

  std::string report = std::string("version=") + kToolVersion + "\n";
  report += metrics_text("model.", model_rep);
  report += metrics_text("persistence.", pers_rep);
  write_text(out / "report.txt", report);

  const std::size_t stride = std::max<std::size_t>(1, sw.test.size() / 64);
  write_predictions_csv((out / "predictions.csv").string(), ck.cfg, ck.params,
                        sw.test, sw.norm, stride);

  const Tensor att = average_cross_attention(ck.cfg, ck.params, sw.test);
  write_attention_csv((out / "attention_heatmap.csv").string(), att,
                      endo_names(ck.cfg), exo_names(ck.cfg));

  std::cout << "eval: model test MSE " << model_rep.aggregate.mse
            << ", persistence " << pers_rep.aggregate.mse << "\n";
}

void cmd_ablate(const RunConfig& cfg, const std::string& dataset_path,
                const fs::path& out) {
  const Dataset ds = load_dataset_csv(dataset_path);
  const auto rows = run_ablation(ds, cfg.model, cfg.train);

  std::string csv = "config,val_mse,mse,mae,rmse,mape\n";
  for (const auto& row : rows) {
    csv += row.name + "," + kv::format_double(row.val_mse) + "," +
           metric_columns(row.test.aggregate) + "\n";
    write_text(out / ("report_" + row.name + ".txt"),
               metrics_text("model.", row.test));
  }
  write_text(out / "ablation.csv", csv);
  std::cout << "ablate: wrote " << rows.size() << " configurations to "
            << (out / "ablation.csv") << "\n";
}

void cmd_sweep(const RunConfig& cfg, const std::string& dataset_path,
               const std::string& axis, const fs::path& out) {
  SweepAxis sweep_axis;
  if (axis == "layers") {
    sweep_axis = SweepAxis::Layers;
  } else if (axis == "exo") {
    sweep_axis = SweepAxis::ExoCount;
  } else {
    throw ConfigError("config: unknown sweep axis '" + axis +
                      "' (expected layers or exo)");
  }

  const Dataset ds = load_dataset_csv(dataset_path);
  const auto rows = run_sweep(ds, cfg.model, cfg.train, sweep_axis);

  std::string csv = "axis,value,val_mse,mse,mae,rmse,mape\n";
  for (const auto& row : rows) {
    csv += row.axis + "," + std::to_string(row.value) + "," +
           kv::format_double(row.val_mse) + "," + metric_columns(row.test.aggregate) +
           "\n";
    write_text(out / ("report_" + row.axis + "_" + std::to_string(row.value) + ".txt"),
               metrics_text("model.", row.test));
  }
  write_text(out / "sweep.csv", csv);
  std::cout << "sweep: wrote " << rows.size() << " settings to " << (out / "sweep.csv")
            << "\n";
}

void cmd_finetune(const RunConfig& cfg, const std::string& checkpoint_path,
                  const std::string& normalizer_path, const std::string& dataset_path,
                  const fs::path& out) {
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  const std::string norm_path =
      normalizer_path.empty()
          ? (fs::path(checkpoint_path).parent_path() / "normalizer.kv").string()
          : normalizer_path;
  const Normalizer norm = load_normalizer(norm_path);
  const Dataset ds = load_dataset_csv(dataset_path);
  const SplitWindows sw = prepare_windows_with(ds, WindowSpec::for_model(ck.cfg), norm);

  const TrainResult tr = fine_tune_head(ck.cfg, ck.params, cfg.train, sw.train, sw.val);

  // Audit the freeze contract parameter by parameter before anything is
  // written: every matrix except the head must be bit-identical.
  std::string audit;
  std::string violated;
  const auto before = ck.params.named();
  const auto after = tr.params.named();
  for (std::size_t i = 0; i < before.size(); ++i) {
    const std::string& name = before[i].first;
    const bool is_head = (name == "head" || name == "head_bias");
    const bool identical = before[i].second->values() == after[i].second->values();
    if (is_head) {
      audit += name + ": trainable, " + (identical ? "unchanged" : "updated") + "\n";
    } else {
      audit += name + ": frozen, " +
               (identical ? "bit-identical" : "CHANGED (contract violation)") + "\n";
      if (!identical && violated.empty()) violated = name;
    }
  }
  audit += violated.empty() ? "freeze_check=pass\n" : "freeze_check=fail\n";
  write_text(out / "freeze_audit.txt", audit);
  if (!violated.empty()) {
    throw NumericError("finetune: frozen parameter '" + violated +
                       "' changed during head fine-tuning");
  }

  save_checkpoint((out / "checkpoint.fanet").string(), tr.cfg, tr.params);
  save_normalizer((out / "normalizer.kv").string(), norm);
  write_text(out / "loss_history.csv", loss_history_csv(tr));

  const std::string fp = "command=finetune dataset=" + ds.name +
                         " seed=" + std::to_string(cfg.seed);
  const MetricsReport rep = evaluate_model(tr.cfg, tr.params, sw.test, sw.norm, fp);
  std::string report = std::string("version=") + kToolVersion + "\n";
  report += "best_epoch=" + std::to_string(tr.best_epoch) + "\n";
  report += "best_val_mse=" + kv::format_double(tr.best_val) + "\n";
  report += metrics_text("model.", rep);
  write_text(out / "report.txt", report);

  std::cout << "finetune: freeze check passed, best validation MSE " << tr.best_val
            << " at epoch " << tr.best_epoch << "\n";
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "key=value run configuration file (defaults apply when omitted)");
  cmd->add_option("--out", args.out_dir, "output directory")->required();
  args.seed_opt = cmd->add_option("--seed", args.seed, "override the config's seed");
}

RunConfig resolve_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = RunConfig::load_file(args.config_path);
  if (args.seed_opt != nullptr && args.seed_opt->count() > 0) cfg.seed = args.seed;
  cfg.fan_out_seed();
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic wave flume and forecast model toolkit"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CommonArgs sim_args, train_args, eval_args, ablate_args, sweep_args, tune_args;
  std::string train_dataset, train_ablation;
  std::string eval_dataset, eval_checkpoint, eval_normalizer;
  std::string ablate_dataset;
  std::string sweep_dataset, sweep_axis = "layers";
  std::string tune_dataset, tune_checkpoint, tune_normalizer;

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic flume dataset");
  add_common(sim, sim_args);

  CLI::App* train = app.add_subcommand("train", "train the forecaster on a dataset");
  add_common(train, train_args);
  train->add_option("--dataset", train_dataset, "dataset CSV")->required();
  train->add_option("--ablation", train_ablation,
                    "architecture variant: e2eca, ta-e2eca, dbfm-e2eca or full");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  add_common(eval, eval_args);
  eval->add_option("--checkpoint", eval_checkpoint, "trained checkpoint")->required();
  eval->add_option("--dataset", eval_dataset, "dataset CSV")->required();
  eval->add_option("--normalizer", eval_normalizer,
                   "channel statistics file (default: next to the checkpoint)");

  CLI::App* ablate = app.add_subcommand("ablate", "train the four architecture variants");
  add_common(ablate, ablate_args);
  ablate->add_option("--dataset", ablate_dataset, "dataset CSV")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "sweep layer count or exogenous inputs");
  add_common(sweep, sweep_args);
  sweep->add_option("--dataset", sweep_dataset, "dataset CSV")->required();
  sweep->add_option("--axis", sweep_axis, "layers | exo");

  CLI::App* tune = app.add_subcommand("finetune", "fine-tune a checkpoint's forecast head");
  add_common(tune, tune_args);
  tune->add_option("--checkpoint", tune_checkpoint, "starting checkpoint")->required();
  tune->add_option("--dataset", tune_dataset, "dataset CSV")->required();
  tune->add_option("--normalizer", tune_normalizer,
                   "channel statistics file (default: next to the checkpoint)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad flags are configuration errors
  }

  try {
    if (sim->parsed()) {
      const RunConfig cfg = resolve_config(sim_args);
      cmd_simulate(cfg, prepare_out_dir(sim_args.out_dir, cfg));
    } else if (train->parsed()) {
      const RunConfig cfg = resolve_config(train_args);
      cmd_train(cfg, train_dataset, train_ablation,
                prepare_out_dir(train_args.out_dir, cfg));
    } else if (eval->parsed()) {
      const RunConfig cfg = resolve_config(eval_args);
      cmd_eval(cfg, eval_checkpoint, eval_normalizer, eval_dataset,
               prepare_out_dir(eval_args.out_dir, cfg));
    } else if (ablate->parsed()) {
      const RunConfig cfg = resolve_config(ablate_args);
      cmd_ablate(cfg, ablate_dataset, prepare_out_dir(ablate_args.out_dir, cfg));
    } else if (sweep->parsed()) {
      const RunConfig cfg = resolve_config(sweep_args);
      cmd_sweep(cfg, sweep_dataset, sweep_axis,
                prepare_out_dir(sweep_args.out_dir, cfg));
    } else if (tune->parsed()) {
      const RunConfig cfg = resolve_config(tune_args);
      cmd_finetune(cfg, tune_checkpoint, tune_normalizer, tune_dataset,
                   prepare_out_dir(tune_args.out_dir, cfg));
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  }
}
