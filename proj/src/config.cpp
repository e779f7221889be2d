#include "fanet/config.hpp"

#include <fstream>
#include <sstream>

#include "fanet/errors.hpp"
#include "fanet/kv.hpp"
#include "fanet/rng.hpp"

namespace fanet {

void RunConfig::fan_out_seed() {
  const Rng root(seed);
  wave.seed = root.stream_seed("wave");
  model.seed = root.stream_seed("model");
  train.seed = root.stream_seed("train");
}

void RunConfig::validate() const {
  wave.validate();
  sim.validate();
  transmission.validate();
  model.validate();
  train.validate();
}

RunConfig RunConfig::from_kv(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  RunConfig c;
  for (const auto& [key, value] : pairs) {
    if (key == "seed") c.seed = kv::parse_u64(key, value);

    else if (key == "wave.hs") c.wave.hs = kv::parse_double(key, value);
    else if (key == "wave.tp") c.wave.tp = kv::parse_double(key, value);
    else if (key == "wave.depth") c.wave.depth = kv::parse_double(key, value);
    else if (key == "wave.gamma") c.wave.gamma = kv::parse_double(key, value);
    else if (key == "wave.components") c.wave.n_components = kv::parse_u64(key, value);
    else if (key == "wave.gravity") c.wave.gravity = kv::parse_double(key, value);
    else if (key == "wave.freq_lo_factor") c.wave.freq_lo_factor = kv::parse_double(key, value);
    else if (key == "wave.freq_hi_factor") c.wave.freq_hi_factor = kv::parse_double(key, value);

    else if (key == "sim.duration") c.sim.duration = kv::parse_double(key, value);
    else if (key == "sim.dt") c.sim.dt_sample = kv::parse_double(key, value);
    else if (key == "sim.dt_sub") c.sim.dt_sub = kv::parse_double(key, value);

    else if (key == "transmission.kt_floor") c.transmission.kt_floor = kv::parse_double(key, value);
    else if (key == "transmission.omega_cut") c.transmission.omega_cut = kv::parse_double(key, value);
    else if (key == "transmission.kt_exponent") c.transmission.kt_exponent = kv::parse_double(key, value);
    else if (key == "transmission.gain_surge") c.transmission.gain_surge = kv::parse_double(key, value);
    else if (key == "transmission.gain_heave") c.transmission.gain_heave = kv::parse_double(key, value);
    else if (key == "transmission.gain_pitch") c.transmission.gain_pitch = kv::parse_double(key, value);
    else if (key == "transmission.delay") c.transmission.delay = kv::parse_double(key, value);
    else if (key == "transmission.noise_std") c.transmission.noise_std = kv::parse_double(key, value);

    else if (key == "model.lookback") c.model.lookback = kv::parse_u64(key, value);
    else if (key == "model.horizon") c.model.horizon = kv::parse_u64(key, value);
    else if (key == "model.n_endo") c.model.n_endo = kv::parse_u64(key, value);
    else if (key == "model.n_exo") c.model.n_exo = kv::parse_u64(key, value);
    else if (key == "model.width") c.model.width = kv::parse_u64(key, value);
    else if (key == "model.n_heads") c.model.n_heads = kv::parse_u64(key, value);
    else if (key == "model.n_layers") c.model.n_layers = kv::parse_u64(key, value);
    else if (key == "model.enable_dbfm") c.model.enable_dbfm = kv::parse_bool(key, value);
    else if (key == "model.enable_ta") c.model.enable_ta = kv::parse_bool(key, value);
    else if (key == "model.enable_e2eca") c.model.enable_e2eca = kv::parse_bool(key, value);
    else if (key == "model.scaled_attention") c.model.scaled_attention = kv::parse_bool(key, value);
    else if (key == "model.target_indices") c.model.target_indices = kv::parse_index_list(key, value);

    else if (key == "train.lr") c.train.lr = kv::parse_double(key, value);
    else if (key == "train.batch") c.train.batch = kv::parse_u64(key, value);
    else if (key == "train.max_epochs") c.train.max_epochs = kv::parse_u64(key, value);
    else if (key == "train.patience") c.train.patience = kv::parse_u64(key, value);
    else if (key == "train.dropout") c.train.dropout = kv::parse_double(key, value);
    else if (key == "train.beta1") c.train.beta1 = kv::parse_double(key, value);
    else if (key == "train.beta2") c.train.beta2 = kv::parse_double(key, value);
    else if (key == "train.eps_opt") c.train.eps_opt = kv::parse_double(key, value);
    else if (key == "train.normalize") c.train.normalize = kv::parse_bool(key, value);

    else throw ConfigError("config: unknown key '" + key + "'");
  }
  return c;
}

RunConfig RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return from_kv(kv::parse_lines(text.str(), path));
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_kv() const {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("seed", std::to_string(seed));

  kv.emplace_back("wave.hs", kv::format_double(wave.hs));
  kv.emplace_back("wave.tp", kv::format_double(wave.tp));
  kv.emplace_back("wave.depth", kv::format_double(wave.depth));
  kv.emplace_back("wave.gamma", kv::format_double(wave.gamma));
  kv.emplace_back("wave.components", std::to_string(wave.n_components));
  kv.emplace_back("wave.gravity", kv::format_double(wave.gravity));
  kv.emplace_back("wave.freq_lo_factor", kv::format_double(wave.freq_lo_factor));
  kv.emplace_back("wave.freq_hi_factor", kv::format_double(wave.freq_hi_factor));

  kv.emplace_back("sim.duration", kv::format_double(sim.duration));
  kv.emplace_back("sim.dt", kv::format_double(sim.dt_sample));
  kv.emplace_back("sim.dt_sub", kv::format_double(sim.dt_sub));

  kv.emplace_back("transmission.kt_floor", kv::format_double(transmission.kt_floor));
  kv.emplace_back("transmission.omega_cut", kv::format_double(transmission.omega_cut));
  kv.emplace_back("transmission.kt_exponent", kv::format_double(transmission.kt_exponent));
  kv.emplace_back("transmission.gain_surge", kv::format_double(transmission.gain_surge));
  kv.emplace_back("transmission.gain_heave", kv::format_double(transmission.gain_heave));
  kv.emplace_back("transmission.gain_pitch", kv::format_double(transmission.gain_pitch));
  kv.emplace_back("transmission.delay", kv::format_double(transmission.delay));
  kv.emplace_back("transmission.noise_std", kv::format_double(transmission.noise_std));

  kv.emplace_back("model.lookback", std::to_string(model.lookback));
  kv.emplace_back("model.horizon", std::to_string(model.horizon));
  kv.emplace_back("model.n_endo", std::to_string(model.n_endo));
  kv.emplace_back("model.n_exo", std::to_string(model.n_exo));
  kv.emplace_back("model.width", std::to_string(model.width));
  kv.emplace_back("model.n_heads", std::to_string(model.n_heads));
  kv.emplace_back("model.n_layers", std::to_string(model.n_layers));
  kv.emplace_back("model.enable_dbfm", kv::format_bool(model.enable_dbfm));
  kv.emplace_back("model.enable_ta", kv::format_bool(model.enable_ta));
  kv.emplace_back("model.enable_e2eca", kv::format_bool(model.enable_e2eca));
  kv.emplace_back("model.scaled_attention", kv::format_bool(model.scaled_attention));
  kv.emplace_back("model.target_indices", kv::format_index_list(model.target_indices));

  kv.emplace_back("train.lr", kv::format_double(train.lr));
  kv.emplace_back("train.batch", std::to_string(train.batch));
  kv.emplace_back("train.max_epochs", std::to_string(train.max_epochs));
  kv.emplace_back("train.patience", std::to_string(train.patience));
  kv.emplace_back("train.dropout", kv::format_double(train.dropout));
  kv.emplace_back("train.beta1", kv::format_double(train.beta1));
  kv.emplace_back("train.beta2", kv::format_double(train.beta2));
  kv.emplace_back("train.eps_opt", kv::format_double(train.eps_opt));
  kv.emplace_back("train.normalize", kv::format_bool(train.normalize));
  return kv;
}

std::string RunConfig::resolved_text() const {
  std::string text = std::string("# ") + kToolVersion + "\n";
  for (const auto& [key, value] : to_kv()) text += key + "=" + value + "\n";
  return text;
}

}  // namespace fanet
