#include "fanet/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>

#include "fanet/errors.hpp"
#include "fanet/kv.hpp"

namespace fanet {

void ModelConfig::validate() const {
  if (lookback < 2 || lookback % 2 != 0) {
    throw ConfigError("model: lookback must be even and >= 2, got " +
                      std::to_string(lookback));
  }
  if (horizon < 1) throw ConfigError("model: horizon must be >= 1");
  if (n_endo < 1) throw ConfigError("model: at least one endogenous variate required");
  if (n_exo < 1) throw ConfigError("model: at least one exogenous variate required");
  if (width < 2 || width % 2 != 0) {
    throw ConfigError("model: width must be even and >= 2, got " + std::to_string(width));
  }
  if (n_heads < 1 || width % n_heads != 0) {
    throw ConfigError("model: n_heads (" + std::to_string(n_heads) +
                      ") must divide width (" + std::to_string(width) + ")");
  }
  if (n_layers < 1) throw ConfigError("model: n_layers must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw ConfigError("model: dropout_rate must lie in [0,1)");
  }
  if (!enable_e2eca) {
    throw ConfigError("model: the cross-attention baseline cannot be disabled");
  }
  if (target_indices.empty()) {
    throw ConfigError("model: target_indices must not be empty");
  }
  for (std::size_t t : target_indices) {
    if (t >= n_endo) {
      throw ConfigError("model: target index " + std::to_string(t) +
                        " out of range for " + std::to_string(n_endo) + " variates");
    }
  }
}

std::vector<std::pair<std::string, std::string>> ModelConfig::to_kv() const {
  return {
      {"lookback", std::to_string(lookback)},
      {"horizon", std::to_string(horizon)},
      {"n_endo", std::to_string(n_endo)},
      {"n_exo", std::to_string(n_exo)},
      {"width", std::to_string(width)},
      {"n_heads", std::to_string(n_heads)},
      {"n_layers", std::to_string(n_layers)},
      {"dropout_rate", kv::format_double(dropout_rate)},
      {"enable_dbfm", kv::format_bool(enable_dbfm)},
      {"enable_ta", kv::format_bool(enable_ta)},
      {"enable_e2eca", kv::format_bool(enable_e2eca)},
      {"scaled_attention", kv::format_bool(scaled_attention)},
      {"target_indices", kv::format_index_list(target_indices)},
      {"seed", std::to_string(seed)},
  };
}

ModelConfig ModelConfig::from_kv(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  ModelConfig cfg;
  for (const auto& [key, value] : pairs) {
    if (key == "lookback") cfg.lookback = kv::parse_u64(key, value);
    else if (key == "horizon") cfg.horizon = kv::parse_u64(key, value);
    else if (key == "n_endo") cfg.n_endo = kv::parse_u64(key, value);
    else if (key == "n_exo") cfg.n_exo = kv::parse_u64(key, value);
    else if (key == "width") cfg.width = kv::parse_u64(key, value);
    else if (key == "n_heads") cfg.n_heads = kv::parse_u64(key, value);
    else if (key == "n_layers") cfg.n_layers = kv::parse_u64(key, value);
    else if (key == "dropout_rate") cfg.dropout_rate = kv::parse_double(key, value);
    else if (key == "enable_dbfm") cfg.enable_dbfm = kv::parse_bool(key, value);
    else if (key == "enable_ta") cfg.enable_ta = kv::parse_bool(key, value);
    else if (key == "enable_e2eca") cfg.enable_e2eca = kv::parse_bool(key, value);
    else if (key == "scaled_attention") cfg.scaled_attention = kv::parse_bool(key, value);
    else if (key == "target_indices") cfg.target_indices = kv::parse_index_list(key, value);
    else if (key == "seed") cfg.seed = kv::parse_u64(key, value);
    else throw ConfigError("model: unknown key '" + key + "'");
  }
  return cfg;
}

DbfmBases DbfmBases::make(std::size_t lookback) {
  if (lookback < 2 || lookback % 2 != 0) {
    throw ConfigError("dbfm: lookback must be even and >= 2, got " +
                      std::to_string(lookback));
  }
  const std::size_t len = lookback;
  const std::size_t half = len / 2 + 1;
  DbfmBases b;
  b.w_cos = Tensor::zeros({half, len});
  b.w_sin = Tensor::zeros({half, len});
  const double two_pi = 2.0 * 3.14159265358979323846;
  for (std::size_t k = 0; k < half; ++k) {
    const bool edge = (k == 0 || 2 * k == len);
    const double ak = edge ? 1.0 : 2.0;
    const double bk = edge ? 0.0 : 2.0;
    for (std::size_t n = 0; n < len; ++n) {
      const double arg = two_pi * static_cast<double>((k * n) % len) /
                         static_cast<double>(len);
      b.w_cos.at(k, n) = (ak / static_cast<double>(len)) * std::cos(arg);
      b.w_sin.at(k, n) = -(bk / static_cast<double>(len)) * std::sin(arg);
    }
  }
  Tape scratch(false);
  b.w_cos_t = scratch.transpose(b.w_cos);
  b.w_sin_t = scratch.transpose(b.w_sin);
  return b;
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::named() {
  std::vector<std::pair<std::string, Tensor*>> out;
  out.emplace_back("embed_matrix", &embed_matrix);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string base = "layer" + std::to_string(l) + ".";
    TemporalLayerParams& lp = layers[l];
    out.emplace_back(base + "dbfm_proj", &lp.dbfm_proj);
    out.emplace_back(base + "ln_dbfm_gain", &lp.ln_dbfm_gain);
    out.emplace_back(base + "ln_dbfm_bias", &lp.ln_dbfm_bias);
    for (std::size_t h = 0; h < lp.ta.wq.size(); ++h) {
      const std::string hs = std::to_string(h);
      out.emplace_back(base + "ta_wq" + hs, &lp.ta.wq[h]);
      out.emplace_back(base + "ta_wk" + hs, &lp.ta.wk[h]);
      out.emplace_back(base + "ta_wv" + hs, &lp.ta.wv[h]);
    }
    out.emplace_back(base + "ta_wo", &lp.ta.wo);
    out.emplace_back(base + "ln_ta_gain", &lp.ln_ta_gain);
    out.emplace_back(base + "ln_ta_bias", &lp.ln_ta_bias);
  }
  out.emplace_back("bridge", &bridge);
  out.emplace_back("en_variate_embed", &en_variate_embed);
  out.emplace_back("ex_variate_embed", &ex_variate_embed);
  for (std::size_t h = 0; h < ca.wq.size(); ++h) {
    const std::string hs = std::to_string(h);
    out.emplace_back("ca_wq" + hs, &ca.wq[h]);
    out.emplace_back("ca_wk" + hs, &ca.wk[h]);
    out.emplace_back("ca_wv" + hs, &ca.wv[h]);
  }
  out.emplace_back("ca_wo", &ca.wo);
  out.emplace_back("ln_ca_gain", &ln_ca_gain);
  out.emplace_back("ln_ca_bias", &ln_ca_bias);
  out.emplace_back("head", &head);
  out.emplace_back("head_bias", &head_bias);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::named() const {
  auto mutable_view = const_cast<ModelParams*>(this)->named();
  std::vector<std::pair<std::string, const Tensor*>> out;
  out.reserve(mutable_view.size());
  for (auto& [name, t] : mutable_view) out.emplace_back(name, t);
  return out;
}

Tensor* ModelParams::find(const std::string& name) {
  for (auto& [n, t] : named()) {
    if (n == name) return t;
  }
  return nullptr;
}

void ModelParams::set_requires_grad(bool b) {
  for (auto& [name, t] : named()) t->set_requires_grad(b);
}

void ModelParams::zero_grad() {
  for (auto& [name, t] : named()) t->zero_grad();
}

ModelParams ModelParams::clone() const {
  ModelParams copy = *this;  // copies handles
  auto src = const_cast<ModelParams*>(this)->named();
  auto dst = copy.named();
  for (std::size_t i = 0; i < src.size(); ++i) {
    *dst[i].second = src[i].second->clone();
    dst[i].second->set_requires_grad(src[i].second->requires_grad());
  }
  return copy;
}

bool ModelParams::all_finite() const {
  for (const auto& [name, t] : named()) {
    if (!t->all_finite()) return false;
  }
  return true;
}

namespace {

void glorot_fill(Tensor& t, Rng rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(t.rows() + t.cols()));
  for (std::size_t i = 0; i < t.size(); ++i) t.at(i) = rng.uniform(-bound, bound);
}

}  // namespace

ModelParams init_params(const ModelConfig& cfg) {
  cfg.validate();
  const std::size_t L = cfg.lookback, F = cfg.n_endo, C = cfg.n_exo;
  const std::size_t D = cfg.width, H = cfg.horizon, dh = cfg.head_dim();
  (void)C;

  ModelParams p;
  p.embed_matrix = Tensor::zeros({F, D});
  p.layers.resize(cfg.n_layers);
  for (TemporalLayerParams& lp : p.layers) {
    lp.dbfm_proj = Tensor::zeros({2 * D, D});
    lp.ln_dbfm_gain = Tensor::zeros({D});
    lp.ln_dbfm_bias = Tensor::zeros({D});
    lp.ta.wq.resize(cfg.n_heads);
    lp.ta.wk.resize(cfg.n_heads);
    lp.ta.wv.resize(cfg.n_heads);
    for (std::size_t h = 0; h < cfg.n_heads; ++h) {
      lp.ta.wq[h] = Tensor::zeros({D, dh});
      lp.ta.wk[h] = Tensor::zeros({D, dh});
      lp.ta.wv[h] = Tensor::zeros({D, dh});
    }
    lp.ta.wo = Tensor::zeros({D, D});
    lp.ln_ta_gain = Tensor::zeros({D});
    lp.ln_ta_bias = Tensor::zeros({D});
  }
  p.bridge = Tensor::zeros({D, F});
  p.en_variate_embed = Tensor::zeros({L, D});
  p.ex_variate_embed = Tensor::zeros({L, D});
  p.ca.wq.resize(cfg.n_heads);
  p.ca.wk.resize(cfg.n_heads);
  p.ca.wv.resize(cfg.n_heads);
  for (std::size_t h = 0; h < cfg.n_heads; ++h) {
    p.ca.wq[h] = Tensor::zeros({D, dh});
    p.ca.wk[h] = Tensor::zeros({D, dh});
    p.ca.wv[h] = Tensor::zeros({D, dh});
  }
  p.ca.wo = Tensor::zeros({D, D});
  p.ln_ca_gain = Tensor::zeros({D});
  p.ln_ca_bias = Tensor::zeros({D});
  p.head = Tensor::zeros({D, H});
  p.head_bias = Tensor::zeros({H});

  // Every tensor gets its own stream derived from its name, so adding or
  // reordering parameters cannot silently shift another tensor's draw.
  Rng root(cfg.seed);
  for (auto& [name, t] : p.named()) {
    if (name.find("gain") != std::string::npos) {
      for (std::size_t i = 0; i < t->size(); ++i) t->at(i) = 1.0;
    } else if (name.find("bias") != std::string::npos) {
      // stays zero
    } else {
      glorot_fill(*t, root.fork(name));
    }
    t->set_requires_grad(true);
  }
  return p;
}

Tensor value_embedding(Tape& tape, const Tensor& x, const ModelParams& p) {
  if (x.rank() != 2 || x.shape()[1] != p.embed_matrix.shape()[0]) {
    throw ShapeError("value_embedding: x " + shape_str(x.shape()) +
                     " does not match embed matrix " +
                     shape_str(p.embed_matrix.shape()));
  }
  return tape.matmul(x, p.embed_matrix);
}

Tensor position_encoding(std::size_t steps, std::size_t width) {
  if (width % 2 != 0) {
    throw ShapeError("position_encoding: width must be even, got " +
                     std::to_string(width));
  }
  if (steps == 0 || width == 0) {
    throw ShapeError("position_encoding: steps and width must be positive");
  }
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::size_t>, Tensor> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({steps, width});
    if (it != cache.end()) return it->second.clone();
  }
  Tensor pe = Tensor::zeros({steps, width});
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; 2 * i < width; ++i) {
      const double denom =
          std::pow(10000.0, 2.0 * static_cast<double>(i) / static_cast<double>(width));
      const double arg = static_cast<double>(t) / denom;
      pe.at(t, 2 * i) = std::sin(arg);
      pe.at(t, 2 * i + 1) = std::cos(arg);
    }
  }
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(std::make_pair(steps, width), pe);
  return pe.clone();
}

Tensor dbfm_forward(Tape& tape, const Tensor& e, const DbfmBases& bases,
                    const ModelParams& p, const ModelConfig& cfg,
                    std::size_t layer) {
  if (e.rank() != 2 || e.shape()[0] != bases.w_cos.shape()[1]) {
    throw ShapeError("dbfm: embedding " + shape_str(e.shape()) +
                     " does not match bases for L=" +
                     std::to_string(bases.w_cos.shape()[1]));
  }
  if (layer >= p.layers.size()) {
    throw ShapeError("dbfm: layer index " + std::to_string(layer) + " out of range");
  }
  (void)cfg;
  auto [re, im] = tape.rdft(e);
  Tensor f_r = tape.matmul(bases.w_cos_t, re);
  Tensor f_i = tape.matmul(bases.w_sin_t, im);
  Tensor mixed = tape.concat_cols(f_r, f_i);
  Tensor proj = tape.matmul(mixed, p.layers[layer].dbfm_proj);
  return tape.layer_norm(tape.add(e, proj), p.layers[layer].ln_dbfm_gain,
                         p.layers[layer].ln_dbfm_bias);
}

namespace {

// Shared multi-head attention core: queries from `q_src`, keys/values from
// `kv_src`. Returns the post-W_o projection and the head-averaged weights.
struct AttentionOut {
  Tensor projected;
  Tensor avg_weights;  // plain tensor, no grad
};

AttentionOut multi_head_attention(Tape& tape, const Tensor& q_src,
                                  const Tensor& kv_src, const AttentionParams& ap,
                                  bool scaled) {
  const std::size_t n_heads = ap.wq.size();
  const std::size_t dh = ap.wq[0].shape()[1];
  Tensor concat;
  Tensor avg = Tensor::zeros({q_src.shape()[0], kv_src.shape()[0]});
  for (std::size_t h = 0; h < n_heads; ++h) {
    Tensor q = tape.matmul(q_src, ap.wq[h]);
    Tensor k = tape.matmul(kv_src, ap.wk[h]);
    Tensor v = tape.matmul(kv_src, ap.wv[h]);
    Tensor scores = tape.matmul(q, tape.transpose(k));
    if (scaled) scores = tape.scale(scores, 1.0 / std::sqrt(static_cast<double>(dh)));
    Tensor weights = tape.softmax_rows(scores);
    for (std::size_t i = 0; i < avg.size(); ++i) {
      avg.at(i) += weights.at(i) / static_cast<double>(n_heads);
    }
    Tensor head_out = tape.matmul(weights, v);
    concat = concat.defined() ? tape.concat_cols(concat, head_out) : head_out;
  }
  return {tape.matmul(concat, ap.wo), avg};
}

}  // namespace

Tensor temporal_attention(Tape& tape, const Tensor& e, const ModelParams& p,
                          const ModelConfig& cfg, std::size_t layer, bool train,
                          Rng* dropout_rng) {
  if (e.rank() != 2 || e.shape()[1] != cfg.width) {
    throw ShapeError("temporal_attention: embedding " + shape_str(e.shape()) +
                     " does not match width " + std::to_string(cfg.width));
  }
  if (layer >= p.layers.size()) {
    throw ShapeError("temporal_attention: layer index " + std::to_string(layer) +
                     " out of range");
  }
  const bool drop = train && cfg.dropout_rate > 0.0;
  if (drop && dropout_rng == nullptr) {
    throw ConfigError("temporal_attention: training with dropout requires an rng");
  }
  AttentionOut att =
      multi_head_attention(tape, e, e, p.layers[layer].ta, cfg.scaled_attention);
  Tensor mixed = att.projected;
  if (drop) {
    Tensor mask =
        dropout_mask(mixed.shape()[0], mixed.shape()[1], cfg.dropout_rate, *dropout_rng);
    mixed = tape.mul(mixed, mask);
  }
  return tape.layer_norm(tape.add(e, mixed), p.layers[layer].ln_ta_gain,
                         p.layers[layer].ln_ta_bias);
}

VariateTokens variate_tokens(Tape& tape, const Tensor& x, const Tensor& z,
                             const Tensor& e_out, const ModelParams& p,
                             const ModelConfig& cfg) {
  if (x.rank() != 2 || x.shape()[0] != cfg.lookback || x.shape()[1] != cfg.n_endo) {
    throw ShapeError("variate_tokens: x " + shape_str(x.shape()) + " must be [" +
                     std::to_string(cfg.lookback) + "x" + std::to_string(cfg.n_endo) + "]");
  }
  if (z.rank() != 2 || z.shape()[0] != cfg.lookback || z.shape()[1] != cfg.n_exo) {
    throw ShapeError("variate_tokens: z " + shape_str(z.shape()) + " must be [" +
                     std::to_string(cfg.lookback) + "x" + std::to_string(cfg.n_exo) + "]");
  }
  Tensor source = x;
  if (e_out.defined()) {
    source = tape.add(x, tape.matmul(e_out, p.bridge));
  }
  VariateTokens out;
  out.en = tape.matmul(tape.transpose(source), p.en_variate_embed);
  out.ex = tape.matmul(tape.transpose(z), p.ex_variate_embed);
  return out;
}

CrossAttentionResult cross_attention(Tape& tape, const Tensor& v_en,
                                     const Tensor& v_ex, const ModelParams& p,
                                     const ModelConfig& cfg) {
  if (!v_ex.defined() || cfg.n_exo == 0) {
    throw ConfigError("cross_attention: at least one exogenous variate required");
  }
  if (v_en.rank() != 2 || v_ex.rank() != 2 || v_en.shape()[1] != v_ex.shape()[1]) {
    throw ShapeError("cross_attention: token widths disagree: " +
                     shape_str(v_en.shape()) + " vs " + shape_str(v_ex.shape()));
  }
  AttentionOut att = multi_head_attention(tape, v_en, v_ex, p.ca, cfg.scaled_attention);
  CrossAttentionResult out;
  out.tokens = tape.layer_norm(tape.add(v_en, att.projected), p.ln_ca_gain, p.ln_ca_bias);
  out.attention = att.avg_weights;
  return out;
}

Tensor dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout: rate must lie in [0,1), got " + kv::format_double(rate));
  }
  Tensor mask = Tensor::zeros({rows, cols});
  if (rate == 0.0) {
    for (std::size_t i = 0; i < mask.size(); ++i) mask.at(i) = 1.0;
    return mask;
  }
  const double keep = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask.at(i) = (rng.uniform() < rate) ? 0.0 : keep;
  }
  return mask;
}

namespace {

template <class Fn>
auto pipeline_stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ShapeError& e) {
    throw ShapeError("forward[" + std::string(name) + "]: " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError("forward[" + std::string(name) + "]: " + e.what());
  } catch (const NumericError& e) {
    throw NumericError("forward[" + std::string(name) + "]: " + e.what());
  }
}

}  // namespace

ForwardResult forward(Tape& tape, const Tensor& x, const Tensor& z,
                      const ModelParams& p, const ModelConfig& cfg,
                      const DbfmBases& bases, bool train, Rng* dropout_rng) {
  cfg.validate();
  if (x.rank() != 2 || x.shape()[0] != cfg.lookback || x.shape()[1] != cfg.n_endo) {
    throw ShapeError("forward[input]: x " + shape_str(x.shape()) + " must be [" +
                     std::to_string(cfg.lookback) + "x" + std::to_string(cfg.n_endo) + "]");
  }
  if (z.rank() != 2 || z.shape()[0] != cfg.lookback || z.shape()[1] != cfg.n_exo) {
    throw ShapeError("forward[input]: z " + shape_str(z.shape()) + " must be [" +
                     std::to_string(cfg.lookback) + "x" + std::to_string(cfg.n_exo) + "]");
  }
  const bool drop = train && cfg.dropout_rate > 0.0;
  if (drop && dropout_rng == nullptr) {
    throw ConfigError("forward: training with dropout requires an rng");
  }

  Tensor e;  // stays undefined when the whole temporal branch is off
  if (cfg.temporal_branch()) {
    e = pipeline_stage("embed", [&] {
      return tape.add(value_embedding(tape, x, p),
                      position_encoding(cfg.lookback, cfg.width));
    });
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
      if (cfg.enable_dbfm) {
        e = pipeline_stage("dbfm", [&] { return dbfm_forward(tape, e, bases, p, cfg, l); });
      }
      if (cfg.enable_ta) {
        e = pipeline_stage("temporal_attention", [&] {
          return temporal_attention(tape, e, p, cfg, l, train, dropout_rng);
        });
      }
    }
  }

  VariateTokens tokens = pipeline_stage(
      "variate_tokens", [&] { return variate_tokens(tape, x, z, e, p, cfg); });
  CrossAttentionResult ca = pipeline_stage(
      "cross_attention", [&] { return cross_attention(tape, tokens.en, tokens.ex, p, cfg); });

  Tensor attended = ca.tokens;
  if (drop) {
    Tensor mask = dropout_mask(attended.shape()[0], attended.shape()[1],
                               cfg.dropout_rate, *dropout_rng);
    attended = tape.mul(attended, mask);
  }
  ForwardResult out;
  out.prediction = pipeline_stage("head", [&] {
    return tape.add_row_broadcast(tape.matmul(attended, p.head), p.head_bias);
  });
  out.cross_attention = ca.attention;
  return out;
}

Tensor mse_loss(Tape& tape, const Tensor& yhat, const Tensor& y,
                const std::vector<std::size_t>& targets) {
  if (targets.empty()) {
    throw ConfigError("mse_loss: target index set must not be empty");
  }
  if (!yhat.same_shape(y)) {
    throw ShapeError("mse_loss: shapes disagree: " + shape_str(yhat.shape()) + " vs " +
                     shape_str(y.shape()));
  }
  Tensor diff = tape.sub(tape.select_rows(yhat, targets), tape.select_rows(y, targets));
  return tape.mean_all(tape.mul(diff, diff));
}

namespace {

constexpr char kCheckpointMagic[8] = {'F', 'A', 'N', 'E', 'T', 'C', 'K', '1'};

void write_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw DataError("checkpoint: truncated file: " + path);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                     const ModelParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot open for writing: " + path);
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));

  std::string cfg_text;
  for (const auto& [key, value] : cfg.to_kv()) cfg_text += key + "=" + value + "\n";
  write_u64(out, cfg_text.size());
  out.write(cfg_text.data(), static_cast<std::streamsize>(cfg_text.size()));

  auto tensors = params.named();
  write_u64(out, tensors.size());
  for (const auto& [name, t] : tensors) {
    write_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u64(out, t->rank());
    for (std::size_t d : t->shape()) write_u64(out, d);
    out.write(reinterpret_cast<const char*>(t->data()),
              static_cast<std::streamsize>(t->size() * sizeof(double)));
  }
  out.flush();
  if (!out) throw DataError("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw DataError("checkpoint: unrecognized header in " + path);
  }
  const std::uint64_t cfg_len = read_u64(in, path);
  std::string cfg_text(cfg_len, '\0');
  in.read(cfg_text.data(), static_cast<std::streamsize>(cfg_len));
  if (!in) throw DataError("checkpoint: truncated file: " + path);

  Checkpoint ck;
  ck.cfg = ModelConfig::from_kv(kv::parse_lines(cfg_text, path));
  ck.cfg.validate();
  ck.params = init_params(ck.cfg);

  auto expected = ck.params.named();
  const std::uint64_t count = read_u64(in, path);
  if (count != expected.size()) {
    throw DataError("checkpoint: holds " + std::to_string(count) + " tensors, config implies " +
                    std::to_string(expected.size()));
  }
  std::set<std::string> seen;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t name_len = read_u64(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    if (!in) throw DataError("checkpoint: truncated file: " + path);
    Tensor* t = ck.params.find(name);
    if (t == nullptr) throw DataError("checkpoint: unknown tensor '" + name + "' in " + path);
    if (!seen.insert(name).second) {
      throw DataError("checkpoint: duplicate tensor '" + name + "' in " + path);
    }
    const std::uint64_t rank = read_u64(in, path);
    std::vector<std::size_t> dims(rank);
    for (std::uint64_t d = 0; d < rank; ++d) {
      dims[d] = static_cast<std::size_t>(read_u64(in, path));
    }
    if (dims != t->shape()) {
      throw DataError("checkpoint: tensor '" + name + "' has shape " + shape_str(dims) +
                      ", expected " + shape_str(t->shape()));
    }
    in.read(reinterpret_cast<char*>(t->data()),
            static_cast<std::streamsize>(t->size() * sizeof(double)));
    if (!in) throw DataError("checkpoint: truncated payload for '" + name + "' in " + path);
  }
  return ck;
}

void write_attention_csv(const std::string& path, const Tensor& attention,
                         const std::vector<std::string>& row_names,
                         const std::vector<std::string>& col_names) {
  if (attention.rank() != 2 || attention.shape()[0] != row_names.size() ||
      attention.shape()[1] != col_names.size()) {
    throw ShapeError("attention csv: matrix " + shape_str(attention.shape()) +
                     " does not match " + std::to_string(row_names.size()) + " rows / " +
                     std::to_string(col_names.size()) + " columns");
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("attention csv: cannot open for writing: " + path);
  out << "variate";
  for (const std::string& c : col_names) out << "," << c;
  out << "\n";
  char buf[40];
  for (std::size_t i = 0; i < row_names.size(); ++i) {
    out << row_names[i];
    for (std::size_t j = 0; j < col_names.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.12g", attention.at(i, j));
      out << "," << buf;
    }
    out << "\n";
  }
  if (!out) throw DataError("attention csv: write failed: " + path);
}

}  // namespace fanet
