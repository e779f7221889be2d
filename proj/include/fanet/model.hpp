#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fanet/rng.hpp"
#include "fanet/tensor.hpp"

namespace fanet {

// Architecture hyper-parameters. F counts endogenous channels (wave gauges),
// C exogenous channels (body motions). The enable flags reproduce the
// ablation variants: cross-attention is the always-on baseline, DBFM and
// temporal attention can be switched off independently.
struct ModelConfig {
  std::size_t lookback = 48;   // L
  std::size_t horizon = 48;    // H
  std::size_t n_endo = 9;      // F
  std::size_t n_exo = 3;       // C
  std::size_t width = 32;      // D
  std::size_t n_heads = 4;
  std::size_t n_layers = 2;
  double dropout_rate = 0.1;
  bool enable_dbfm = true;
  bool enable_ta = true;
  bool enable_e2eca = true;
  bool scaled_attention = false;  // off: raw QK^T scores
  std::vector<std::size_t> target_indices = {5, 6, 7, 8};
  std::uint64_t seed = 42;

  std::size_t head_dim() const { return width / n_heads; }
  bool temporal_branch() const { return enable_dbfm || enable_ta; }
  void validate() const;  // throws ConfigError

  // Flat key=value form used by checkpoints and the run config.
  std::vector<std::pair<std::string, std::string>> to_kv() const;
  static ModelConfig from_kv(
      const std::vector<std::pair<std::string, std::string>>& kv);
};

// Fixed synthesis weights that map real-DFT coefficients back to the time
// domain: w_cos[k][n] = (a_k/L) cos(2 pi k n / L) with a_0 = a_{L/2} = 1 and
// a_k = 2 otherwise, w_sin[k][n] = -(b_k/L) sin(2 pi k n / L) with
// b_0 = b_{L/2} = 0 and b_k = 2 otherwise. Applying them to (re, im) of the
// forward transform reconstructs the input exactly, so the two mapped
// branches always sum back to the original embedding before projection.
struct DbfmBases {
  Tensor w_cos;    // [(L/2+1) x L]
  Tensor w_sin;    // [(L/2+1) x L]
  Tensor w_cos_t;  // [L x (L/2+1)], transposed copy for the hot path
  Tensor w_sin_t;

  static DbfmBases make(std::size_t lookback);
};

struct AttentionParams {
  std::vector<Tensor> wq, wk, wv;  // per head [D x d_head]
  Tensor wo;                       // [D x D]
};

struct TemporalLayerParams {
  Tensor dbfm_proj;  // [2D x D]
  Tensor ln_dbfm_gain, ln_dbfm_bias;
  AttentionParams ta;
  Tensor ln_ta_gain, ln_ta_bias;
};

// Every learned matrix in the network. All tensors are allocated regardless
// of the enable flags so checkpoints are interchangeable across ablations of
// the same dimensions; disabled branches simply never receive gradients.
struct ModelParams {
  Tensor embed_matrix;  // [F x D]
  std::vector<TemporalLayerParams> layers;
  Tensor bridge;            // [D x F]
  Tensor en_variate_embed;  // [L x D]
  Tensor ex_variate_embed;  // [L x D]
  AttentionParams ca;
  Tensor ln_ca_gain, ln_ca_bias;
  Tensor head;       // [D x H]
  Tensor head_bias;  // [H]

  // Stable name -> tensor enumeration (declaration order). The names key
  // checkpoints and the optimizer state.
  std::vector<std::pair<std::string, Tensor*>> named();
  std::vector<std::pair<std::string, const Tensor*>> named() const;
  Tensor* find(const std::string& name);
  void set_requires_grad(bool b);
  void zero_grad();
  ModelParams clone() const;
  bool all_finite() const;
};

ModelParams init_params(const ModelConfig& cfg);

Tensor value_embedding(Tape& tape, const Tensor& x, const ModelParams& p);

// Sinusoidal table: PE(t, 2i) = sin(t / 10000^(2i/D)), PE(t, 2i+1) = cos(...).
Tensor position_encoding(std::size_t steps, std::size_t width);

Tensor dbfm_forward(Tape& tape, const Tensor& e, const DbfmBases& bases,
                    const ModelParams& p, const ModelConfig& cfg,
                    std::size_t layer);

// Multi-head self-attention over time steps with residual + layer norm.
// dropout_rng must be non-null when train is true and dropout_rate > 0.
Tensor temporal_attention(Tape& tape, const Tensor& e, const ModelParams& p,
                          const ModelConfig& cfg, std::size_t layer, bool train,
                          Rng* dropout_rng);

struct VariateTokens {
  Tensor en;  // [F x D]
  Tensor ex;  // [C x D]
};
// e_out may be undefined (temporal branch disabled), in which case the
// endogenous source series is the raw input.
VariateTokens variate_tokens(Tape& tape, const Tensor& x, const Tensor& z,
                             const Tensor& e_out, const ModelParams& p,
                             const ModelConfig& cfg);

struct CrossAttentionResult {
  Tensor tokens;     // [F x D], after residual + layer norm
  Tensor attention;  // [F x C], head-averaged weights (detached, for heatmaps)
};
CrossAttentionResult cross_attention(Tape& tape, const Tensor& v_en,
                                     const Tensor& v_ex, const ModelParams& p,
                                     const ModelConfig& cfg);

// Inverted-scaling dropout mask: entries are 1/(1-rate) with probability
// 1-rate and 0 otherwise, so the expected mask value is 1.
Tensor dropout_mask(std::size_t rows, std::size_t cols, double rate, Rng& rng);

struct ForwardResult {
  Tensor prediction;       // [F x H]
  Tensor cross_attention;  // [F x C]
};
ForwardResult forward(Tape& tape, const Tensor& x, const Tensor& z,
                      const ModelParams& p, const ModelConfig& cfg,
                      const DbfmBases& bases, bool train = false,
                      Rng* dropout_rng = nullptr);

Tensor mse_loss(Tape& tape, const Tensor& yhat, const Tensor& y,
                const std::vector<std::size_t>& targets);

// Checkpoint container: config text plus every named matrix with a shape
// header and raw row-major 64-bit payload. Round-trips are bit-exact.
void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                     const ModelParams& params);
struct Checkpoint {
  ModelConfig cfg;
  ModelParams params;
};
Checkpoint load_checkpoint(const std::string& path);

// Heatmap export: one row per endogenous channel, one column per exogenous
// channel, header row of exogenous names.
void write_attention_csv(const std::string& path, const Tensor& attention,
                         const std::vector<std::string>& row_names,
                         const std::vector<std::string>& col_names);

}  // namespace fanet
