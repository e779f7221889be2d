#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fanet/flume.hpp"
#include "fanet/model.hpp"
#include "fanet/train.hpp"
#include "fanet/wave.hpp"

namespace fanet {

inline constexpr const char* kToolVersion = "fanet 1.0.0";

// One flat key=value tree covering everything a batch run needs. Every key
// has a default, unknown keys are a hard error, and the fully resolved form
// is echoed into each output directory so a run can always be replayed.
//
// A single top-level `seed` fans out to the subsystems through fixed
// derivation labels; the per-subsystem seed fields are not directly
// settable from the file.
struct RunConfig {
  WaveCondition wave;
  SimConfig sim;
  TransmissionConfig transmission;
  ModelConfig model;
  TrainConfig train;
  std::uint64_t seed = 42;

  // Derives wave/model/train seeds from `seed`. Called after parsing and any
  // command-line override.
  void fan_out_seed();
  void validate() const;

  static RunConfig from_kv(
      const std::vector<std::pair<std::string, std::string>>& pairs);
  static RunConfig load_file(const std::string& path);

  std::vector<std::pair<std::string, std::string>> to_kv() const;
  // Version header comment plus one key=value line each; parses back to an
  // equal config.
  std::string resolved_text() const;
};

}  // namespace fanet
