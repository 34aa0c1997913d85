#pragma once

#include <string>

#include "zmd/diffusion.hpp"

namespace zmd::io {

/// Everything needed for a bit-exact training resume.
struct Checkpoint {
  diffusion::ModelConfig model_config;
  std::vector<double> params;
  std::vector<double> opt_state;
  int64_t opt_steps = 0;
  int train_step = 0;
  std::string rng_state;
  std::vector<double> loss_trace;
};

/// Single-file container: magic "ZMDC", u16 version, u64 JSON header
/// length + header (model config, step counts, RNG state), then the
/// parameter / optimizer / loss-trace blocks as f64 arrays.
void write_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace zmd::io
