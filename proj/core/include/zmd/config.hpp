#pragma once

#include <cstdint>
#include <string>

#include "zmd/dataset.hpp"

namespace zmd::config {

struct SolverConfig {
  std::string method = "tie_xi";  // pure_phase | teague | tie_xi
  double eps_scale = 1e-3;        // Tikhonov strength relative to the mean |k|^2
  double intensity_floor = 1e-6;
  int degree = 2;                 // polynomial order for stack fits
  bool two_point = false;         // chromatic slope from extreme channels only
  double dz = 0.5e-6;             // defocus step for two-shot stacks
  double i0 = 1.0;                // background intensity for the pure-phase solver
  double wavelength = 550e-9;
};

struct DiffusionConfig {
  int T = 200;
  double a = 1e-3;
  double omega = 2.0;
  int steps = 1000;
  double lr = 1e-3;
  int channels = 32;
  int kernel = 3;
  int schedule_embed = 0;
  int schedule_hidden = 32;
  int quad_nodes = 65;
  bool zero_mean = true;
  bool sgd = false;
  int patch = 32;  // training patch edge
};

struct TheoryConfig {
  int paths = 10000;
};

/// One declarative document covering every subcommand; unknown keys are
/// rejected, every field has a default, lengths carry explicit unit
/// suffixes in the file.
struct RunConfig {
  uint64_t seed = 0;
  int count = 16;  // samples to simulate / evaluate
  dataset::SimulationSpec simulation;
  SolverConfig solver;
  DiffusionConfig diffusion;
  TheoryConfig theory;

  static RunConfig from_json_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  std::string to_json_text() const;  // canonical form, used for hashing
  void validate() const;
};

}  // namespace zmd::config
