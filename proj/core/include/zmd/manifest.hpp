#pragma once

#include <string>
#include <utility>
#include <vector>

#include "zmd/config.hpp"

namespace zmd::io {

inline constexpr const char* kToolVersion = "1.0.0";

/// Record of one CLI run: enough to replay it byte-for-byte (command,
/// canonical config, seed, tool version) plus hashes of what it produced.
struct Manifest {
  std::string command;
  std::string config_text;  // canonical JSON
  std::string config_sha256;
  uint64_t seed = 0;
  std::string version = kToolVersion;
  std::vector<std::pair<std::string, std::string>> outputs;  // (path, sha256)

  void add_output(const std::string& path);
  std::string to_json() const;
  static Manifest from_json(const std::string& text);
  void save(const std::string& path) const;
  static Manifest load(const std::string& path);
};

Manifest make_manifest(const std::string& command, const config::RunConfig& cfg);

}  // namespace zmd::io
