#include "zmd/manifest.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "zmd/hash.hpp"

namespace zmd::io {

void Manifest::add_output(const std::string& path) {
  outputs.emplace_back(path, sha256_file(path));
}

std::string Manifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = nlohmann::json::parse(config_text);
  j["config_sha256"] = config_sha256;
  j["seed"] = seed;
  j["version"] = version;
  j["outputs"] = nlohmann::json::array();
  for (const auto& [path, hash] : outputs)
    j["outputs"].push_back({{"path", path}, {"sha256", hash}});
  return j.dump(2) + "\n";
}

Manifest Manifest::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("manifest: bad JSON: ") + e.what());
  }
  Manifest m;
  m.command = j.at("command").get<std::string>();
  m.config_text = j.at("config").dump(2);
  m.config_sha256 = j.at("config_sha256").get<std::string>();
  m.seed = j.at("seed").get<uint64_t>();
  m.version = j.at("version").get<std::string>();
  for (const auto& o : j.at("outputs"))
    m.outputs.emplace_back(o.at("path").get<std::string>(), o.at("sha256").get<std::string>());
  return m;
}

void Manifest::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("manifest: cannot write " + path);
  os << to_json();
}

Manifest Manifest::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("manifest: cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

Manifest make_manifest(const std::string& command, const config::RunConfig& cfg) {
  Manifest m;
  m.command = command;
  m.config_text = cfg.to_json_text();
  m.config_sha256 = sha256_hex(m.config_text);
  m.seed = cfg.seed;
  return m;
}

}  // namespace zmd::io
