#include "zmd/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "zmd/units.hpp"

namespace zmd::config {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& section,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) throw InvalidInput("config: section '" + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw InvalidInput("config: unknown key '" + it.key() + "' in " + section);
}

double length_of(const json& j, const std::string& key) {
  if (!j.at(key).is_string())
    throw InvalidInput("config: '" + key + "' must be a string with a unit suffix");
  return units::parse_length(j.at(key).get<std::string>());
}

void parse_simulation(const json& j, dataset::SimulationSpec& s) {
  check_keys(j, "simulation",
             {"width", "height", "pitch", "phase_max", "z_min", "z_max", "sigma_c_min",
              "sigma_c_max", "noise_sigma", "fixed_z", "channel_centers"});
  if (j.contains("width")) s.width = j.at("width").get<int>();
  if (j.contains("height")) s.height = j.at("height").get<int>();
  if (j.contains("pitch")) s.pitch = length_of(j, "pitch");
  if (j.contains("phase_max")) s.phase_max = j.at("phase_max").get<double>();
  if (j.contains("z_min")) s.z_min = length_of(j, "z_min");
  if (j.contains("z_max")) s.z_max = length_of(j, "z_max");
  if (j.contains("sigma_c_min")) s.sigma_c_min = length_of(j, "sigma_c_min");
  if (j.contains("sigma_c_max")) s.sigma_c_max = length_of(j, "sigma_c_max");
  if (j.contains("noise_sigma")) s.noise_sigma = j.at("noise_sigma").get<double>();
  if (j.contains("fixed_z")) s.fixed_z = j.at("fixed_z").get<bool>();
  if (j.contains("channel_centers")) {
    const auto& arr = j.at("channel_centers");
    if (!arr.is_array() || arr.size() != 3)
      throw InvalidInput("config: channel_centers must hold 3 lengths");
    for (int c = 0; c < 3; ++c)
      s.channel_centers[c] = units::parse_length(arr[c].get<std::string>());
  }
}

void parse_solver(const json& j, SolverConfig& s) {
  check_keys(j, "solver", {"method", "eps_scale", "intensity_floor", "degree",
                           "two_point", "dz", "i0", "wavelength"});
  if (j.contains("method")) s.method = j.at("method").get<std::string>();
  if (j.contains("eps_scale")) s.eps_scale = j.at("eps_scale").get<double>();
  if (j.contains("intensity_floor")) s.intensity_floor = j.at("intensity_floor").get<double>();
  if (j.contains("degree")) s.degree = j.at("degree").get<int>();
  if (j.contains("two_point")) s.two_point = j.at("two_point").get<bool>();
  if (j.contains("dz")) s.dz = length_of(j, "dz");
  if (j.contains("i0")) s.i0 = j.at("i0").get<double>();
  if (j.contains("wavelength")) s.wavelength = length_of(j, "wavelength");
}

void parse_diffusion(const json& j, DiffusionConfig& d) {
  check_keys(j, "diffusion",
             {"T", "a", "omega", "steps", "lr", "channels", "kernel", "schedule_embed",
              "schedule_hidden", "quad_nodes", "zero_mean", "sgd", "patch"});
  if (j.contains("T")) d.T = j.at("T").get<int>();
  if (j.contains("a")) d.a = j.at("a").get<double>();
  if (j.contains("omega")) d.omega = j.at("omega").get<double>();
  if (j.contains("steps")) d.steps = j.at("steps").get<int>();
  if (j.contains("lr")) d.lr = j.at("lr").get<double>();
  if (j.contains("channels")) d.channels = j.at("channels").get<int>();
  if (j.contains("kernel")) d.kernel = j.at("kernel").get<int>();
  if (j.contains("schedule_embed")) d.schedule_embed = j.at("schedule_embed").get<int>();
  if (j.contains("schedule_hidden")) d.schedule_hidden = j.at("schedule_hidden").get<int>();
  if (j.contains("quad_nodes")) d.quad_nodes = j.at("quad_nodes").get<int>();
  if (j.contains("zero_mean")) d.zero_mean = j.at("zero_mean").get<bool>();
  if (j.contains("sgd")) d.sgd = j.at("sgd").get<bool>();
  if (j.contains("patch")) d.patch = j.at("patch").get<int>();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config: JSON parse error: ") + e.what());
  }
  check_keys(j, "root", {"seed", "count", "simulation", "solver", "diffusion", "theory"});
  RunConfig cfg;
  if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
  if (j.contains("count")) cfg.count = j.at("count").get<int>();
  if (j.contains("simulation")) parse_simulation(j.at("simulation"), cfg.simulation);
  if (j.contains("solver")) parse_solver(j.at("solver"), cfg.solver);
  if (j.contains("diffusion")) parse_diffusion(j.at("diffusion"), cfg.diffusion);
  if (j.contains("theory")) {
    check_keys(j.at("theory"), "theory", {"paths"});
    if (j.at("theory").contains("paths")) cfg.theory.paths = j.at("theory").at("paths").get<int>();
  }
  cfg.validate();
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
  json j;
  j["seed"] = seed;
  j["count"] = count;
  j["simulation"] = {{"width", simulation.width},
                     {"height", simulation.height},
                     {"pitch", units::format_length(simulation.pitch)},
                     {"phase_max", simulation.phase_max},
                     {"z_min", units::format_length(simulation.z_min)},
                     {"z_max", units::format_length(simulation.z_max)},
                     {"sigma_c_min", units::format_length(simulation.sigma_c_min)},
                     {"sigma_c_max", units::format_length(simulation.sigma_c_max)},
                     {"noise_sigma", simulation.noise_sigma},
                     {"fixed_z", simulation.fixed_z},
                     {"channel_centers",
                      {units::format_length(simulation.channel_centers[0]),
                       units::format_length(simulation.channel_centers[1]),
                       units::format_length(simulation.channel_centers[2])}}};
  j["solver"] = {{"method", solver.method},
                 {"eps_scale", solver.eps_scale},
                 {"intensity_floor", solver.intensity_floor},
                 {"degree", solver.degree},
                 {"two_point", solver.two_point},
                 {"dz", units::format_length(solver.dz)},
                 {"i0", solver.i0},
                 {"wavelength", units::format_length(solver.wavelength)}};
  j["diffusion"] = {{"T", diffusion.T},
                    {"a", diffusion.a},
                    {"omega", diffusion.omega},
                    {"steps", diffusion.steps},
                    {"lr", diffusion.lr},
                    {"channels", diffusion.channels},
                    {"kernel", diffusion.kernel},
                    {"schedule_embed", diffusion.schedule_embed},
                    {"schedule_hidden", diffusion.schedule_hidden},
                    {"quad_nodes", diffusion.quad_nodes},
                    {"zero_mean", diffusion.zero_mean},
                    {"sgd", diffusion.sgd},
                    {"patch", diffusion.patch}};
  j["theory"] = {{"paths", theory.paths}};
  return j.dump(2);
}

void RunConfig::validate() const {
  if (count < 0) throw InvalidInput("config: count must be >= 0");
  simulation.validate();
  if (solver.method != "pure_phase" && solver.method != "teague" && solver.method != "tie_xi")
    throw InvalidInput("config: unknown solver method '" + solver.method + "'");
  if (!(solver.eps_scale > 0)) throw InvalidInput("config: eps_scale must be > 0");
  if (diffusion.T < 1) throw InvalidInput("config: diffusion T must be >= 1");
  if (diffusion.steps < 1) throw InvalidInput("config: diffusion steps must be >= 1");
  if (theory.paths < 100) throw InvalidInput("config: theory paths must be >= 100");
}

}  // namespace zmd::config
