#include "zmd/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace zmd::io {

namespace {

constexpr char kMagic[4] = {'Z', 'M', 'D', 'C'};
constexpr uint16_t kVersion = 1;

void put_u64(std::ostream& os, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}

uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw InvalidInput("checkpoint: truncated");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_block(std::ostream& os, const std::vector<double>& v) {
  put_u64(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_block(std::istream& is) {
  uint64_t n = get_u64(is);
  if (n > (1ull << 32)) throw InvalidInput("checkpoint: implausible block size");
  std::vector<double> v(n);
  if (!is.read(reinterpret_cast<char*>(v.data()),
               static_cast<std::streamsize>(n * sizeof(double))))
    throw InvalidInput("checkpoint: truncated block");
  return v;
}

}  // namespace

void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  nlohmann::json h;
  const auto& m = ck.model_config;
  h["model"] = {{"y_channels", m.y_channels}, {"x_channels", m.x_channels},
                {"height", m.height},         {"width", m.width},
                {"channels", m.channels},     {"kernel", m.kernel},
                {"schedule_embed", m.schedule_embed},
                {"schedule_hidden", m.schedule_hidden},
                {"quad_nodes", m.quad_nodes}, {"a", m.a},
                {"omega", m.omega},           {"T", m.T},
                {"init_seed", m.init_seed}};
  h["opt_steps"] = ck.opt_steps;
  h["train_step"] = ck.train_step;
  h["rng_state"] = ck.rng_state;
  std::string header = h.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("checkpoint: cannot open " + path + " for writing");
  os.write(kMagic, 4);
  char ver[2] = {static_cast<char>(kVersion & 0xff), static_cast<char>(kVersion >> 8)};
  os.write(ver, 2);
  put_u64(os, header.size());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  put_block(os, ck.params);
  put_block(os, ck.opt_state);
  put_block(os, ck.loss_trace);
  if (!os) throw InvalidInput("checkpoint: write failed on " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("checkpoint: cannot open " + path);
  char magic[4];
  if (!is.read(magic, 4)) throw InvalidInput("checkpoint: truncated");
  if (std::memcmp(magic, kMagic, 4) != 0) throw InvalidInput("checkpoint: bad magic");
  unsigned char ver[2];
  if (!is.read(reinterpret_cast<char*>(ver), 2)) throw InvalidInput("checkpoint: truncated");
  if ((ver[0] | ver[1] << 8) != kVersion) throw InvalidInput("checkpoint: unsupported version");

  uint64_t hlen = get_u64(is);
  if (hlen > (1ull << 24)) throw InvalidInput("checkpoint: implausible header size");
  std::string header(hlen, '\0');
  if (!is.read(header.data(), static_cast<std::streamsize>(hlen)))
    throw InvalidInput("checkpoint: truncated header");

  nlohmann::json h;
  try {
    h = nlohmann::json::parse(header);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("checkpoint: bad header JSON: ") + e.what());
  }

  Checkpoint ck;
  const auto& jm = h.at("model");
  auto& m = ck.model_config;
  m.y_channels = jm.at("y_channels").get<int>();
  m.x_channels = jm.at("x_channels").get<int>();
  m.height = jm.at("height").get<int>();
  m.width = jm.at("width").get<int>();
  m.channels = jm.at("channels").get<int>();
  m.kernel = jm.at("kernel").get<int>();
  m.schedule_embed = jm.at("schedule_embed").get<int>();
  m.schedule_hidden = jm.at("schedule_hidden").get<int>();
  m.quad_nodes = jm.at("quad_nodes").get<int>();
  m.a = jm.at("a").get<double>();
  m.omega = jm.at("omega").get<double>();
  m.T = jm.at("T").get<int>();
  m.init_seed = jm.at("init_seed").get<uint64_t>();
  ck.opt_steps = h.at("opt_steps").get<int64_t>();
  ck.train_step = h.at("train_step").get<int>();
  ck.rng_state = h.at("rng_state").get<std::string>();

  ck.params = get_block(is);
  ck.opt_state = get_block(is);
  ck.loss_trace = get_block(is);
  return ck;
}

}  // namespace zmd::io
