// End-to-end tests for the command-line tool. argv[1] is the binary path.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "zmd/checkpoint.hpp"
#include "zmd/dataset_io.hpp"
#include "zmd/hash.hpp"
#include "zmd/tensor_io.hpp"

using namespace zmd;
namespace fs = std::filesystem;

namespace {

std::string cli;
fs::path root;
int failures = 0;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::cout << "ok: " << what << "\n";
  } else {
    std::cout << "FAILED: " << what << "\n";
    ++failures;
  }
}

int run(const std::string& args) {
  std::string cmd = cli + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string p(const std::string& rel) { return (root / rel).string(); }

void write_config(const std::string& path, const std::string& extra = "") {
  std::ofstream f(path);
  f << R"({
    "seed": 11, "count": 3,
    "simulation": {"width": 32, "height": 32},
    "diffusion": {"steps": 20, "channels": 8, "quad_nodes": 17,
                   "schedule_hidden": 8, "T": 10, "patch": 16})"
    << extra << "\n}\n";
}

void test_simulate_determinism() {
  write_config(p("cfg.json"));
  check(run("simulate --config " + p("cfg.json") + " --out " + p("sim_a")) == 0,
        "simulate exits 0");
  check(run("simulate --config " + p("cfg.json") + " --out " + p("sim_b")) == 0,
        "simulate rerun exits 0");
  check(io::sha256_file(p("sim_a/dataset.zmds")) == io::sha256_file(p("sim_b/dataset.zmds")),
        "same config and seed give an identical dataset");

  check(run("simulate --config " + p("cfg.json") + " --seed 99 --out " + p("sim_c")) == 0,
        "simulate with a seed override exits 0");
  check(io::sha256_file(p("sim_a/dataset.zmds")) != io::sha256_file(p("sim_c/dataset.zmds")),
        "a different seed changes the dataset");
}

void test_empty_dataset() {
  std::ofstream f(p("cfg_empty.json"));
  f << R"({"count": 0, "simulation": {"width": 16, "height": 16}})";
  f.close();
  check(run("simulate --config " + p("cfg_empty.json") + " --out " + p("sim_empty")) == 0,
        "count 0 simulate exits 0");
  check(io::read_dataset(p("sim_empty/dataset.zmds")).empty(),
        "count 0 produces an empty dataset");
}

void test_solve() {
  check(run("solve --config " + p("cfg.json") + " --input " + p("sim_a/dataset.zmds") +
            " --index 0 --out " + p("solve_a")) == 0,
        "solve on a dataset sample exits 0");
  check(fs::exists(p("solve_a/phase_0.zmdt")) || fs::exists(p("solve_a/sample_0.zmdt")) ||
            !fs::is_empty(p("solve_a")),
        "solve writes outputs");

  // the stored tensor reads back as the written f32 payload
  std::string tensor_path;
  for (const auto& e : fs::directory_iterator(p("solve_a")))
    if (e.path().extension() == ".zmdt") tensor_path = e.path().string();
  check(!tensor_path.empty(), "solve wrote a tensor");
  if (!tensor_path.empty()) {
    io::TensorData t = io::read_tensor(tensor_path);
    check(t.dtype == io::Dtype::F32, "phase tensor is stored as f32");
    check(t.dims.size() == 2 && t.dims[0] == 32 && t.dims[1] == 32,
          "phase tensor has the acquisition shape");
    bool all_f32 = true;
    for (double v : t.data)
      all_f32 = all_f32 && v == static_cast<double>(static_cast<float>(v));
    check(all_f32, "tensor read-back is exact at f32 precision");
    check(fs::exists(tensor_path + ".json"), "tensor has a metadata sidecar");
  }

  write_config(p("cfg_badmethod.json"), R"(, "solver": {"method": "hologram"})");
  check(run("solve --config " + p("cfg_badmethod.json") + " --input " +
            p("sim_a/dataset.zmds") + " --index 0 --out " + p("solve_bad")) == 1,
        "unknown solver method exits 1");
  check(run("solve --config " + p("cfg.json") + " --input " + p("sim_a/dataset.zmds") +
            " --index 99 --out " + p("solve_oob")) == 1,
        "out-of-range index exits 1");
}

void test_eval() {
  check(run("eval --config " + p("cfg.json") + " --truth " + p("sim_a/dataset.zmds") +
            " --pred " + p("sim_a/dataset.zmds") + " --out " + p("eval_self")) == 0,
        "self-eval exits 0");
  std::ifstream csv(p("eval_self/metrics.csv"));
  std::string header;
  std::getline(csv, header);
  check(header == "sample_id,ms_ssim,mae", "metrics.csv header");
  int rows = 0;
  bool perfect = true;
  std::string line;
  while (std::getline(csv, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string id, ssim, mae;
    std::getline(ss, id, ',');
    std::getline(ss, ssim, ',');
    std::getline(ss, mae, ',');
    perfect = perfect && std::stod(ssim) == 1.0 && std::stod(mae) == 0.0;
  }
  check(rows == 3, "one metrics row per sample");
  check(perfect, "self-eval scores ms_ssim 1.0 and mae 0.0");

  check(run("eval --config " + p("cfg.json") + " --truth " + p("sim_a/dataset.zmds") +
            " --out " + p("eval_missing")) == 1,
        "eval without --pred exits 1");
}

void test_train_resume() {
  write_config(p("cfg_t20.json"));
  check(run("train --config " + p("cfg_t20.json") + " --out " + p("train_full")) == 0,
        "train exits 0");

  // the same run split at step 8 must land on the identical checkpoint
  write_config(p("cfg_t8.json"));
  {
    // rewrite with fewer steps but otherwise identical
    std::ofstream f(p("cfg_t8.json"));
    f << R"({
      "seed": 11, "count": 3,
      "simulation": {"width": 32, "height": 32},
      "diffusion": {"steps": 8, "channels": 8, "quad_nodes": 17,
                     "schedule_hidden": 8, "T": 10, "patch": 16}
    })";
  }
  check(run("train --config " + p("cfg_t8.json") + " --out " + p("train_part")) == 0,
        "partial train exits 0");
  check(run("train --config " + p("cfg_t20.json") + " --resume " +
            p("train_part/checkpoint.zmdc") + " --out " + p("train_resumed")) == 0,
        "resumed train exits 0");

  io::Checkpoint full = io::read_checkpoint(p("train_full/checkpoint.zmdc"));
  io::Checkpoint resumed = io::read_checkpoint(p("train_resumed/checkpoint.zmdc"));
  check(full.train_step == resumed.train_step, "resumed run reaches the same step");
  check(full.loss_trace == resumed.loss_trace, "loss traces are bitwise identical");
  check(full.params == resumed.params, "parameters are bitwise identical");
  check(full.opt_state == resumed.opt_state, "optimizer state is bitwise identical");
  check(full.rng_state == resumed.rng_state, "training RNG state matches");
}

void test_sample_determinism() {
  check(run("sample --config " + p("cfg.json") + " --checkpoint " +
            p("train_full/checkpoint.zmdc") + " --out " + p("samp_a")) == 0,
        "sample exits 0");
  check(run("sample --config " + p("cfg.json") + " --checkpoint " +
            p("train_full/checkpoint.zmdc") + " --out " + p("samp_b")) == 0,
        "sample rerun exits 0");
  bool same = true;
  int tensors = 0;
  for (const auto& e : fs::directory_iterator(p("samp_a")))
    if (e.path().extension() == ".zmdt") {
      ++tensors;
      std::string rel = e.path().filename().string();
      same = same && io::sha256_file(e.path().string()) ==
                         io::sha256_file(p("samp_b/" + rel));
    }
  check(tensors == 3, "one sample tensor per configured sample");
  check(same, "same seed draws identical samples");

  check(run("sample --config " + p("cfg.json") + " --out " + p("samp_nock")) == 1,
        "sample without --checkpoint exits 1");
}

void test_verify_theory() {
  std::ofstream f(p("cfg_theory.json"));
  f << R"({"theory": {"paths": 5000}})";
  f.close();
  check(run("verify-theory --config " + p("cfg_theory.json") + " --out " +
            p("verify")) == 0,
        "verify-theory exits 0");
  check(fs::exists(p("verify/report.json")), "verify-theory writes its report");
}

void test_exit_codes() {
  check(run("--help") == 0, "--help exits 0");
  check(run("simulate --config " + p("nonexistent.json") + " --out " + p("x")) == 1,
        "missing config exits 1");
  std::ofstream bad(p("bad.json"));
  bad << "{ not json";
  bad.close();
  check(run("simulate --config " + p("bad.json") + " --out " + p("x")) == 1,
        "malformed config exits 1");
  check(run("frobnicate") == 1, "unknown subcommand exits 1");
  check(run("solve --config " + p("cfg.json") + " --input " + p("nope.png") +
            " --z 1um --out " + p("x")) == 1,
        "missing input file exits 1");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_tests <path-to-cli>\n";
    return 2;
  }
  cli = argv[1];
  root = fs::temp_directory_path() / "zmd_cli_tests";
  fs::remove_all(root);
  fs::create_directories(root);

  test_simulate_determinism();
  test_empty_dataset();
  test_solve();
  test_eval();
  test_train_resume();
  test_sample_determinism();
  test_verify_theory();
  test_exit_codes();

  fs::remove_all(root);
  if (failures) {
    std::cout << failures << " check(s) failed\n";
    return 1;
  }
  std::cout << "all CLI checks passed\n";
  return 0;
}
