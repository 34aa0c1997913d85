// Command line front end: simulate, solve, train, sample, eval,
// verify-theory. Every run writes a manifest that pins (command, config,
// seed, version) and hashes its outputs.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "zmd/checkpoint.hpp"
#include "zmd/config.hpp"
#include "zmd/dataset_io.hpp"
#include "zmd/diffusion.hpp"
#include "zmd/hash.hpp"
#include "zmd/image_io.hpp"
#include "zmd/manifest.hpp"
#include "zmd/metrics.hpp"
#include "zmd/parallel.hpp"
#include "zmd/tensor_io.hpp"
#include "zmd/theory.hpp"
#include "zmd/tie.hpp"
#include "zmd/units.hpp"

namespace fs = std::filesystem;
using namespace zmd;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  int64_t seed_override = -1;
};

config::RunConfig load_config(const CommonArgs& args) {
  config::RunConfig cfg;
  if (!args.config_path.empty()) cfg = config::RunConfig::from_file(args.config_path);
  if (args.seed_override >= 0) cfg.seed = static_cast<uint64_t>(args.seed_override);
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON configuration file");
  cmd->add_option("--seed", args.seed_override, "Override the config seed");
  cmd->add_option("--out", args.out_dir, "Output directory");
}

fs::path prepare_out(const CommonArgs& args) {
  fs::path out(args.out_dir);
  fs::create_directories(out);
  return out;
}

std::vector<dataset::Sample> simulate_corpus(const config::RunConfig& cfg) {
  dataset::SimulationSpec spec = cfg.simulation;
  spec.seed = cfg.seed;
  spec.validate();
  std::vector<dataset::Sample> samples(cfg.count);
  parallel_for(samples.size(), [&](size_t i) {
    Rng rng(cfg.seed, i);
    RealImage gray = dataset::procedural_grayscale(spec.width, spec.height, spec.pitch, rng);
    PhaseMap phase = dataset::phase_from_grayscale(gray, spec.phase_max);
    samples[i] = dataset::simulate_sample(phase, spec, rng);
    samples[i].seed_used = i;
  });
  return samples;
}

nn::Tensor acquisition_tensor(const dataset::Sample& s) {
  nn::Tensor x({3, s.y.height, s.y.width});
  size_t hw = s.y.data.size();
  for (int c = 0; c < 3; ++c)
    std::copy(s.x[c].data.begin(), s.x[c].data.end(), x.data.begin() + c * hw);
  return x;
}

nn::Tensor phase_tensor(const dataset::Sample& s) {
  nn::Tensor y({1, s.y.height, s.y.width});
  y.data = s.y.data;
  return y;
}

void write_phase_outputs(const fs::path& out, const std::string& stem, const PhaseMap& phi,
                         io::Manifest& manifest) {
  fs::path tensor_path = out / (stem + ".zmdt");
  io::TensorData t = io::from_image(phi, io::Dtype::F32);
  io::write_tensor(tensor_path.string(), t);

  fs::path png_path = out / (stem + ".png");
  io::PngScale sc = io::write_png16(png_path.string(), phi);

  nlohmann::json side;
  side["units"] = "radians";
  side["pitch"] = units::format_length(phi.pitch);
  side["png_offset"] = sc.offset;
  side["png_scale"] = sc.scale;
  io::write_sidecar(tensor_path.string(), side.dump(2) + "\n");

  manifest.add_output(tensor_path.string());
  manifest.add_output(tensor_path.string() + ".json");
  manifest.add_output(png_path.string());
}

int cmd_simulate(const CommonArgs& args) {
  config::RunConfig cfg = load_config(args);
  fs::path out = prepare_out(args);
  auto samples = simulate_corpus(cfg);
  fs::path ds_path = out / "dataset.zmds";
  io::write_dataset(ds_path.string(), samples, cfg.simulation.pitch);

  io::Manifest m = io::make_manifest("simulate", cfg);
  m.add_output(ds_path.string());
  m.save((out / "manifest.json").string());
  std::cout << "wrote " << samples.size() << " samples to " << ds_path.string() << "\n";
  return 0;
}

RealImage load_intensity(const std::string& path, double pitch) {
  fs::path p(path);
  if (p.extension() == ".pgm") return io::read_pgm(path, pitch);
  if (p.extension() == ".png") return io::read_png(path, pitch);
  if (p.extension() == ".zmdt") return io::to_image(io::read_tensor(path), pitch);
  throw InvalidInput("solve: unsupported input format: " + path);
}

int cmd_solve(const CommonArgs& args, const std::vector<std::string>& inputs,
              const std::vector<std::string>& z_texts, int index) {
  config::RunConfig cfg = load_config(args);
  fs::path out = prepare_out(args);
  const auto& sol = cfg.solver;
  if (inputs.empty()) throw InvalidInput("solve: at least one --input is required");

  double eps_base = tie::default_regularization(cfg.simulation.width, cfg.simulation.height,
                                                cfg.simulation.pitch);
  PhaseMap phi;
  if (inputs.size() == 1 && fs::path(inputs[0]).extension() == ".zmds") {
    // chromatic single-exposure path: one RGB sample from a dataset
    double pitch = 0;
    auto samples = io::read_dataset(inputs[0], &pitch);
    if (index < 0 || index >= static_cast<int>(samples.size()))
      throw InvalidInput("solve: --index out of range");
    const auto& s = samples[index];
    if (sol.method != "tie_xi")
      throw InvalidInput("solve: dataset input requires method tie_xi");
    double eps = tie::default_regularization(s.y.width, s.y.height, pitch) / 1e-3 *
                 sol.eps_scale;
    tie::AxialDerivative d = tie::derivative_chromatic(
        s.x, cfg.simulation.channel_centers, s.z, sol.two_point);
    RealImage i_mean(s.y.width, s.y.height, pitch);
    for (size_t p = 0; p < i_mean.data.size(); ++p)
      i_mean.data[p] = (s.x[0].data[p] + s.x[1].data[p] + s.x[2].data[p]) / 3.0;
    phi = tie::solve_tie_xi(d, i_mean, eps, sol.intensity_floor);
  } else {
    // defocus stack path
    if (z_texts.size() != inputs.size())
      throw InvalidInput("solve: need one --z per --input for stack inputs");
    std::vector<RealImage> stack;
    std::vector<double> zs;
    for (size_t i = 0; i < inputs.size(); ++i) {
      stack.push_back(load_intensity(inputs[i], cfg.simulation.pitch));
      zs.push_back(units::parse_length(z_texts[i]));
    }
    tie::AxialDerivative d =
        stack.size() == 2
            ? tie::derivative_2shot(stack[1], stack[0], (zs[1] - zs[0]) / 2.0)
            : tie::derivative_polyfit(stack, zs, sol.degree);
    double eps = tie::default_regularization(stack[0].width, stack[0].height,
                                             cfg.simulation.pitch) /
                 1e-3 * sol.eps_scale;
    double k = 2.0 * M_PI / sol.wavelength;
    if (sol.method == "pure_phase") {
      phi = tie::solve_pure_phase(d, sol.i0, k, eps);
    } else if (sol.method == "teague") {
      // reference intensity: the stack image closest to focus
      size_t best = 0;
      for (size_t i = 1; i < zs.size(); ++i)
        if (std::abs(zs[i]) < std::abs(zs[best])) best = i;
      phi = tie::solve_teague(d, stack[best], k, eps, sol.intensity_floor);
    } else {
      throw InvalidInput("solve: method '" + sol.method + "' needs a dataset input");
    }
  }

  io::Manifest m = io::make_manifest("solve", cfg);
  write_phase_outputs(out, "phase", phi, m);
  m.save((out / "manifest.json").string());
  return 0;
}

diffusion::ModelConfig model_config_for(const config::RunConfig& cfg) {
  diffusion::ModelConfig mc;
  mc.y_channels = 1;
  mc.x_channels = 3;
  mc.height = cfg.simulation.height;
  mc.width = cfg.simulation.width;
  mc.channels = cfg.diffusion.channels;
  mc.kernel = cfg.diffusion.kernel;
  mc.schedule_embed = cfg.diffusion.schedule_embed;
  mc.schedule_hidden = cfg.diffusion.schedule_hidden;
  mc.quad_nodes = cfg.diffusion.quad_nodes;
  mc.a = cfg.diffusion.a;
  mc.omega = cfg.diffusion.omega;
  mc.T = cfg.diffusion.T;
  mc.init_seed = splitmix64(cfg.seed ^ 0x6d6f64656cULL);
  return mc;
}

int cmd_train(const CommonArgs& args, const std::string& resume_path) {
  config::RunConfig cfg = load_config(args);
  fs::path out = prepare_out(args);

  auto samples = simulate_corpus(cfg);
  std::vector<diffusion::Pair> data;
  for (const auto& s : samples)
    data.push_back({acquisition_tensor(s), phase_tensor(s)});

  diffusion::ModelConfig mc = model_config_for(cfg);
  diffusion::DiffusionModel model = diffusion::make_model(mc);

  std::vector<std::vector<double>*> p, g;
  model.eps_net.collect(p, g);
  if (cfg.diffusion.zero_mean) model.mean_net.collect(p, g);
  model.schedule.collect(p, g);
  nn::AdamConfig acfg;
  acfg.lr = cfg.diffusion.lr;
  acfg.sgd = cfg.diffusion.sgd;
  nn::Optimizer opt(p, g, acfg);
  Rng rng(cfg.seed);

  int start_step = 0;
  std::vector<double> trace;
  if (!resume_path.empty()) {
    io::Checkpoint ck = io::read_checkpoint(resume_path);
    model.unflatten_params(ck.params);
    opt.restore(ck.opt_state, ck.opt_steps);
    rng.deserialize(ck.rng_state);
    start_step = ck.train_step;
    trace = ck.loss_trace;
  }
  if (start_step > cfg.diffusion.steps)
    throw InvalidInput("train: checkpoint is already past the configured step count");

  diffusion::TrainConfig tc;
  tc.steps = cfg.diffusion.steps - start_step;
  tc.lr = cfg.diffusion.lr;
  tc.sgd = cfg.diffusion.sgd;
  tc.seed = cfg.seed;
  tc.zero_mean = cfg.diffusion.zero_mean;
  diffusion::TrainResult res = diffusion::train(data, model, tc, &opt, &rng);
  trace.insert(trace.end(), res.loss_trace.begin(), res.loss_trace.end());
  if (res.aborted)
    std::cerr << "train: aborted on a non-finite loss at step "
              << start_step + res.abort_step << "; kept the last finite parameters\n";

  io::Checkpoint ck;
  ck.model_config = mc;
  ck.params = model.flatten_params();
  ck.opt_state = opt.state();
  ck.opt_steps = opt.steps_taken();
  ck.train_step = start_step + static_cast<int>(res.loss_trace.size());
  ck.rng_state = rng.serialize();
  ck.loss_trace = trace;
  fs::path ck_path = out / "checkpoint.zmdc";
  io::write_checkpoint(ck_path.string(), ck);

  io::TensorData trace_t;
  trace_t.dims = {trace.size()};
  trace_t.data = trace;
  fs::path trace_path = out / "loss_trace.zmdt";
  io::write_tensor(trace_path.string(), trace_t);

  io::Manifest m = io::make_manifest("train", cfg);
  m.add_output(ck_path.string());
  m.add_output(trace_path.string());
  m.save((out / "manifest.json").string());
  std::cout << "trained to step " << ck.train_step << ", final loss "
            << (trace.empty() ? 0.0 : trace.back()) << "\n";
  return 0;
}

int cmd_sample(const CommonArgs& args, const std::string& checkpoint_path) {
  config::RunConfig cfg = load_config(args);
  fs::path out = prepare_out(args);
  if (checkpoint_path.empty()) throw InvalidInput("sample: --checkpoint is required");

  io::Checkpoint ck = io::read_checkpoint(checkpoint_path);
  diffusion::DiffusionModel model = diffusion::make_model(ck.model_config);
  model.unflatten_params(ck.params);

  config::RunConfig sim_cfg = cfg;
  sim_cfg.simulation.height = ck.model_config.height;
  sim_cfg.simulation.width = ck.model_config.width;
  auto samples = simulate_corpus(sim_cfg);

  io::Manifest m = io::make_manifest("sample", cfg);
  for (size_t i = 0; i < samples.size(); ++i) {
    Rng rng(cfg.seed, 0x53414d50ULL + i);
    nn::Tensor y = diffusion::ancestral_sample(acquisition_tensor(samples[i]), model, rng);
    PhaseMap phi(samples[i].y.width, samples[i].y.height, samples[i].y.pitch);
    phi.data = y.data;
    write_phase_outputs(out, "sample_" + std::to_string(i), phi, m);
  }
  m.save((out / "manifest.json").string());
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& truth_path,
             const std::string& pred_path) {
  config::RunConfig cfg = load_config(args);
  fs::path out = prepare_out(args);
  if (truth_path.empty() || pred_path.empty())
    throw InvalidInput("eval: --truth and --pred are required");

  std::vector<PhaseMap> truth, pred;
  auto load_maps = [&](const std::string& path, std::vector<PhaseMap>& dst) {
    if (fs::path(path).extension() == ".zmds") {
      for (const auto& s : io::read_dataset(path)) dst.push_back(s.y);
    } else {
      dst.push_back(io::to_image(io::read_tensor(path), cfg.simulation.pitch));
    }
  };
  load_maps(truth_path, truth);
  load_maps(pred_path, pred);
  if (truth.size() != pred.size())
    throw InvalidInput("eval: sample counts differ between --truth and --pred");

  metrics::MetricReport report;
  for (size_t i = 0; i < truth.size(); ++i) {
    metrics::SampleMetrics sm;
    sm.id = std::to_string(i);
    sm.ms_ssim = std::clamp(metrics::ms_ssim(truth[i], pred[i]), 0.0, 1.0);
    sm.mae = metrics::mae(truth[i], pred[i]);
    report.samples.push_back(sm);
  }
  report.finalize();

  fs::path csv_path = out / "metrics.csv";
  std::ofstream csv(csv_path);
  csv << report.to_csv();
  csv.close();

  io::Manifest m = io::make_manifest("eval", cfg);
  m.add_output(csv_path.string());
  m.save((out / "manifest.json").string());
  std::cout << "ms_ssim " << report.ms_ssim_mean << " +- " << report.ms_ssim_std
            << ", mae " << report.mae_mean << " +- " << report.mae_std << "\n";
  return 0;
}

int cmd_verify_theory(const CommonArgs& args) {
  config::RunConfig cfg = load_config(args);
  fs::path out = prepare_out(args);
  theory::Report report = theory::run_all_checks(cfg.seed, cfg.theory.paths);

  fs::path report_path = out / "report.json";
  std::ofstream os(report_path);
  os << report.to_json() << "\n";
  os.close();

  io::Manifest m = io::make_manifest("verify-theory", cfg);
  m.add_output(report_path.string());
  m.save((out / "manifest.json").string());
  std::cout << report.to_json() << "\n";
  return report.all_passed() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-exposure quantitative phase imaging toolkit"};
  app.require_subcommand(1);

  CommonArgs sim_args, solve_args, train_args, sample_args, eval_args, theory_args;
  std::vector<std::string> solve_inputs, solve_zs;
  int solve_index = 0;
  std::string resume_path, checkpoint_path, truth_path, pred_path;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic acquisition dataset");
  add_common(sim, sim_args);

  auto* solve = app.add_subcommand("solve", "Reconstruct phase from intensity data");
  add_common(solve, solve_args);
  solve->add_option("--input", solve_inputs,
                    "Dataset (.zmds) or defocus-stack images (.png/.pgm/.zmdt)");
  solve->add_option("--z", solve_zs, "Defocus of each stack image, with unit suffix");
  solve->add_option("--index", solve_index, "Sample index for dataset inputs");

  auto* train = app.add_subcommand("train", "Train the conditional sampler");
  add_common(train, train_args);
  train->add_option("--resume", resume_path, "Checkpoint to continue from");

  auto* sample = app.add_subcommand("sample", "Draw phase samples from a trained model");
  add_common(sample, sample_args);
  sample->add_option("--checkpoint", checkpoint_path, "Trained model checkpoint");

  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  add_common(eval, eval_args);
  eval->add_option("--truth", truth_path, "Ground-truth dataset or tensor");
  eval->add_option("--pred", pred_path, "Prediction dataset or tensor");

  auto* verify = app.add_subcommand("verify-theory", "Monte Carlo checks of the math");
  add_common(verify, theory_args);

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (solve->parsed()) return cmd_solve(solve_args, solve_inputs, solve_zs, solve_index);
    if (train->parsed()) return cmd_train(train_args, resume_path);
    if (sample->parsed()) return cmd_sample(sample_args, checkpoint_path);
    if (eval->parsed()) return cmd_eval(eval_args, truth_path, pred_path);
    if (verify->parsed()) return cmd_verify_theory(theory_args);
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
