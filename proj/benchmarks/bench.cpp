#include <benchmark/benchmark.h>

#include "zmd/dataset.hpp"
#include "zmd/diffusion.hpp"
#include "zmd/metrics.hpp"
#include "zmd/optics.hpp"
#include "zmd/tie.hpp"

namespace {

using namespace zmd;

PhaseMap test_phase(int n) {
  Rng rng(7);
  RealImage gray = dataset::procedural_grayscale(n, n, 0.5e-6, rng);
  return dataset::phase_from_grayscale(gray, 0.5);
}

void BM_FresnelPropagate(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  ComplexField field = pure_phase_object(test_phase(n));
  for (auto _ : state) {
    ComplexField out = optics::fresnel_propagate(field, 2e-6, 550e-9);
    benchmark::DoNotOptimize(out.data.data());
  }
}
BENCHMARK(BM_FresnelPropagate)->Arg(64)->Arg(256);

void BM_InverseLaplacian(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  PhaseMap g = test_phase(n);
  g.remove_mean();
  double eps = tie::default_regularization(n, n, 0.5e-6);
  for (auto _ : state) {
    RealImage out = tie::inverse_laplacian(g, eps);
    benchmark::DoNotOptimize(out.data.data());
  }
}
BENCHMARK(BM_InverseLaplacian)->Arg(64)->Arg(256);

void BM_MsSsim(benchmark::State& state) {
  int n = static_cast<int>(state.range(0));
  PhaseMap a = test_phase(n);
  Rng rng(9);
  PhaseMap b = a;
  for (double& v : b.data) v += 0.01 * rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(metrics::ms_ssim(a, b));
}
BENCHMARK(BM_MsSsim)->Arg(64)->Arg(256);

void BM_TrainStep(benchmark::State& state) {
  diffusion::ModelConfig mc;
  mc.y_channels = 1;
  mc.x_channels = 3;
  mc.height = mc.width = 16;
  mc.channels = 8;
  auto model = diffusion::make_model(mc);
  Rng rng(11);
  diffusion::Pair pair{nn::Tensor({3, 16, 16}), nn::Tensor({1, 16, 16})};
  for (double& v : pair.x.data) v = rng.uniform();
  for (double& v : pair.y.data) v = rng.uniform();
  for (auto _ : state) {
    diffusion::LossDraws draws = diffusion::draw_losses(model, rng);
    model.zero_grads();
    auto lb = diffusion::loss_zmd(model, pair, draws, true);
    benchmark::DoNotOptimize(lb.total);
  }
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();
