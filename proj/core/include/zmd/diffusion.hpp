#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "zmd/nn.hpp"
#include "zmd/schedule.hpp"

namespace zmd::diffusion {

/// Noise predictor, mean predictor, learnable schedule and loss weights.
struct DiffusionModel {
  nn::Network eps_net;   // (y_t, X, t-channel) -> noise estimate
  nn::Network mean_net;  // X -> mean estimate
  Schedule schedule;
  double a = 1e-3;   // curvature-regularizer weight
  double omega = 2.0;
  int T = 200;
  int y_channels = 1, x_channels = 1, height = 1, width = 1;

  std::vector<std::vector<double>*> param_blocks();
  std::vector<std::vector<double>*> grad_blocks();
  void zero_grads();
  std::vector<double> flatten_params();
  void unflatten_params(const std::vector<double>& flat);
};

struct ModelConfig {
  int y_channels = 1, x_channels = 1, height = 1, width = 1;
  int channels = 32;       // hidden width of the noise predictor
  int kernel = 3;          // conv kernel (1 for vector-shaped data)
  int schedule_embed = 0;  // 0 = global schedule, > 0 = X-conditioned
  int schedule_hidden = 32;
  int quad_nodes = 65;
  double a = 1e-3;
  double omega = 2.0;
  int T = 200;
  uint64_t init_seed = 1;
};

DiffusionModel make_model(const ModelConfig& cfg);

/// One (X, Y) pair.
struct Pair {
  nn::Tensor x, y;
};

/// y_t = sqrt(gamma) y0 + sqrt(1-gamma) eps. gamma must lie in [0, 1].
nn::Tensor forward_sample(const nn::Tensor& y0, double gamma_t, const nn::Tensor& eps);

/// 1/2 ||eps - predictor(y_t, t)||^2 for an arbitrary predictor; the MC
/// losses below feed the model's network through this.
double loss_noise_with(
    const std::function<nn::Tensor(const nn::Tensor& y_t, double t)>& predictor,
    const nn::Tensor& y0, double gamma_t, double t, const nn::Tensor& eps);

/// Schedule-consistency loss evaluated on arbitrary callables (for oracle
/// checks): mean_t ||dgamma/dt + beta*gamma||^2 + (gamma(0)-1)^2 + gamma(1)^2.
double loss_beta_with(const std::function<double(double)>& gamma,
                      const std::function<double(double)>& dgamma_dt,
                      const std::function<double(double)>& beta,
                      const std::vector<double>& ts);

/// Curvature regularizer mean_t ||d2gamma/dt2||^2.
double loss_gamma_with(const std::function<double(double)>& d2gamma_dt2,
                       const std::vector<double>& ts);

/// Closed-form KL( N(sqrt(g1) y0, (1-g1) I) || N(0, I) ).
double loss_prior_value(double gamma1, const nn::Tensor& y0);

double loss_mean_value(const nn::Tensor& y, const nn::Tensor& mu);

/// Monte Carlo single-draw losses on the live model (no gradients).
double loss_noise(DiffusionModel& model, const Pair& p, Rng& rng);
double loss_beta(DiffusionModel& model, const nn::Tensor& x, Rng& rng);
double loss_gamma(DiffusionModel& model, const nn::Tensor& x, Rng& rng);
double loss_prior(DiffusionModel& model, const Pair& p);
double loss_mean(DiffusionModel& model, const Pair& p);

struct LossBreakdown {
  double noise = 0, beta = 0, gamma_reg = 0, prior = 0, mean = 0;
  double total = 0;
};

/// Fixed draws for one loss evaluation; exposed so tests can freeze them
/// for finite-difference gradient checks.
struct LossDraws {
  double t_noise = 0.5, t_beta = 0.5, t_gamma = 0.5;
  nn::Tensor eps;
};

LossDraws draw_losses(const DiffusionModel& model, Rng& rng);

/// Full objective on residuals (y minus the mean predictor, excluded from
/// gradient flow) plus omega * mean loss. Accumulates gradients into the
/// model when with_grad is set. zero_mean=false trains the plain variant
/// on raw targets with no mean model.
LossBreakdown loss_zmd(DiffusionModel& model, const Pair& p, const LossDraws& draws,
                       bool with_grad, bool zero_mean = true);

double loss_zmd_value(DiffusionModel& model, const Pair& p, Rng& rng);

struct TrainConfig {
  int steps = 1000;
  double lr = 1e-3;
  bool sgd = false;
  uint64_t seed = 0;
  bool zero_mean = true;  // false = plain variant ablation (no mean model)
};

struct TrainResult {
  std::vector<double> loss_trace;
  bool aborted = false;
  int abort_step = -1;
};

/// Single-sample stochastic training loop; deterministic under seed. On a
/// non-finite loss the model is restored to the last finite step. The
/// optional optimizer and RNG let callers resume a run bit-exactly.
TrainResult train(std::vector<Pair>& data, DiffusionModel& model, const TrainConfig& cfg,
                  nn::Optimizer* external_opt = nullptr, Rng* external_rng = nullptr);

/// T-step ancestral sampler; adds the learned mean back at the end.
nn::Tensor ancestral_sample(const nn::Tensor& x, DiffusionModel& model, Rng& rng);

/// Ablation: identical chain without the mean-predictor add-back.
nn::Tensor cvdm_sample(const nn::Tensor& x, DiffusionModel& model, Rng& rng);

}  // namespace zmd::diffusion
