#include "zmd/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace zmd::diffusion {

namespace {

constexpr double kGammaClamp = 1e-12;

std::unique_ptr<nn::Network> conv_block(std::vector<int> shape, int ch, int kernel) {
  auto net = std::make_unique<nn::Network>(shape);
  net->emplace<nn::Conv2d>(ch, ch, kernel)
      .emplace<nn::SiLU>()
      .emplace<nn::Conv2d>(ch, ch, kernel);
  return net;
}

}  // namespace

std::vector<std::vector<double>*> DiffusionModel::param_blocks() {
  std::vector<std::vector<double>*> p, g;
  eps_net.collect(p, g);
  mean_net.collect(p, g);
  schedule.collect(p, g);
  return p;
}

std::vector<std::vector<double>*> DiffusionModel::grad_blocks() {
  std::vector<std::vector<double>*> p, g;
  eps_net.collect(p, g);
  mean_net.collect(p, g);
  schedule.collect(p, g);
  return g;
}

void DiffusionModel::zero_grads() {
  for (auto* g : grad_blocks()) std::fill(g->begin(), g->end(), 0.0);
}

std::vector<double> DiffusionModel::flatten_params() {
  std::vector<double> flat;
  for (auto* p : param_blocks()) flat.insert(flat.end(), p->begin(), p->end());
  return flat;
}

void DiffusionModel::unflatten_params(const std::vector<double>& flat) {
  size_t off = 0;
  for (auto* p : param_blocks()) {
    if (off + p->size() > flat.size())
      throw InvalidInput("DiffusionModel: parameter vector too short");
    std::copy(flat.begin() + off, flat.begin() + off + p->size(), p->begin());
    off += p->size();
  }
  if (off != flat.size()) throw InvalidInput("DiffusionModel: parameter size mismatch");
}

DiffusionModel make_model(const ModelConfig& cfg) {
  int in_ch = cfg.y_channels + cfg.x_channels + 1;  // + time channel
  std::vector<int> in_shape = {in_ch, cfg.height, cfg.width};
  std::vector<int> hid_shape = {cfg.channels, cfg.height, cfg.width};

  DiffusionModel m{
      nn::Network(in_shape), nn::Network({cfg.x_channels, cfg.height, cfg.width}),
      Schedule(cfg.x_channels, cfg.schedule_embed, cfg.schedule_hidden, cfg.quad_nodes),
      cfg.a, cfg.omega, cfg.T,
      cfg.y_channels, cfg.x_channels, cfg.height, cfg.width};

  m.eps_net.emplace<nn::Conv2d>(in_ch, cfg.channels, cfg.kernel)
      .emplace<nn::SiLU>()
      .add(std::make_unique<nn::ResidualBlock>(conv_block(hid_shape, cfg.channels, cfg.kernel)))
      .emplace<nn::SiLU>()
      .add(std::make_unique<nn::ResidualBlock>(conv_block(hid_shape, cfg.channels, cfg.kernel)))
      .emplace<nn::SiLU>()
      .emplace<nn::Conv2d>(cfg.channels, cfg.y_channels, cfg.kernel);

  m.mean_net.emplace<nn::Conv2d>(cfg.x_channels, cfg.channels, cfg.kernel)
      .emplace<nn::SiLU>()
      .emplace<nn::Conv2d>(cfg.channels, cfg.channels, cfg.kernel)
      .emplace<nn::SiLU>()
      .emplace<nn::Conv2d>(cfg.channels, cfg.channels, cfg.kernel)
      .emplace<nn::SiLU>()
      .emplace<nn::Conv2d>(cfg.channels, cfg.y_channels, cfg.kernel);

  Rng rng(cfg.init_seed);
  m.eps_net.init(rng);
  m.mean_net.init(rng);
  m.schedule.init(rng);
  return m;
}

nn::Tensor forward_sample(const nn::Tensor& y0, double gamma_t, const nn::Tensor& eps) {
  if (!(gamma_t >= 0.0 && gamma_t <= 1.0))
    throw InvalidInput("forward_sample: gamma outside [0, 1] (schedule invariant violated)");
  if (!y0.same_shape(eps)) throw InvalidInput("forward_sample: shape mismatch");
  nn::Tensor out(y0.shape);
  double sg = std::sqrt(gamma_t), sn = std::sqrt(1.0 - gamma_t);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] = sg * y0.data[i] + sn * eps.data[i];
  return out;
}

double loss_noise_with(
    const std::function<nn::Tensor(const nn::Tensor&, double)>& predictor,
    const nn::Tensor& y0, double gamma_t, double t, const nn::Tensor& eps) {
  nn::Tensor y_t = forward_sample(y0, gamma_t, eps);
  nn::Tensor pred = predictor(y_t, t);
  double acc = 0;
  for (size_t i = 0; i < eps.size(); ++i) {
    double d = eps.data[i] - pred.data[i];
    acc += d * d;
  }
  return 0.5 * acc;
}

double loss_beta_with(const std::function<double(double)>& gamma,
                      const std::function<double(double)>& dgamma_dt,
                      const std::function<double(double)>& beta,
                      const std::vector<double>& ts) {
  double ode = 0;
  for (double t : ts) {
    double r = dgamma_dt(t) + beta(t) * gamma(t);
    ode += r * r;
  }
  if (!ts.empty()) ode /= static_cast<double>(ts.size());
  double b0 = gamma(0.0) - 1.0, b1 = gamma(1.0);
  return ode + b0 * b0 + b1 * b1;
}

double loss_gamma_with(const std::function<double(double)>& d2gamma_dt2,
                       const std::vector<double>& ts) {
  double acc = 0;
  for (double t : ts) {
    double c = d2gamma_dt2(t);
    acc += c * c;
  }
  return ts.empty() ? 0.0 : acc / static_cast<double>(ts.size());
}

double loss_prior_value(double gamma1, const nn::Tensor& y0) {
  if (gamma1 >= 1.0 - kGammaClamp)
    throw InvalidInput("loss_prior: gamma(1) == 1 gives infinite KL");
  double y2 = 0;
  for (double v : y0.data) y2 += v * v;
  double d = static_cast<double>(y0.size());
  return 0.5 * (gamma1 * y2 + d * (-gamma1 - std::log(1.0 - gamma1)));
}

double loss_mean_value(const nn::Tensor& y, const nn::Tensor& mu) {
  if (!y.same_shape(mu)) throw InvalidInput("loss_mean: shape mismatch");
  double acc = 0;
  for (size_t i = 0; i < y.size(); ++i) {
    double d = y.data[i] - mu.data[i];
    acc += d * d;
  }
  return acc;
}

namespace {

nn::Tensor concat_input(const DiffusionModel& m, const nn::Tensor& y_t,
                        const nn::Tensor& x, double t) {
  nn::Tensor in({m.y_channels + m.x_channels + 1, m.height, m.width});
  size_t hw = static_cast<size_t>(m.height) * m.width;
  std::copy(y_t.data.begin(), y_t.data.end(), in.data.begin());
  std::copy(x.data.begin(), x.data.end(), in.data.begin() + m.y_channels * hw);
  std::fill(in.data.begin() + (m.y_channels + m.x_channels) * hw, in.data.end(), t);
  return in;
}

}  // namespace

LossDraws draw_losses(const DiffusionModel& model, Rng& rng) {
  LossDraws d;
  d.t_noise = rng.uniform();
  d.eps = nn::Tensor({model.y_channels, model.height, model.width});
  for (double& v : d.eps.data) v = rng.normal();
  d.t_beta = rng.uniform();
  d.t_gamma = rng.uniform();
  return d;
}

LossBreakdown loss_zmd(DiffusionModel& model, const Pair& p, const LossDraws& draws,
                       bool with_grad, bool zero_mean) {
  LossBreakdown out;
  const size_t dim = p.y.size();

  // mean predictor; residual uses it with gradient flow blocked
  nn::Tensor mu;
  nn::Tensor residual = p.y;
  if (zero_mean) {
    mu = model.mean_net.forward(p.x);
    out.mean = loss_mean_value(p.y, mu);
    for (size_t i = 0; i < dim; ++i) residual.data[i] -= mu.data[i];
    if (with_grad) {
      nn::Tensor gmu(mu.shape);
      for (size_t i = 0; i < dim; ++i)
        gmu.data[i] = model.omega * 2.0 * (mu.data[i] - p.y.data[i]);
      model.mean_net.backward(gmu);
    }
  }

  Schedule::Eval eval = model.schedule.evaluate(p.x);

  // noise loss at t_noise
  double t = draws.t_noise;
  double gamma_t = model.schedule.gamma(eval, t);
  nn::Tensor y_t = forward_sample(residual, gamma_t, draws.eps);
  nn::Tensor in = concat_input(model, y_t, p.x, t);
  nn::Tensor pred = model.eps_net.forward(in);
  for (size_t i = 0; i < dim; ++i) {
    double d = draws.eps.data[i] - pred.data[i];
    out.noise += 0.5 * d * d;
  }
  if (with_grad) {
    nn::Tensor gpred(pred.shape);
    for (size_t i = 0; i < dim; ++i) gpred.data[i] = pred.data[i] - draws.eps.data[i];
    nn::Tensor gin = model.eps_net.backward(gpred);
    // chain through y_t into gamma
    double sg = std::sqrt(std::max(gamma_t, kGammaClamp));
    double sn = std::sqrt(std::max(1.0 - gamma_t, kGammaClamp));
    double dgamma = 0;
    for (size_t i = 0; i < dim; ++i) {
      double dy = gin.data[i];  // y_t occupies the leading channels
      dgamma += dy * (residual.data[i] / (2.0 * sg) - draws.eps.data[i] / (2.0 * sn));
    }
    model.schedule.accumulate_gamma_grad(eval, t, dgamma);
  }

  // schedule-consistency loss
  double tb = draws.t_beta;
  double g_tb = model.schedule.gamma(eval, tb);
  double dg_tb = model.schedule.dgamma_dt(eval, tb);
  double b_tb = model.schedule.beta(eval, tb);
  double r = dg_tb + b_tb * g_tb;
  double g0 = model.schedule.gamma(eval, 0.0);
  double g1 = model.schedule.gamma(eval, 1.0);
  out.beta = r * r + (g0 - 1.0) * (g0 - 1.0) + g1 * g1;
  if (with_grad) {
    model.schedule.accumulate_dgamma_dt_grad(eval, tb, 2.0 * r);
    model.schedule.accumulate_gamma_grad(eval, tb, 2.0 * r * b_tb);
    eval.point_grads.emplace_back(tb, 2.0 * r * g_tb);
    model.schedule.accumulate_gamma_grad(eval, 0.0, 2.0 * (g0 - 1.0));
    model.schedule.accumulate_gamma_grad(eval, 1.0, 2.0 * g1);
  }

  // curvature regularizer
  double c = model.schedule.d2gamma_dt2(eval, draws.t_gamma);
  out.gamma_reg = c * c;
  if (with_grad)
    model.schedule.accumulate_d2gamma_dt2_grad(eval, draws.t_gamma, model.a * 2.0 * c);

  // prior matching at t = 1
  out.prior = loss_prior_value(std::min(g1, 1.0 - 1e-9), residual);
  if (with_grad) {
    double y2 = 0;
    for (double v : residual.data) y2 += v * v;
    double d = static_cast<double>(dim);
    double g1c = std::min(g1, 1.0 - 1e-9);
    double dkl = 0.5 * (y2 + d * (g1c / (1.0 - g1c)));
    model.schedule.accumulate_gamma_grad(eval, 1.0, dkl);
  }

  if (with_grad) model.schedule.backward(eval);

  out.total = out.beta + out.prior + out.noise + model.a * out.gamma_reg +
              (zero_mean ? model.omega * out.mean : 0.0);
  return out;
}

double loss_zmd_value(DiffusionModel& model, const Pair& p, Rng& rng) {
  LossDraws d = draw_losses(model, rng);
  return loss_zmd(model, p, d, false).total;
}

double loss_noise(DiffusionModel& model, const Pair& p, Rng& rng) {
  double t = rng.uniform();
  nn::Tensor eps({model.y_channels, model.height, model.width});
  for (double& v : eps.data) v = rng.normal();
  Schedule::Eval eval = model.schedule.evaluate(p.x);
  double gamma_t = model.schedule.gamma(eval, t);
  return loss_noise_with(
      [&](const nn::Tensor& y_t, double tt) {
        return model.eps_net.forward(concat_input(model, y_t, p.x, tt));
      },
      p.y, gamma_t, t, eps);
}

double loss_beta(DiffusionModel& model, const nn::Tensor& x, Rng& rng) {
  Schedule::Eval eval = model.schedule.evaluate(x);
  double t = rng.uniform();
  return loss_beta_with([&](double tt) { return model.schedule.gamma(eval, tt); },
                        [&](double tt) { return model.schedule.dgamma_dt(eval, tt); },
                        [&](double tt) { return model.schedule.beta(eval, tt); }, {t});
}

double loss_gamma(DiffusionModel& model, const nn::Tensor& x, Rng& rng) {
  Schedule::Eval eval = model.schedule.evaluate(x);
  double t = rng.uniform();
  return loss_gamma_with(
      [&](double tt) { return model.schedule.d2gamma_dt2(eval, tt); }, {t});
}

double loss_prior(DiffusionModel& model, const Pair& p) {
  Schedule::Eval eval = model.schedule.evaluate(p.x);
  return loss_prior_value(model.schedule.gamma(eval, 1.0), p.y);
}

double loss_mean(DiffusionModel& model, const Pair& p) {
  return loss_mean_value(p.y, model.mean_net.forward(p.x));
}

TrainResult train(std::vector<Pair>& data, DiffusionModel& model, const TrainConfig& cfg,
                  nn::Optimizer* external_opt, Rng* external_rng) {
  if (data.empty()) throw InvalidInput("train: dataset is empty");
  TrainResult result;
  if (cfg.steps <= 0) return result;

  std::vector<std::vector<double>*> p, g;
  model.eps_net.collect(p, g);
  if (cfg.zero_mean) model.mean_net.collect(p, g);
  model.schedule.collect(p, g);

  nn::AdamConfig acfg;
  acfg.lr = cfg.lr;
  acfg.sgd = cfg.sgd;
  std::optional<nn::Optimizer> local_opt;
  nn::Optimizer* opt = external_opt;
  if (!opt) {
    local_opt.emplace(p, g, acfg);
    opt = &*local_opt;
  }

  Rng local_rng(cfg.seed);
  Rng& rng = external_rng ? *external_rng : local_rng;
  std::vector<double> last_good = model.flatten_params();
  result.loss_trace.reserve(cfg.steps);
  for (int step = 0; step < cfg.steps; ++step) {
    size_t idx = static_cast<size_t>(rng.uniform() * data.size());
    if (idx >= data.size()) idx = data.size() - 1;
    LossDraws draws = draw_losses(model, rng);
    model.zero_grads();
    LossBreakdown lb = loss_zmd(model, data[idx], draws, true, cfg.zero_mean);
    if (!std::isfinite(lb.total)) {
      model.unflatten_params(last_good);
      result.aborted = true;
      result.abort_step = step;
      return result;
    }
    last_good = model.flatten_params();
    opt->step();
    result.loss_trace.push_back(lb.total);
  }
  return result;
}

namespace {

nn::Tensor run_chain(const nn::Tensor& x, DiffusionModel& model, Rng& rng, bool add_mean) {
  Schedule::Eval eval = model.schedule.evaluate(x);
  const int T = model.T;
  std::vector<double> beta_t(T + 1, 0.0), alpha_t(T + 1, 0.0), gamma_t(T + 1, 0.0);
  double prod = 1.0;
  for (int t = 1; t <= T; ++t) {
    beta_t[t] = model.schedule.beta(eval, static_cast<double>(t) / T) / T;
    alpha_t[t] = 1.0 - beta_t[t];
    prod *= alpha_t[t];
    gamma_t[t] = prod;
  }

  nn::Tensor y({model.y_channels, model.height, model.width});
  for (double& v : y.data) v = rng.normal();

  for (int t = T; t >= 1; --t) {
    nn::Tensor in = concat_input(model, y, x, static_cast<double>(t) / T);
    nn::Tensor pred = model.eps_net.forward(in);
    double inv_sqrt_alpha = 1.0 / std::sqrt(alpha_t[t]);
    double one_minus_gamma = std::max(1.0 - gamma_t[t], kGammaClamp);
    double coeff = beta_t[t] / std::sqrt(one_minus_gamma);
    // posterior variance of the step-(t-1) state given the step-t state and
    // the predicted clean sample (gamma_0 = 1)
    double prev_gamma = (t >= 2) ? gamma_t[t - 1] : 1.0;
    double sigma = std::sqrt(beta_t[t] * (1.0 - prev_gamma) / one_minus_gamma);
    for (size_t i = 0; i < y.size(); ++i) {
      double noise = (t == 1) ? 0.0 : rng.normal();
      y.data[i] = inv_sqrt_alpha * (y.data[i] - coeff * pred.data[i]) + sigma * noise;
      if (!std::isfinite(y.data[i]))
        throw std::runtime_error("ancestral_sample: non-finite value at step t=" +
                                 std::to_string(t));
    }
  }

  if (add_mean) {
    nn::Tensor mu = model.mean_net.forward(x);
    for (size_t i = 0; i < y.size(); ++i) y.data[i] += mu.data[i];
  }
  return y;
}

}  // namespace

nn::Tensor ancestral_sample(const nn::Tensor& x, DiffusionModel& model, Rng& rng) {
  return run_chain(x, model, rng, true);
}

nn::Tensor cvdm_sample(const nn::Tensor& x, DiffusionModel& model, Rng& rng) {
  return run_chain(x, model, rng, false);
}

}  // namespace zmd::diffusion
