#include "zmd/schedule.hpp"

#include <algorithm>
#include <cmath>

namespace zmd::diffusion {

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> pooled_means(const nn::Tensor& x, int channels) {
  if (x.shape.size() == 1) {
    if (x.shape[0] != channels) throw InvalidInput("Schedule: x channel mismatch");
    return x.data;
  }
  if (x.shape.size() != 3 || x.shape[0] != channels)
    throw InvalidInput("Schedule: x must be {C,H,W} or {C}");
  size_t hw = static_cast<size_t>(x.shape[1]) * x.shape[2];
  std::vector<double> m(channels, 0.0);
  for (int c = 0; c < channels; ++c) {
    double s = 0;
    for (size_t i = 0; i < hw; ++i) s += x.data[c * hw + i];
    m[c] = s / static_cast<double>(hw);
  }
  return m;
}

}  // namespace

Schedule::Schedule(int x_channels, int embed_dim, int hidden, int quad_nodes)
    : x_channels_(x_channels), embed_dim_(embed_dim), nodes_(quad_nodes),
      mlp_({1 + embed_dim}), embed_net_({x_channels}) {
  if (quad_nodes < 3) throw InvalidInput("Schedule: need at least 3 quadrature nodes");
  mlp_.emplace<nn::Dense>(1 + embed_dim, hidden)
      .emplace<nn::SiLU>()
      .emplace<nn::Dense>(hidden, hidden)
      .emplace<nn::SiLU>()
      .emplace<nn::Dense>(hidden, 1);
  if (embed_dim_ > 0) embed_net_.emplace<nn::Dense>(x_channels, embed_dim);
}

void Schedule::init(Rng& rng) {
  mlp_.init(rng);
  if (embed_dim_ > 0) embed_net_.init(rng);
}

void Schedule::zero_grads() {
  mlp_.zero_grads();
  if (embed_dim_ > 0) embed_net_.zero_grads();
}

void Schedule::collect(std::vector<std::vector<double>*>& p,
                       std::vector<std::vector<double>*>& g) {
  mlp_.collect(p, g);
  if (embed_dim_ > 0) embed_net_.collect(p, g);
}

double Schedule::raw_beta(const std::vector<double>& embed, double t) {
  nn::Tensor in({1 + embed_dim_});
  in.data[0] = t;
  for (int i = 0; i < embed_dim_; ++i) in.data[1 + i] = embed[i];
  return mlp_.forward(in).data[0];
}

void Schedule::raw_beta_backward(Eval& eval, double t, double grad_beta) {
  double raw = raw_beta(eval.embed, t);  // re-forward to set layer caches
  nn::Tensor gout({1});
  gout.data[0] = grad_beta * sigmoid(raw);
  nn::Tensor gin = mlp_.backward(gout);
  for (int i = 0; i < embed_dim_; ++i) eval.embed_grad[i] += gin.data[1 + i];
}

Schedule::Eval Schedule::evaluate(const nn::Tensor& x) {
  Eval eval;
  eval.x = x;
  eval.dt = 1.0 / (nodes_ - 1);
  if (embed_dim_ > 0) {
    nn::Tensor pooled({x_channels_});
    pooled.data = pooled_means(x, x_channels_);
    eval.embed = embed_net_.forward(pooled).data;
    eval.embed_grad.assign(embed_dim_, 0.0);
  }
  eval.node_beta.resize(nodes_);
  eval.node_beta_grad.assign(nodes_, 0.0);
  for (int k = 0; k < nodes_; ++k)
    eval.node_beta[k] = softplus(raw_beta(eval.embed, k * eval.dt));
  return eval;
}

double Schedule::beta(const Eval& eval, double t) {
  return softplus(raw_beta(eval.embed, t));
}

int Schedule::segment(double t, double& s) const {
  double dt = 1.0 / (nodes_ - 1);
  if (t < 0) t = 0;
  if (t > 1) t = 1;
  int m = std::min(static_cast<int>(t / dt), nodes_ - 2);
  s = t - m * dt;
  return m;
}

double Schedule::integral(const std::vector<double>& nb, double t) const {
  double s;
  int m = segment(t, s);
  double dt = 1.0 / (nodes_ - 1);
  double q = 0;
  for (int j = 0; j < m; ++j) q += 0.5 * dt * (nb[j] + nb[j + 1]);
  q += s * nb[m] + (s * s / (2.0 * dt)) * (nb[m + 1] - nb[m]);
  return q;
}

void Schedule::integral_grad(double t, std::vector<double>& out) const {
  double s;
  int m = segment(t, s);
  double dt = 1.0 / (nodes_ - 1);
  out.assign(nodes_, 0.0);
  for (int j = 0; j < m; ++j) {
    out[j] += 0.5 * dt;
    out[j + 1] += 0.5 * dt;
  }
  out[m] += s - s * s / (2.0 * dt);
  out[m + 1] += s * s / (2.0 * dt);
}

double Schedule::beta_lin(const std::vector<double>& nb, double t) const {
  double s;
  int m = segment(t, s);
  double dt = 1.0 / (nodes_ - 1);
  return nb[m] + (s / dt) * (nb[m + 1] - nb[m]);
}

double Schedule::beta_lin_slope(const std::vector<double>& nb, double t) const {
  double s;
  int m = segment(t, s);
  double dt = 1.0 / (nodes_ - 1);
  return (nb[m + 1] - nb[m]) / dt;
}

double Schedule::gamma(const Eval& eval, double t) const {
  return std::exp(-integral(eval.node_beta, t));
}

double Schedule::dgamma_dt(const Eval& eval, double t) const {
  return -beta_lin(eval.node_beta, t) * gamma(eval, t);
}

double Schedule::d2gamma_dt2(const Eval& eval, double t) const {
  double bl = beta_lin(eval.node_beta, t);
  return gamma(eval, t) * (bl * bl - beta_lin_slope(eval.node_beta, t));
}

void Schedule::accumulate_gamma_grad(Eval& eval, double t, double dL_dgamma) const {
  double g = gamma(eval, t);
  std::vector<double> qg;
  integral_grad(t, qg);
  for (int k = 0; k < nodes_; ++k) eval.node_beta_grad[k] += dL_dgamma * (-g) * qg[k];
}

void Schedule::accumulate_dgamma_dt_grad(Eval& eval, double t, double dL) const {
  double s;
  int m = segment(t, s);
  double dt = 1.0 / (nodes_ - 1);
  double g = gamma(eval, t);
  double bl = beta_lin(eval.node_beta, t);
  std::vector<double> qg;
  integral_grad(t, qg);
  // d(-bl*g)/db_k = -dbl/db_k * g + bl * g * dQ/db_k
  for (int k = 0; k < nodes_; ++k) eval.node_beta_grad[k] += dL * bl * g * qg[k];
  eval.node_beta_grad[m] += dL * (-(1.0 - s / dt)) * g;
  eval.node_beta_grad[m + 1] += dL * (-(s / dt)) * g;
}

void Schedule::accumulate_d2gamma_dt2_grad(Eval& eval, double t, double dL) const {
  double s;
  int m = segment(t, s);
  double dt = 1.0 / (nodes_ - 1);
  double g = gamma(eval, t);
  double bl = beta_lin(eval.node_beta, t);
  double slope = beta_lin_slope(eval.node_beta, t);
  std::vector<double> qg;
  integral_grad(t, qg);
  double f_over_g = bl * bl - slope;
  for (int k = 0; k < nodes_; ++k)
    eval.node_beta_grad[k] += dL * (-g) * qg[k] * f_over_g;
  // through bl
  eval.node_beta_grad[m] += dL * g * 2.0 * bl * (1.0 - s / dt);
  eval.node_beta_grad[m + 1] += dL * g * 2.0 * bl * (s / dt);
  // through the slope
  eval.node_beta_grad[m] += dL * g * (1.0 / dt);
  eval.node_beta_grad[m + 1] += dL * g * (-1.0 / dt);
}

void Schedule::backward(Eval& eval) {
  for (int k = 0; k < nodes_; ++k) {
    if (eval.node_beta_grad[k] != 0.0)
      raw_beta_backward(eval, k * eval.dt, eval.node_beta_grad[k]);
  }
  for (const auto& [t, g] : eval.point_grads)
    if (g != 0.0) raw_beta_backward(eval, t, g);
  if (embed_dim_ > 0) {
    nn::Tensor pooled({x_channels_});
    pooled.data = pooled_means(eval.x, x_channels_);
    embed_net_.forward(pooled);  // restore caches
    nn::Tensor gout({embed_dim_});
    gout.data = eval.embed_grad;
    embed_net_.backward(gout);
  }
  std::fill(eval.node_beta_grad.begin(), eval.node_beta_grad.end(), 0.0);
  eval.point_grads.clear();
  std::fill(eval.embed_grad.begin(), eval.embed_grad.end(), 0.0);
}

}  // namespace zmd::diffusion
