#pragma once

#include <utility>
#include <vector>

#include "zmd/nn.hpp"

namespace zmd::diffusion {

/// Learnable variance-schedule pair (gamma, beta).
///
/// beta(t, X) = softplus(g(t, e(X))) with g a small MLP and e a learnable
/// embedding of the pooled conditioning X (embed_dim = 0 gives a global,
/// X-independent schedule). gamma(t, X) = exp(-integral_0^t beta_lin) where
/// beta_lin linearly interpolates beta at fixed quadrature nodes, so gamma
/// is strictly decreasing and positive by construction and gamma(0) = 1.
/// The small mismatch between beta and its interpolant is what the
/// schedule-consistency loss trains away.
class Schedule {
 public:
  Schedule(int x_channels, int embed_dim = 0, int hidden = 32, int quad_nodes = 65);

  /// Per-X forward state plus gradient accumulators for one loss evaluation.
  struct Eval {
    std::vector<double> node_beta;       // beta at the fixed nodes
    std::vector<double> node_beta_grad;  // dL/d node_beta, accumulated
    std::vector<double> embed;           // e(X); empty in global mode
    std::vector<double> embed_grad;
    nn::Tensor x;                        // conditioning, kept for backward
    std::vector<std::pair<double, double>> point_grads;  // (t, dL/dbeta(t))
    double dt = 0;
  };

  Eval evaluate(const nn::Tensor& x);

  /// Pointwise rate softplus(g(t, e)); gradients are reported back through
  /// eval.point_grads.
  double beta(const Eval& eval, double t);

  double gamma(const Eval& eval, double t) const;
  /// Exact derivative of the parameterized gamma: -beta_lin(t) * gamma(t).
  double dgamma_dt(const Eval& eval, double t) const;
  double d2gamma_dt2(const Eval& eval, double t) const;

  /// Accumulate dL/d node_beta for a term whose gradient w.r.t. gamma(t),
  /// dgamma_dt(t) or d2gamma_dt2(t) is known.
  void accumulate_gamma_grad(Eval& eval, double t, double dL_dgamma) const;
  void accumulate_dgamma_dt_grad(Eval& eval, double t, double dL) const;
  void accumulate_d2gamma_dt2_grad(Eval& eval, double t, double dL) const;

  /// Push accumulated node/point gradients through the MLP and embedding.
  void backward(Eval& eval);

  void init(Rng& rng);
  void zero_grads();
  void collect(std::vector<std::vector<double>*>& p,
               std::vector<std::vector<double>*>& g);

  int quad_nodes() const { return nodes_; }
  int embed_dim() const { return embed_dim_; }

 private:
  double raw_beta(const std::vector<double>& embed, double t);
  void raw_beta_backward(Eval& eval, double t, double grad);

  // integral of the interpolated rate over [0, t]
  double integral(const std::vector<double>& nb, double t) const;
  void integral_grad(double t, std::vector<double>& out) const;  // d integral / d node
  double beta_lin(const std::vector<double>& nb, double t) const;
  double beta_lin_slope(const std::vector<double>& nb, double t) const;
  int segment(double t, double& s) const;

  int x_channels_, embed_dim_, nodes_;
  nn::Network mlp_;
  nn::Network embed_net_;  // pool + dense; unused in global mode
};

}  // namespace zmd::diffusion
