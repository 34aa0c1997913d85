#pragma once

#include <memory>
#include <string>
#include <vector>

#include "zmd/image.hpp"
#include "zmd/rng.hpp"

namespace zmd::nn {

/// Dense f64 tensor; shape {C,H,W} for feature maps, {N} for vectors.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    size_t n = 1;
    for (int d : shape) {
      if (d <= 0) throw InvalidInput("Tensor: non-positive dimension");
      n *= static_cast<size_t>(d);
    }
    data.assign(n, 0.0);
  }
  size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

/// One layer of the chain. forward caches whatever backward needs; backward
/// accumulates parameter gradients and returns the input gradient.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& in) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<int> output_shape(const std::vector<int>& in) const = 0;
  virtual void init(Rng& rng) {}
  virtual std::vector<double>* params() { return nullptr; }
  virtual std::vector<double>* grads() { return nullptr; }
  virtual void collect(std::vector<std::vector<double>*>& p,
                       std::vector<std::vector<double>*>& g) {
    if (params()) {
      p.push_back(params());
      g.push_back(grads());
    }
  }
};

/// k x k convolution with periodic padding, stride 1, same spatial size.
class Conv2d : public Layer {
 public:
  Conv2d(int in_ch, int out_ch, int kernel);
  Tensor forward(const Tensor& in) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<int> output_shape(const std::vector<int>& in) const override;
  void init(Rng& rng) override;
  std::vector<double>* params() override { return &params_; }
  std::vector<double>* grads() override { return &grads_; }
  int param_count() const { return in_ch_ * out_ch_ * k_ * k_ + out_ch_; }

 private:
  int in_ch_, out_ch_, k_;
  std::vector<double> params_;  // weights [oc][ic][ky][kx] then biases [oc]
  std::vector<double> grads_;
  Tensor cached_in_;
};

/// Fully connected layer on 1-D tensors.
class Dense : public Layer {
 public:
  Dense(int in_dim, int out_dim);
  Tensor forward(const Tensor& in) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<int> output_shape(const std::vector<int>& in) const override;
  void init(Rng& rng) override;
  std::vector<double>* params() override { return &params_; }
  std::vector<double>* grads() override { return &grads_; }

 private:
  int in_, out_;
  std::vector<double> params_;  // weights [out][in] then biases [out]
  std::vector<double> grads_;
  Tensor cached_in_;
};

/// Smooth activation x * sigmoid(x).
class SiLU : public Layer {
 public:
  Tensor forward(const Tensor& in) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<int> output_shape(const std::vector<int>& in) const override {
    return in;
  }

 private:
  Tensor cached_in_;
};

/// Mean over spatial dims: {C,H,W} -> {C}. Identity on 1-D input.
class ChannelMeanPool : public Layer {
 public:
  Tensor forward(const Tensor& in) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<int> output_shape(const std::vector<int>& in) const override;

 private:
  std::vector<int> cached_shape_;
};

class Network;

/// out = in + inner(in); shapes must match.
class ResidualBlock : public Layer {
 public:
  explicit ResidualBlock(std::unique_ptr<Network> inner);
  ~ResidualBlock() override;
  Tensor forward(const Tensor& in) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<int> output_shape(const std::vector<int>& in) const override;
  void init(Rng& rng) override;
  void collect(std::vector<std::vector<double>*>& p,
               std::vector<std::vector<double>*>& g) override;

 private:
  std::unique_ptr<Network> inner_;
};

/// Sequential chain of layers with shape validation at build time.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<int> input_shape) : input_shape_(std::move(input_shape)) {}

  Network& add(std::unique_ptr<Layer> layer);
  template <typename L, typename... Args>
  Network& emplace(Args&&... args) {
    return add(std::make_unique<L>(std::forward<Args>(args)...));
  }

  Tensor forward(const Tensor& in);
  /// Accumulates parameter gradients; returns gradient w.r.t. the input.
  Tensor backward(const Tensor& grad_out);

  void init(Rng& rng);
  void zero_grads();
  void collect(std::vector<std::vector<double>*>& p,
               std::vector<std::vector<double>*>& g);
  size_t param_count();
  std::vector<double> flatten_params();
  void unflatten_params(const std::vector<double>& flat);

  const std::vector<int>& input_shape() const { return input_shape_; }
  std::vector<int> final_shape() const;

 private:
  std::vector<int> input_shape_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool sgd = false;  // plain SGD fallback
};

/// Adam/SGD over a set of parameter blocks. Bitwise deterministic.
class Optimizer {
 public:
  Optimizer(std::vector<std::vector<double>*> params,
            std::vector<std::vector<double>*> grads, AdamConfig cfg);
  void step();
  int64_t steps_taken() const { return t_; }
  /// Raw moment state for checkpointing.
  std::vector<double> state() const;
  void restore(const std::vector<double>& state, int64_t steps);

 private:
  std::vector<std::vector<double>*> params_, grads_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  int64_t t_ = 0;
};

}  // namespace zmd::nn
