#include "zmd/nn.hpp"

#include <algorithm>
#include <cmath>

namespace zmd::nn {

namespace {

inline int wrap(int i, int n) {
  int r = i % n;
  return r < 0 ? r + n : r;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

// ---- Conv2d ----

Conv2d::Conv2d(int in_ch, int out_ch, int kernel)
    : in_ch_(in_ch), out_ch_(out_ch), k_(kernel) {
  if (in_ch <= 0 || out_ch <= 0 || kernel <= 0 || kernel % 2 == 0)
    throw InvalidInput("Conv2d: channels must be positive and kernel odd");
  params_.assign(param_count(), 0.0);
  grads_.assign(param_count(), 0.0);
}

void Conv2d::init(Rng& rng) {
  double scale = std::sqrt(2.0 / (in_ch_ * k_ * k_));
  size_t nw = static_cast<size_t>(in_ch_) * out_ch_ * k_ * k_;
  for (size_t i = 0; i < nw; ++i) params_[i] = scale * rng.normal();
  for (size_t i = nw; i < params_.size(); ++i) params_[i] = 0.0;
}

std::vector<int> Conv2d::output_shape(const std::vector<int>& in) const {
  if (in.size() != 3 || in[0] != in_ch_)
    throw InvalidInput("Conv2d: expects {C,H,W} input with matching channels");
  return {out_ch_, in[1], in[2]};
}

Tensor Conv2d::forward(const Tensor& in) {
  auto os = output_shape(in.shape);
  cached_in_ = in;
  const int h = in.shape[1], w = in.shape[2], half = k_ / 2;
  Tensor out(os);
  const size_t hw = static_cast<size_t>(h) * w;
  const double* bias = params_.data() + static_cast<size_t>(in_ch_) * out_ch_ * k_ * k_;
  for (int oc = 0; oc < out_ch_; ++oc) {
    double* op = out.data.data() + oc * hw;
    for (size_t i = 0; i < hw; ++i) op[i] = bias[oc];
    for (int ic = 0; ic < in_ch_; ++ic) {
      const double* ip = in.data.data() + ic * hw;
      const double* wp =
          params_.data() + ((static_cast<size_t>(oc) * in_ch_ + ic) * k_ * k_);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          double acc = 0;
          for (int ky = 0; ky < k_; ++ky) {
            int sy = wrap(y + ky - half, h);
            for (int kx = 0; kx < k_; ++kx) {
              int sx = wrap(x + kx - half, w);
              acc += wp[ky * k_ + kx] * ip[static_cast<size_t>(sy) * w + sx];
            }
          }
          op[static_cast<size_t>(y) * w + x] += acc;
        }
    }
  }
  return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
  const Tensor& in = cached_in_;
  if (in.shape.empty()) throw InvalidInput("Conv2d: backward before forward");
  const int h = in.shape[1], w = in.shape[2], half = k_ / 2;
  const size_t hw = static_cast<size_t>(h) * w;
  Tensor grad_in(in.shape);
  double* gbias = grads_.data() + static_cast<size_t>(in_ch_) * out_ch_ * k_ * k_;
  for (int oc = 0; oc < out_ch_; ++oc) {
    const double* gop = grad_out.data.data() + oc * hw;
    for (size_t i = 0; i < hw; ++i) gbias[oc] += gop[i];
    for (int ic = 0; ic < in_ch_; ++ic) {
      const double* ip = in.data.data() + ic * hw;
      double* gip = grad_in.data.data() + ic * hw;
      const double* wp =
          params_.data() + ((static_cast<size_t>(oc) * in_ch_ + ic) * k_ * k_);
      double* gwp = grads_.data() + ((static_cast<size_t>(oc) * in_ch_ + ic) * k_ * k_);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          double go = gop[static_cast<size_t>(y) * w + x];
          if (go == 0) continue;
          for (int ky = 0; ky < k_; ++ky) {
            int sy = wrap(y + ky - half, h);
            for (int kx = 0; kx < k_; ++kx) {
              int sx = wrap(x + kx - half, w);
              gwp[ky * k_ + kx] += go * ip[static_cast<size_t>(sy) * w + sx];
              gip[static_cast<size_t>(sy) * w + sx] += go * wp[ky * k_ + kx];
            }
          }
        }
    }
  }
  return grad_in;
}

// ---- Dense ----

Dense::Dense(int in_dim, int out_dim) : in_(in_dim), out_(out_dim) {
  if (in_dim <= 0 || out_dim <= 0) throw InvalidInput("Dense: non-positive dims");
  params_.assign(static_cast<size_t>(in_) * out_ + out_, 0.0);
  grads_.assign(params_.size(), 0.0);
}

void Dense::init(Rng& rng) {
  double scale = std::sqrt(2.0 / in_);
  size_t nw = static_cast<size_t>(in_) * out_;
  for (size_t i = 0; i < nw; ++i) params_[i] = scale * rng.normal();
  for (size_t i = nw; i < params_.size(); ++i) params_[i] = 0.0;
}

std::vector<int> Dense::output_shape(const std::vector<int>& in) const {
  if (in.size() != 1 || in[0] != in_)
    throw InvalidInput("Dense: expects 1-D input of matching size");
  return {out_};
}

Tensor Dense::forward(const Tensor& in) {
  auto os = output_shape(in.shape);
  cached_in_ = in;
  Tensor out(os);
  const double* bias = params_.data() + static_cast<size_t>(in_) * out_;
  for (int o = 0; o < out_; ++o) {
    double acc = bias[o];
    const double* wp = params_.data() + static_cast<size_t>(o) * in_;
    for (int i = 0; i < in_; ++i) acc += wp[i] * in.data[i];
    out.data[o] = acc;
  }
  return out;
}

Tensor Dense::backward(const Tensor& grad_out) {
  if (cached_in_.shape.empty()) throw InvalidInput("Dense: backward before forward");
  Tensor grad_in(cached_in_.shape);
  double* gbias = grads_.data() + static_cast<size_t>(in_) * out_;
  for (int o = 0; o < out_; ++o) {
    double go = grad_out.data[o];
    gbias[o] += go;
    const double* wp = params_.data() + static_cast<size_t>(o) * in_;
    double* gwp = grads_.data() + static_cast<size_t>(o) * in_;
    for (int i = 0; i < in_; ++i) {
      gwp[i] += go * cached_in_.data[i];
      grad_in.data[i] += go * wp[i];
    }
  }
  return grad_in;
}

// ---- SiLU ----

Tensor SiLU::forward(const Tensor& in) {
  cached_in_ = in;
  Tensor out(in.shape);
  for (size_t i = 0; i < in.size(); ++i) out.data[i] = in.data[i] * sigmoid(in.data[i]);
  return out;
}

Tensor SiLU::backward(const Tensor& grad_out) {
  Tensor grad_in(cached_in_.shape);
  for (size_t i = 0; i < grad_in.size(); ++i) {
    double x = cached_in_.data[i];
    double s = sigmoid(x);
    grad_in.data[i] = grad_out.data[i] * (s + x * s * (1.0 - s));
  }
  return grad_in;
}

// ---- ChannelMeanPool ----

std::vector<int> ChannelMeanPool::output_shape(const std::vector<int>& in) const {
  if (in.size() == 1) return in;
  if (in.size() == 3) return {in[0]};
  throw InvalidInput("ChannelMeanPool: expects {C,H,W} or {N}");
}

Tensor ChannelMeanPool::forward(const Tensor& in) {
  cached_shape_ = in.shape;
  if (in.shape.size() == 1) return in;
  Tensor out({in.shape[0]});
  size_t hw = static_cast<size_t>(in.shape[1]) * in.shape[2];
  for (int c = 0; c < in.shape[0]; ++c) {
    double s = 0;
    for (size_t i = 0; i < hw; ++i) s += in.data[c * hw + i];
    out.data[c] = s / static_cast<double>(hw);
  }
  return out;
}

Tensor ChannelMeanPool::backward(const Tensor& grad_out) {
  if (cached_shape_.size() == 1) return grad_out;
  Tensor grad_in(cached_shape_);
  size_t hw = static_cast<size_t>(cached_shape_[1]) * cached_shape_[2];
  for (int c = 0; c < cached_shape_[0]; ++c)
    for (size_t i = 0; i < hw; ++i)
      grad_in.data[c * hw + i] = grad_out.data[c] / static_cast<double>(hw);
  return grad_in;
}

// ---- ResidualBlock ----

ResidualBlock::ResidualBlock(std::unique_ptr<Network> inner) : inner_(std::move(inner)) {}
ResidualBlock::~ResidualBlock() = default;

std::vector<int> ResidualBlock::output_shape(const std::vector<int>& in) const {
  Network* n = inner_.get();
  std::vector<int> shape = in;
  // validated at build through Network::add
  if (n->final_shape() != in)
    throw InvalidInput("ResidualBlock: inner network must preserve shape");
  return shape;
}

Tensor ResidualBlock::forward(const Tensor& in) {
  Tensor out = inner_->forward(in);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] += in.data[i];
  return out;
}

Tensor ResidualBlock::backward(const Tensor& grad_out) {
  Tensor grad_in = inner_->backward(grad_out);
  for (size_t i = 0; i < grad_in.size(); ++i) grad_in.data[i] += grad_out.data[i];
  return grad_in;
}

void ResidualBlock::init(Rng& rng) { inner_->init(rng); }

void ResidualBlock::collect(std::vector<std::vector<double>*>& p,
                            std::vector<std::vector<double>*>& g) {
  inner_->collect(p, g);
}

// ---- Network ----

Network& Network::add(std::unique_ptr<Layer> layer) {
  std::vector<int> cur = layers_.empty() ? input_shape_ : final_shape();
  layer->output_shape(cur);  // throws on mismatch
  layers_.push_back(std::move(layer));
  return *this;
}

std::vector<int> Network::final_shape() const {
  std::vector<int> cur = input_shape_;
  for (const auto& l : layers_) cur = l->output_shape(cur);
  return cur;
}

Tensor Network::forward(const Tensor& in) {
  if (in.shape != input_shape_) throw InvalidInput("Network: input shape mismatch");
  Tensor cur = in;
  for (auto& l : layers_) cur = l->forward(cur);
  return cur;
}

Tensor Network::backward(const Tensor& grad_out) {
  Tensor cur = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
  return cur;
}

void Network::init(Rng& rng) {
  for (auto& l : layers_) l->init(rng);
}

void Network::zero_grads() {
  std::vector<std::vector<double>*> p, g;
  collect(p, g);
  for (auto* gr : g) std::fill(gr->begin(), gr->end(), 0.0);
}

void Network::collect(std::vector<std::vector<double>*>& p,
                      std::vector<std::vector<double>*>& g) {
  for (auto& l : layers_) l->collect(p, g);
}

size_t Network::param_count() {
  std::vector<std::vector<double>*> p, g;
  collect(p, g);
  size_t n = 0;
  for (auto* pp : p) n += pp->size();
  return n;
}

std::vector<double> Network::flatten_params() {
  std::vector<std::vector<double>*> p, g;
  collect(p, g);
  std::vector<double> flat;
  for (auto* pp : p) flat.insert(flat.end(), pp->begin(), pp->end());
  return flat;
}

void Network::unflatten_params(const std::vector<double>& flat) {
  std::vector<std::vector<double>*> p, g;
  collect(p, g);
  size_t off = 0;
  for (auto* pp : p) {
    if (off + pp->size() > flat.size())
      throw InvalidInput("Network: parameter vector too short");
    std::copy(flat.begin() + off, flat.begin() + off + pp->size(), pp->begin());
    off += pp->size();
  }
  if (off != flat.size()) throw InvalidInput("Network: parameter vector size mismatch");
}

// ---- Optimizer ----

Optimizer::Optimizer(std::vector<std::vector<double>*> params,
                     std::vector<std::vector<double>*> grads, AdamConfig cfg)
    : params_(std::move(params)), grads_(std::move(grads)), cfg_(cfg) {
  if (params_.size() != grads_.size())
    throw InvalidInput("Optimizer: params/grads block count mismatch");
  for (auto* p : params_) {
    m_.emplace_back(p->size(), 0.0);
    v_.emplace_back(p->size(), 0.0);
  }
}

void Optimizer::step() {
  ++t_;
  if (cfg_.sgd) {
    for (size_t b = 0; b < params_.size(); ++b) {
      auto& p = *params_[b];
      const auto& g = *grads_[b];
      for (size_t i = 0; i < p.size(); ++i) p[i] -= cfg_.lr * g[i];
    }
    return;
  }
  double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t b = 0; b < params_.size(); ++b) {
    auto& p = *params_[b];
    const auto& g = *grads_[b];
    auto& m = m_[b];
    auto& v = v_[b];
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

std::vector<double> Optimizer::state() const {
  std::vector<double> s;
  for (const auto& m : m_) s.insert(s.end(), m.begin(), m.end());
  for (const auto& v : v_) s.insert(s.end(), v.begin(), v.end());
  return s;
}

void Optimizer::restore(const std::vector<double>& state, int64_t steps) {
  size_t off = 0;
  for (auto& m : m_) {
    std::copy(state.begin() + off, state.begin() + off + m.size(), m.begin());
    off += m.size();
  }
  for (auto& v : v_) {
    std::copy(state.begin() + off, state.begin() + off + v.size(), v.begin());
    off += v.size();
  }
  if (off != state.size()) throw InvalidInput("Optimizer: state size mismatch");
  t_ = steps;
}

}  // namespace zmd::nn
