#include "zmd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "zmd/optics.hpp"

namespace zmd::metrics {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01, kK2 = 0.03;
constexpr double kWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

std::vector<double> gaussian_window() {
  std::vector<double> w(kWindow);
  double sum = 0;
  for (int i = 0; i < kWindow; ++i) {
    double d = i - (kWindow - 1) / 2.0;
    w[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

/// Valid-region separable Gaussian filter: output is (w-10) x (h-10).
RealImage filter_valid(const RealImage& img, const std::vector<double>& win) {
  RealImage tmp(img.width - kWindow + 1, img.height, img.pitch);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < tmp.width; ++x) {
      double s = 0;
      for (int k = 0; k < kWindow; ++k) s += win[k] * img.at(x + k, y);
      tmp.at(x, y) = s;
    }
  RealImage out(tmp.width, img.height - kWindow + 1, img.pitch);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      double s = 0;
      for (int k = 0; k < kWindow; ++k) s += win[k] * tmp.at(x, y + k);
      out.at(x, y) = s;
    }
  return out;
}

/// 2x2 mean pool with floor division of the size.
RealImage downsample2(const RealImage& img) {
  RealImage out(img.width / 2, img.height / 2, img.pitch * 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      out.at(x, y) = 0.25 * (img.at(2 * x, 2 * y) + img.at(2 * x + 1, 2 * y) +
                             img.at(2 * x, 2 * y + 1) + img.at(2 * x + 1, 2 * y + 1));
  return out;
}

struct SsimParts {
  double luminance = 0;  // mean of the l term
  double cs = 0;         // mean of the contrast-structure term
};

SsimParts ssim_parts(const RealImage& a, const RealImage& b, double range) {
  auto win = gaussian_window();
  RealImage mu_a = filter_valid(a, win), mu_b = filter_valid(b, win);
  RealImage aa(a.width, a.height, a.pitch), bb = aa, ab = aa;
  for (size_t i = 0; i < a.data.size(); ++i) {
    aa.data[i] = a.data[i] * a.data[i];
    bb.data[i] = b.data[i] * b.data[i];
    ab.data[i] = a.data[i] * b.data[i];
  }
  RealImage saa = filter_valid(aa, win), sbb = filter_valid(bb, win),
            sab = filter_valid(ab, win);
  double c1 = (kK1 * range) * (kK1 * range);
  double c2 = (kK2 * range) * (kK2 * range);
  SsimParts parts;
  size_t n = mu_a.data.size();
  for (size_t i = 0; i < n; ++i) {
    double ma = mu_a.data[i], mb = mu_b.data[i];
    double va = saa.data[i] - ma * ma;
    double vb = sbb.data[i] - mb * mb;
    double cov = sab.data[i] - ma * mb;
    parts.luminance += (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
    parts.cs += (2 * cov + c2) / (va + vb + c2);
  }
  parts.luminance /= static_cast<double>(n);
  parts.cs /= static_cast<double>(n);
  return parts;
}

double joint_range(const RealImage& a, const RealImage& b) {
  double lo = a.data[0], hi = a.data[0];
  for (double v : a.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : b.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // shift to non-negative, then the maximum is the span
  double range = hi - lo;
  return range > 0 ? range : 1.0;
}

}  // namespace

double mae(const RealImage& a, const RealImage& b) {
  if (!a.same_grid(b)) throw InvalidInput("mae: grid mismatch");
  double ma = a.mean(), mb = b.mean();
  double acc = 0;
  for (size_t i = 0; i < a.data.size(); ++i)
    acc += std::abs((a.data[i] - ma) - (b.data[i] - mb));
  return acc / static_cast<double>(a.data.size());
}

double ssim(const RealImage& a, const RealImage& b) {
  if (!a.same_grid(b)) throw InvalidInput("ssim: grid mismatch");
  if (a.width < kWindow || a.height < kWindow)
    throw InvalidInput("ssim: image smaller than the 11x11 window");
  SsimParts p = ssim_parts(a, b, joint_range(a, b));
  return p.luminance * p.cs;
}

double ms_ssim(const RealImage& a, const RealImage& b, int levels) {
  if (!a.same_grid(b)) throw InvalidInput("ms_ssim: grid mismatch");
  if (levels < 1 || levels > 5) throw InvalidInput("ms_ssim: levels must be in [1,5]");
  int min_dim = std::min(a.width, a.height);
  int max_levels = 0;
  while (max_levels < levels && (min_dim >> max_levels) >= kWindow) ++max_levels;
  if (max_levels == 0) throw InvalidInput("ms_ssim: image smaller than the 11x11 window");
  if (max_levels < levels) {
    optics::warn("ms_ssim: image too small for " + std::to_string(levels) +
                 " levels, reduced to " + std::to_string(max_levels));
    levels = max_levels;
  }
  double weight_sum = 0;
  for (int l = 0; l < levels; ++l) weight_sum += kWeights[l];

  double range = joint_range(a, b);
  RealImage ca = a, cb = b;
  double score = 1.0;
  for (int l = 0; l < levels; ++l) {
    SsimParts p = ssim_parts(ca, cb, range);
    double w = kWeights[l] / weight_sum;
    double term = (l == levels - 1) ? p.luminance * p.cs : p.cs;
    // negative contrast terms would make fractional powers undefined
    score *= std::copysign(std::pow(std::abs(term), w), term);
    if (l + 1 < levels) {
      ca = downsample2(ca);
      cb = downsample2(cb);
    }
  }
  return score;
}

void MetricReport::finalize() {
  size_t n = samples.size();
  ms_ssim_mean = ms_ssim_std = mae_mean = mae_std = 0;
  if (n == 0) return;
  for (const auto& s : samples) {
    ms_ssim_mean += s.ms_ssim;
    mae_mean += s.mae;
  }
  ms_ssim_mean /= static_cast<double>(n);
  mae_mean /= static_cast<double>(n);
  if (n > 1) {
    for (const auto& s : samples) {
      ms_ssim_std += (s.ms_ssim - ms_ssim_mean) * (s.ms_ssim - ms_ssim_mean);
      mae_std += (s.mae - mae_mean) * (s.mae - mae_mean);
    }
    ms_ssim_std = std::sqrt(ms_ssim_std / static_cast<double>(n - 1));
    mae_std = std::sqrt(mae_std / static_cast<double>(n - 1));
  }
}

std::string MetricReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "sample_id,ms_ssim,mae\n";
  for (const auto& s : samples) os << s.id << "," << s.ms_ssim << "," << s.mae << "\n";
  return os.str();
}

}  // namespace zmd::metrics
