#include "zmd/tie.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "zmd/fft.hpp"

namespace zmd::tie {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Spectrum {
  std::vector<fft::cd> buf;
  int pw = 0, ph = 0;
  int w = 0, h = 0;
  double pitch = 0;
};

Spectrum forward(const RealImage& g) {
  Spectrum s;
  s.w = g.width;
  s.h = g.height;
  s.pitch = g.pitch;
  s.pw = fft::next_pow2(g.width);
  s.ph = fft::next_pow2(g.height);
  s.buf.assign(static_cast<size_t>(s.pw) * s.ph, {0.0, 0.0});
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      s.buf[static_cast<size_t>(y) * s.pw + x] = g.at(x, y);
  fft::transform2d(s.buf.data(), s.pw, s.ph, false);
  return s;
}

RealImage backward(Spectrum& s) {
  fft::transform2d(s.buf.data(), s.pw, s.ph, true);
  RealImage out(s.w, s.h, s.pitch);
  for (int y = 0; y < s.h; ++y)
    for (int x = 0; x < s.w; ++x)
      out.at(x, y) = s.buf[static_cast<size_t>(y) * s.pw + x].real();
  return out;
}

// Odd spectral operators zero the Nyquist bins to keep real output real.
bool nyquist(int i, int n) { return n % 2 == 0 && i == n / 2; }

RealImage spectral_derivative(const RealImage& g, bool along_x) {
  Spectrum s = forward(g);
  for (int y = 0; y < s.ph; ++y) {
    double fy = fft::freq(y, s.ph, s.pitch);
    for (int x = 0; x < s.pw; ++x) {
      double fx = fft::freq(x, s.pw, s.pitch);
      fft::cd mult(0.0, kTwoPi * (along_x ? fx : fy));
      if (along_x ? nyquist(x, s.pw) : nyquist(y, s.ph)) mult = 0.0;
      s.buf[static_cast<size_t>(y) * s.pw + x] *= mult;
    }
  }
  return backward(s);
}

}  // namespace

double default_regularization(int width, int height, double pitch) {
  int pw = fft::next_pow2(width), ph = fft::next_pow2(height);
  double sum = 0;
  for (int y = 0; y < ph; ++y) {
    double fy = fft::freq(y, ph, pitch);
    for (int x = 0; x < pw; ++x) {
      double fx = fft::freq(x, pw, pitch);
      sum += 4.0 * std::numbers::pi * std::numbers::pi * (fx * fx + fy * fy);
    }
  }
  return 1e-3 * sum / (static_cast<double>(pw) * ph);
}

RealImage inverse_laplacian(const RealImage& g, double eps) {
  if (eps < 0) throw InvalidInput("inverse_laplacian: eps must be >= 0");
  Spectrum s = forward(g);
  for (int y = 0; y < s.ph; ++y) {
    double fy = fft::freq(y, s.ph, s.pitch);
    for (int x = 0; x < s.pw; ++x) {
      double fx = fft::freq(x, s.pw, s.pitch);
      double denom = -4.0 * std::numbers::pi * std::numbers::pi * (fx * fx + fy * fy) - eps;
      auto& v = s.buf[static_cast<size_t>(y) * s.pw + x];
      if (x == 0 && y == 0)
        v = 0.0;  // DC nulled regardless of eps
      else
        v /= denom;
    }
  }
  RealImage out = backward(s);
  out.remove_mean();
  return out;
}

RealImage gradient_x(const RealImage& g) { return spectral_derivative(g, true); }
RealImage gradient_y(const RealImage& g) { return spectral_derivative(g, false); }

RealImage divergence(const RealImage& vx, const RealImage& vy) {
  if (!vx.same_grid(vy)) throw InvalidInput("divergence: grid mismatch");
  RealImage dx = gradient_x(vx);
  RealImage dy = gradient_y(vy);
  for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] += dy.data[i];
  return dx;
}

PhaseMap solve_pure_phase(const AxialDerivative& didz, double i0, double k, double eps) {
  if (didz.var != AxialDerivative::Variable::Z)
    throw InvalidInput("solve_pure_phase: derivative must be tagged z");
  if (!(i0 > 0)) throw InvalidInput("solve_pure_phase: i0 must be > 0");
  RealImage rhs = didz.d;
  for (double& v : rhs.data) v *= -k / i0;
  PhaseMap phi = inverse_laplacian(rhs, eps);
  phi.remove_mean();
  return phi;
}

namespace {

PhaseMap teague_core(const RealImage& didz, const RealImage& i, double k, double eps,
                     double floor) {
  double imax = 0;
  for (double v : i.data) imax = std::max(imax, v);
  if (imax < floor)
    throw InvalidInput("solve_teague: all-dark intensity image (max I < floor)");

  RealImage psi = inverse_laplacian(didz, eps);
  RealImage gx = gradient_x(psi);
  RealImage gy = gradient_y(psi);
  for (size_t j = 0; j < gx.data.size(); ++j) {
    double denom = std::max(i.data[j], floor);
    gx.data[j] /= denom;
    gy.data[j] /= denom;
  }
  RealImage div = divergence(gx, gy);
  for (double& v : div.data) v *= -k;
  PhaseMap phi = inverse_laplacian(div, eps);
  phi.remove_mean();
  return phi;
}

}  // namespace

PhaseMap solve_teague(const AxialDerivative& didz, const RealImage& i, double k,
                      double eps, double intensity_floor) {
  if (didz.var != AxialDerivative::Variable::Z)
    throw InvalidInput("solve_teague: derivative must be tagged z");
  if (!didz.d.same_grid(i)) throw InvalidInput("solve_teague: grid mismatch");
  return teague_core(didz.d, i, k, eps, intensity_floor);
}

PhaseMap solve_tie_xi(const AxialDerivative& didxi, const RealImage& i, double eps,
                      double intensity_floor) {
  if (didxi.var != AxialDerivative::Variable::Xi)
    throw InvalidInput("solve_tie_xi: derivative must be tagged xi");
  if (!didxi.d.same_grid(i)) throw InvalidInput("solve_tie_xi: grid mismatch");
  return teague_core(didxi.d, i, kTwoPi, eps, intensity_floor);
}

AxialDerivative derivative_2shot(const RealImage& i_plus, const RealImage& i_minus,
                                 double dz) {
  if (!i_plus.same_grid(i_minus)) throw InvalidInput("derivative_2shot: grid mismatch");
  if (!(dz > 0)) throw InvalidInput("derivative_2shot: dz must be > 0");
  AxialDerivative out{RealImage(i_plus.width, i_plus.height, i_plus.pitch),
                      AxialDerivative::Variable::Z};
  for (size_t i = 0; i < i_plus.data.size(); ++i)
    out.d.data[i] = (i_plus.data[i] - i_minus.data[i]) / (2.0 * dz);
  return out;
}

AxialDerivative derivative_polyfit(const std::vector<RealImage>& stack,
                                   const std::vector<double>& zs, int degree) {
  if (stack.size() != zs.size())
    throw InvalidInput("derivative_polyfit: stack/zs length mismatch");
  const int nz = static_cast<int>(zs.size());
  if (nz < degree + 1)
    throw InvalidInput("derivative_polyfit: need at least degree+1 planes");
  for (size_t i = 1; i < stack.size(); ++i)
    if (!stack[i].same_grid(stack[0]))
      throw InvalidInput("derivative_polyfit: grid mismatch inside stack");

  double zmin = *std::min_element(zs.begin(), zs.end());
  double zmax = *std::max_element(zs.begin(), zs.end());
  double mid = 0.5 * (zmax + zmin), half = 0.5 * (zmax - zmin);
  if (!(half > 0)) throw InvalidInput("derivative_polyfit: degenerate z range");

  Eigen::MatrixXd design(nz, degree + 1);
  for (int r = 0; r < nz; ++r) {
    double u = (zs[r] - mid) / half;
    double p = 1.0;
    for (int c = 0; c <= degree; ++c) {
      design(r, c) = p;
      p *= u;
    }
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < degree + 1)
    throw InvalidInput("derivative_polyfit: rank-deficient design matrix (duplicate zs?)");
  // shared pseudo-inverse, then one matvec per pixel
  Eigen::MatrixXd pinv = qr.solve(Eigen::MatrixXd::Identity(nz, nz));

  double u0 = (0.0 - mid) / half;
  Eigen::VectorXd dbasis(degree + 1);
  dbasis(0) = 0.0;
  double p = 1.0;
  for (int c = 1; c <= degree; ++c) {
    dbasis(c) = c * p;  // d/du u^c at u0
    p *= u0;
  }
  Eigen::RowVectorXd row = (dbasis.transpose() * pinv) / half;  // chain rule du/dz

  AxialDerivative out{RealImage(stack[0].width, stack[0].height, stack[0].pitch),
                      AxialDerivative::Variable::Z};
  const size_t npix = out.d.data.size();
  for (size_t i = 0; i < npix; ++i) {
    double acc = 0;
    for (int r = 0; r < nz; ++r) acc += row(r) * stack[r].data[i];
    out.d.data[i] = acc;
  }
  return out;
}

AxialDerivative derivative_chromatic(const std::array<RealImage, 3>& channels,
                                     const std::array<double, 3>& lambdas, double z,
                                     bool two_point) {
  if (!(z > 0)) throw InvalidInput("derivative_chromatic: z must be > 0");
  if (!channels[0].same_grid(channels[1]) || !channels[0].same_grid(channels[2]))
    throw InvalidInput("derivative_chromatic: grid mismatch");
  std::array<double, 3> xi = {lambdas[0] * z, lambdas[1] * z, lambdas[2] * z};
  if (xi[0] == xi[1] || xi[0] == xi[2] || xi[1] == xi[2])
    throw InvalidInput("derivative_chromatic: coincident xi values");

  AxialDerivative out{RealImage(channels[0].width, channels[0].height, channels[0].pitch),
                      AxialDerivative::Variable::Xi};
  const size_t npix = out.d.data.size();
  if (two_point) {
    int lo = 0, hi = 0;
    for (int c = 1; c < 3; ++c) {
      if (xi[c] < xi[lo]) lo = c;
      if (xi[c] > xi[hi]) hi = c;
    }
    double dxi = xi[hi] - xi[lo];
    for (size_t i = 0; i < npix; ++i)
      out.d.data[i] = (channels[hi].data[i] - channels[lo].data[i]) / dxi;
    return out;
  }
  double xbar = (xi[0] + xi[1] + xi[2]) / 3.0;
  double sxx = 0;
  for (int c = 0; c < 3; ++c) sxx += (xi[c] - xbar) * (xi[c] - xbar);
  for (size_t i = 0; i < npix; ++i) {
    double ibar = (channels[0].data[i] + channels[1].data[i] + channels[2].data[i]) / 3.0;
    double sxy = 0;
    for (int c = 0; c < 3; ++c) sxy += (xi[c] - xbar) * (channels[c].data[i] - ibar);
    out.d.data[i] = sxy / sxx;
  }
  return out;
}

double teague_residual(const AxialDerivative& didz, const RealImage& i, double k,
                       double eps, double intensity_floor) {
  PhaseMap phi = teague_core(didz.d, i, k, eps, intensity_floor);
  RealImage px = gradient_x(phi), py = gradient_y(phi);
  RealImage psi = inverse_laplacian(didz.d, eps);
  RealImage wx = gradient_x(psi), wy = gradient_y(psi);
  double num = 0, den = 0;
  for (size_t j = 0; j < px.data.size(); ++j) {
    double iv = std::max(i.data[j], intensity_floor);
    double vx = iv * px.data[j], vy = iv * py.data[j];
    double tx = -k * wx.data[j], ty = -k * wy.data[j];
    num += (vx - tx) * (vx - tx) + (vy - ty) * (vy - ty);
    den += tx * tx + ty * ty;
  }
  return den > 0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace zmd::tie
