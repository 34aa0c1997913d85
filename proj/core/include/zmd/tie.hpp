#pragma once

#include <array>
#include <vector>

#include "zmd/image.hpp"

namespace zmd::tie {

/// Axial intensity derivative with a tag naming the differentiated
/// variable: physical defocus z or the chromatic variable xi = lambda*z.
struct AxialDerivative {
  enum class Variable { Z, Xi };
  RealImage d;
  Variable var = Variable::Z;
};

/// Tikhonov default: 1e-3 * mean over bins of 4 pi^2 |k|^2.
double default_regularization(int width, int height, double pitch);

/// Spectral inverse Laplacian with Tikhonov-regularized denominator
/// -4 pi^2 (kx^2 + ky^2) - eps and the DC bin forced to zero. Output has
/// zero mean.
RealImage inverse_laplacian(const RealImage& g, double eps);

/// Spectral partial derivatives (periodic).
RealImage gradient_x(const RealImage& g);
RealImage gradient_y(const RealImage& g);
RealImage divergence(const RealImage& vx, const RealImage& vy);

/// Pure-phase solver: phi = invlap((-k / I0) dI/dz). Zero-mean gauge.
PhaseMap solve_pure_phase(const AxialDerivative& didz, double i0, double k, double eps);

/// Teague solver:
/// phi = -k invlap( div( (1/max(I, floor)) grad invlap(dI/dz) ) ).
PhaseMap solve_teague(const AxialDerivative& didz, const RealImage& i, double k,
                      double eps, double intensity_floor);

/// Chromatic-variable solver: Teague form of
/// -2 pi dI/dxi = div(I grad phi), i.e. k replaced by 2 pi.
PhaseMap solve_tie_xi(const AxialDerivative& didxi, const RealImage& i, double eps,
                      double intensity_floor);

/// Centered finite difference (I+ - I-) / (2 dz).
AxialDerivative derivative_2shot(const RealImage& i_plus, const RealImage& i_minus, double dz);

/// Per-pixel least-squares polynomial fit of I(z); returns dP/dz at z=0.
/// z is normalized to [-1, 1] for conditioning.
AxialDerivative derivative_polyfit(const std::vector<RealImage>& stack,
                                   const std::vector<double>& zs, int degree);

/// dI/dxi at xi_g via the three (xi_c, I_c) points per pixel. Default is a
/// least-squares slope through all channels; two_point uses only the
/// extreme wavelengths.
AxialDerivative derivative_chromatic(const std::array<RealImage, 3>& channels,
                                     const std::array<double, 3>& lambdas, double z,
                                     bool two_point = false);

/// Diagnostic for Teague's conservativity assumption: relative L2
/// mismatch between I grad(phi) for the reconstructed phi and the target
/// field -k grad invlap(dI/dz). Near zero when the assumption holds.
double teague_residual(const AxialDerivative& didz, const RealImage& i, double k,
                       double eps, double intensity_floor);

}  // namespace zmd::tie
