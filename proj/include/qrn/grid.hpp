#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "qrn/operators.hpp"

namespace qrn {

// Uniform periodic grid on [-L, L) used to realize position/momentum pairs
// as finite matrices. hbar is carried explicitly so uncertainty bounds stay
// dimensionally honest.
struct GridConfig {
  int n = 256;
  double half_width = 10.0;
  double hbar = 1.0;

  double step() const { return 2.0 * half_width / n; }
  double point(int j) const { return -half_width + j * step(); }
};

struct GridOperators {
  GridConfig config;
  HermitianOperator position;
  HermitianOperator momentum;
};

// Position is diagonal on the grid; momentum is the Fourier spectral
// derivative, a circulant matrix built from the unitary DFT. The canonical
// commutation relation holds on states supported away from the boundary,
// not elementwise.
inline GridOperators grid_operators(const GridConfig& cfg) {
  if (cfg.n < 2) throw Error(ErrorKind::invalid_argument, "grid needs at least 2 points");
  const int n = cfg.n;
  RealVector x(n);
  for (int j = 0; j < n; ++j) x(j) = cfg.point(j);
  HermitianOperator q = HermitianOperator::diagonal(x, "Q");

  // Wave numbers in FFT order; for even n the Nyquist mode maps to -pi/step.
  RealVector k(n);
  const double dk = 2.0 * std::numbers::pi / (n * cfg.step());
  for (int m = 0; m < n; ++m) {
    int folded = (m < (n + 1) / 2) ? m : m - n;
    k(m) = dk * folded;
  }

  Matrix p = Matrix::Zero(n, n);
  // P_{jl} = (1/n) sum_m hbar k_m e^{2 pi i m (j-l)/n}; store one circulant row.
  ComplexVector row(n);
  for (int diff = 0; diff < n; ++diff) {
    Complex acc(0.0, 0.0);
    for (int m = 0; m < n; ++m) {
      double phase = 2.0 * std::numbers::pi * m * diff / n;
      acc += cfg.hbar * k(m) * Complex(std::cos(phase), std::sin(phase));
    }
    row(diff) = acc / static_cast<double>(n);
  }
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) p(j, l) = row(((j - l) % n + n) % n);
  HermitianOperator pop(std::move(p), "P");
  return {cfg, std::move(q), std::move(pop)};
}

// Normalized packet exp(-(x-center)^2/(4 sigma^2) + i p0 x / hbar): position
// density is Gaussian with standard deviation sigma.
inline ComplexVector gaussian_packet_vector(const GridConfig& cfg, double center, double sigma,
                                            double momentum = 0.0) {
  if (sigma <= 0.0) throw Error(ErrorKind::invalid_argument, "packet width must be positive");
  ComplexVector psi(cfg.n);
  for (int j = 0; j < cfg.n; ++j) {
    double x = cfg.point(j);
    double amp = std::exp(-(x - center) * (x - center) / (4.0 * sigma * sigma));
    double phase = momentum * x / cfg.hbar;
    psi(j) = amp * Complex(std::cos(phase), std::sin(phase));
  }
  double norm = psi.norm();
  if (norm <= 0.0) throw Error(ErrorKind::grid_too_coarse, "packet vanished on the grid");
  return psi / norm;
}

inline DensityMatrix gaussian_packet(const GridConfig& cfg, double center, double sigma,
                                     double momentum = 0.0) {
  return DensityMatrix::pure(gaussian_packet_vector(cfg, center, sigma, momentum));
}

// Point mass on the grid site closest to x.
inline DensityMatrix grid_point_state(const GridConfig& cfg, double x) {
  int best = 0;
  double best_d = std::abs(cfg.point(0) - x);
  for (int j = 1; j < cfg.n; ++j) {
    double d = std::abs(cfg.point(j) - x);
    if (d < best_d) {
      best = j;
      best_d = d;
    }
  }
  ComplexVector psi = ComplexVector::Zero(cfg.n);
  psi(best) = 1.0;
  return DensityMatrix::pure(psi);
}

}  // namespace qrn
