#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "qrn/collimation.hpp"
#include "qrn/operators.hpp"
#include "qrn/region.hpp"
#include "qrn/rng.hpp"

namespace qrn {

// Yes/no experiment: outcome 1 is the projector P1, outcome 0 its
// complement, repeated N times on identically prepared systems read out by
// a detector of half-resolution R.
struct DichotomicExperiment {
  Projector p1;
  DensityMatrix rho0;
  double region_radius = 0.0;
  std::uint64_t trials = 1;
  double resolution = 0.0;      // detector half-resolution R
  double lambda = 0.5;          // band exponent in (0,1)
  std::uint64_t seed = 0;

  DichotomicExperiment(Projector p1_, DensityMatrix rho0_)
      : p1(std::move(p1_)), rho0(std::move(rho0_)) {
    if (p1.dim() != rho0.dim())
      throw Error(ErrorKind::dimension_mismatch, "projector/state dims differ");
  }
};

struct FrequencyReport {
  double p_true = 0.0;
  std::uint64_t successes = 0;  // J
  double frequency = 0.0;       // x = J / N
  double chebyshev_delta = 0.0; // band half-width N^{-(1-lambda)/2}
  bool in_band = false;
};

inline double outcome_probability(const DensityMatrix& rho, const Projector& p) {
  return trace_inner(rho, p.op());
}

// Seeded Bernoulli chain standing in for the N-copy average measurement.
inline FrequencyReport simulate_frequencies(const DichotomicExperiment& exp) {
  if (exp.trials < 1) throw Error(ErrorKind::invalid_argument, "needs at least one trial");
  if (!(exp.lambda > 0.0 && exp.lambda < 1.0))
    throw Error(ErrorKind::invalid_argument, "lambda must lie in (0,1)");
  FrequencyReport report;
  report.p_true = outcome_probability(exp.rho0, exp.p1);
  Rng rng(exp.seed);
  std::uint64_t j = 0;
  for (std::uint64_t t = 0; t < exp.trials; ++t)
    if (rng.bernoulli(report.p_true)) ++j;
  report.successes = j;
  report.frequency = static_cast<double>(j) / static_cast<double>(exp.trials);
  report.chebyshev_delta =
      std::pow(static_cast<double>(exp.trials), -(1.0 - exp.lambda) / 2.0);
  report.in_band = std::abs(report.frequency - report.p_true) <= report.chebyshev_delta;
  return report;
}

// (1/N) sum_i I x ... x P1 x ... x I; its spectrum is {j/N} and encodes the
// relative frequency of outcome 1 over N copies.
inline HermitianOperator build_average_operator(const Projector& p1, int copies) {
  if (copies < 1) throw Error(ErrorKind::invalid_argument, "needs at least one copy");
  const int d = p1.dim();
  double total_dim = std::pow(static_cast<double>(d), copies);
  if (total_dim > 4096.0 + 0.5)
    throw Error(ErrorKind::dimension_limit,
                "tensor power dimension " + std::to_string(total_dim) + " exceeds 4096");
  const int full = static_cast<int>(total_dim + 0.5);
  Matrix acc = Matrix::Zero(full, full);
  for (int slot = 0; slot < copies; ++slot) {
    Matrix term = Matrix::Identity(1, 1);
    for (int k = 0; k < copies; ++k)
      term = kron(term, k == slot ? p1.entries() : Matrix::Identity(d, d));
    acc += term;
  }
  acc /= static_cast<double>(copies);
  return HermitianOperator(std::move(acc), "Qavg");
}

// Concentration bound mu(|x - <x>| >= delta) <= variance / delta^2.
inline double chebyshev_bound(double variance, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::invalid_argument, "delta must be positive");
  if (variance < 0.0) throw Error(ErrorKind::invalid_argument, "variance must be >= 0");
  return variance / (delta * delta);
}

// Smallest N with N > p q / (eps R^2): copies needed before the detector
// band swamps the frequency spread.
inline std::uint64_t required_copies(double p, double eps, double resolution) {
  if (!(p >= 0.0 && p <= 1.0))
    throw Error(ErrorKind::invalid_argument, "probability out of [0,1]");
  if (!(eps > 0.0) || !(resolution > 0.0))
    throw Error(ErrorKind::invalid_argument, "eps and resolution must be positive");
  double raw = p * (1.0 - p) / (eps * resolution * resolution);
  return static_cast<std::uint64_t>(std::ceil(raw * (1.0 - 1e-12)));
}

// Outcome probabilities are eps-stable across a radius-eps neighbourhood:
// |Tr(rho P(i)) - Tr(rho0 P(i))| < eps for both outcomes.
inline TheoremReport check_probability_stability(const StateRegion& w, const Projector& p1,
                                                 double eps) {
  if (w.radius() > eps)
    throw Error(ErrorKind::hypothesis_not_met, "region radius exceeds the stability budget eps");
  Projector p0 = p1.complement();
  double c1 = outcome_probability(w.center(), p1);
  double c0 = outcome_probability(w.center(), p0);
  std::vector<double> margins;
  margins.reserve(2 * w.size());
  for (const auto& rho : w.samples()) {
    margins.push_back(eps - std::abs(outcome_probability(rho, p1) - c1));
    margins.push_back(eps - std::abs(outcome_probability(rho, p0) - c0));
  }
  return make_report("outcome_probability_stability", std::move(margins));
}

}  // namespace qrn
