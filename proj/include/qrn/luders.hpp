#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qrn/collimation.hpp"
#include "qrn/operators.hpp"
#include "qrn/region.hpp"

namespace qrn {

// Post-measurement state update for outcome P: rho -> P rho P / Tr(P rho).
inline DensityMatrix luders_transform(const DensityMatrix& rho0, const Projector& p) {
  if (rho0.dim() != p.dim()) throw Error(ErrorKind::dimension_mismatch, "state/projector dims");
  double weight = trace_inner(rho0, p.op());
  if (weight <= tol::weight_floor)
    throw Error(ErrorKind::zero_branch,
                "branch weight " + std::to_string(weight) + " vanishes");
  Matrix prp = p.entries() * rho0.entries() * p.entries();
  return DensityMatrix::trusted(prp / weight);
}

// States the system may occupy right after a value of A was registered in
// the interval: Tr((I-P) rho) < eps, P the interval's spectral projector.
// (I-P) rho (I-P) is positive, so the symmetrized form reduces to the trace.
struct PersistenceRegionSpec {
  HermitianOperator a;
  SlitSpec interval;
  double eps;
  Projector p;

  PersistenceRegionSpec(HermitianOperator a_, SlitSpec interval_, double eps_)
      : a(std::move(a_)),
        interval(interval_),
        eps(eps_),
        p(spectral_projector(a, interval_.lo, interval_.hi)) {
    if (!(eps > 0.0 && eps < 1.0))
      throw Error(ErrorKind::invalid_argument, "persistence needs eps in (0,1)");
  }
};

inline bool persistence_region_membership(const PersistenceRegionSpec& spec,
                                          const DensityMatrix& rho) {
  double outside = 1.0 - trace_inner(rho, spec.p.op());
  return outside < spec.eps;
}

// Registered values persist: Tr(P rho) > 1 - eps across the region.
inline TheoremReport check_persistence(const PersistenceRegionSpec& spec,
                                       const StateRegion& region) {
  std::vector<double> margins;
  margins.reserve(region.size());
  for (const auto& rho : region.samples()) {
    if (!persistence_region_membership(spec, rho))
      throw Error(ErrorKind::hypothesis_not_met, "sample leaves the persistence region");
    margins.push_back(trace_inner(rho, spec.p.op()) - (1.0 - spec.eps));
  }
  return make_report("post_measurement_persistence", std::move(margins));
}

// Expectations after preparation (ball of radius delta around rho0) plus a
// registered outcome P stay within ||B|| (delta + eps(2-eps)/(1-eps)) of the
// transformed center value Tr(rho0' B).
struct LudersDistanceResult {
  TheoremReport report;
  DensityMatrix transformed_center;
  std::size_t intersection_size = 0;
};

inline LudersDistanceResult check_luders_distance(const DensityMatrix& rho0, const Projector& p,
                                                  const HermitianOperator& b, double delta,
                                                  double eps, std::size_t n_samples,
                                                  std::uint64_t seed) {
  if (!(eps > 0.0 && eps < 1.0))
    throw Error(ErrorKind::invalid_argument, "needs eps in (0,1)");
  Matrix prp0 = p.entries() * rho0.entries() * p.entries();
  double strict_dist = trace_norm(Matrix(rho0.entries() - prp0));
  if (!(strict_dist < eps))
    throw Error(ErrorKind::hypothesis_not_met,
                "center is not concentrated on the outcome: Tr|rho0 - P rho0 P| = " +
                    std::to_string(strict_dist));

  DensityMatrix rho0p = luders_transform(rho0, p);
  StateRegion w = sample_region(rho0, delta, n_samples, seed);

  const double bound = operator_norm(b) * (delta + eps * (2.0 - eps) / (1.0 - eps));
  const double target = trace_inner(rho0p, b);
  std::vector<double> margins;
  for (const auto& rho : w.samples()) {
    double outside = 1.0 - trace_inner(rho, p.op());
    if (!(outside < eps)) continue;  // sample left the persistence region
    margins.push_back(bound - std::abs(trace_inner(rho, b) - target));
  }
  if (margins.empty())
    throw Error(ErrorKind::empty_intersection,
                "no sample lies in both the preparation ball and the persistence region");
  LudersDistanceResult out{make_report("luders_value_distance", std::move(margins)),
                           std::move(rho0p), 0};
  out.intersection_size = out.report.per_sample_margin.size();
  return out;
}

// Per-sample discrepancy |Tr(rho A B) - sum_i a_i Tr(rho0 P_i) Tr(rho0'(i) B)|
// for strongly commuting A, B; branches with vanishing weight are dropped.
struct BranchDecomposition {
  std::vector<double> discrepancy;
  double coefficient_budget = 0.0;  // sum_i |a_i| over kept branches
  std::vector<double> branch_weights;
  std::vector<double> branch_values;
};

inline BranchDecomposition branch_decomposition_discrepancy(const HermitianOperator& a,
                                                            const HermitianOperator& b,
                                                            const StateRegion& w) {
  double comm = commute_check(a, b);
  if (comm > tol::commutator)
    throw Error(ErrorKind::noncommuting_pair,
                "commutator norm " + std::to_string(comm) + " exceeds tolerance");
  SpectralDecomposition dec = spectral_decompose(a);
  const DensityMatrix& rho0 = w.center();

  BranchDecomposition out;
  double constant = 0.0;
  for (std::size_t i = 0; i < dec.eigenvalues.size(); ++i) {
    double weight = trace_inner(rho0, dec.eigenprojectors[i]);
    out.coefficient_budget += std::abs(dec.eigenvalues[i]);
    if (weight <= tol::weight_floor) continue;  // dropped branch
    Projector pi(dec.eigenprojectors[i]);
    DensityMatrix branch_state = luders_transform(rho0, pi);
    double value = trace_inner(branch_state, b);
    out.branch_weights.push_back(weight);
    out.branch_values.push_back(value);
    constant += dec.eigenvalues[i] * weight * value;
  }

  Matrix ab = a.entries() * b.entries();
  for (const auto& rho : w.samples()) {
    Complex raw = trace_product(rho.entries(), ab);
    out.discrepancy.push_back(std::abs(raw.real() - constant));
  }
  return out;
}

// The commuting-product rule: the discrepancy above is bounded by
// (sum_i |a_i|) ||B|| eps across a radius-eps region, and the identity is
// exact at the center (first margin, at tolerance 1e-10).
inline TheoremReport check_branch_decomposition(const HermitianOperator& a,
                                                const HermitianOperator& b,
                                                const StateRegion& w) {
  BranchDecomposition dec = branch_decomposition_discrepancy(a, b, w);
  const double bound = dec.coefficient_budget * operator_norm(b) * w.radius();
  std::vector<double> margins;
  margins.reserve(dec.discrepancy.size() + 1);
  margins.push_back(1e-10 - dec.discrepancy[0]);
  for (double d : dec.discrepancy) margins.push_back(bound - d);
  return make_report("commuting_branch_decomposition", std::move(margins));
}

// Deterministic commuting pair: step and smooth spectral functions of one
// random Hermitian matrix.
struct CommutingPair {
  HermitianOperator a;
  HermitianOperator b;
};

inline CommutingPair commuting_pair(int dim, int branches, Rng& rng) {
  if (branches < 1 || branches > dim)
    throw Error(ErrorKind::invalid_argument, "branch count out of range");
  Matrix g(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) g(i, j) = Complex(rng.normal(), rng.normal());
  HermitianOperator c(0.5 * (g + g.adjoint()), "C");
  EighResult es = eigh(c.entries());

  std::vector<double> levels(branches);
  for (int k = 0; k < branches; ++k) levels[k] = rng.uniform(-2.0, 2.0);
  RealVector avals(dim), bvals(dim);
  for (int i = 0; i < dim; ++i) {
    avals(i) = levels[(i * branches) / dim];
    double x = es.values(i);
    bvals(i) = std::tanh(0.3 * x) + 0.1 * x;
  }
  Matrix a = es.vectors * avals.asDiagonal() * es.vectors.adjoint();
  Matrix b = es.vectors * bvals.asDiagonal() * es.vectors.adjoint();
  return {HermitianOperator(std::move(a), "A"), HermitianOperator(std::move(b), "B")};
}

}  // namespace qrn
