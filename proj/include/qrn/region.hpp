#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qrn/operators.hpp"
#include "qrn/rng.hpp"

namespace qrn {

// Open interval ]lo, hi[ on the real line, e.g. the aperture of a slit.
struct SlitSpec {
  double lo;
  double hi;

  SlitSpec(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo < hi)) throw Error(ErrorKind::invalid_argument, "slit needs lo < hi");
  }

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x > lo && x < hi; }
};

// Computational stand-in for an open set of states: a trace-norm ball of
// given radius around a center, witnessed by finitely many member states.
// samples[0] is always the center.
class StateRegion {
 public:
  StateRegion(DensityMatrix center, double radius, std::uint64_t seed,
              std::vector<DensityMatrix> samples)
      : center_(std::move(center)), radius_(radius), seed_(seed), samples_(std::move(samples)) {
    if (samples_.empty())
      throw Error(ErrorKind::invalid_argument, "region needs at least one sample");
  }

  static StateRegion singleton(DensityMatrix center) {
    DensityMatrix c = center;
    std::vector<DensityMatrix> s{center};
    return StateRegion(std::move(c), 0.0, 0, std::move(s));
  }

  const DensityMatrix& center() const { return center_; }
  double radius() const { return radius_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<DensityMatrix>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  int dim() const { return center_.dim(); }

  // First k samples (k >= 1); a sub-collection of witnesses for the same set.
  StateRegion subregion(std::size_t k) const {
    if (k < 1 || k > samples_.size())
      throw Error(ErrorKind::invalid_argument, "subregion size out of range");
    return StateRegion(center_, radius_, seed_,
                       std::vector<DensityMatrix>(samples_.begin(), samples_.begin() + k));
  }

 private:
  DensityMatrix center_;
  double radius_;
  std::uint64_t seed_;
  std::vector<DensityMatrix> samples_;
};

// Checks the membership invariant: every sample within `radius` of the
// center in trace norm (strict, with 1e-12 slack).
inline void validate_region(const StateRegion& region) {
  for (const auto& s : region.samples()) {
    double d = trace_distance(s, region.center());
    if (!(d < region.radius() + 1e-12))
      throw Error(ErrorKind::invariant_violation,
                  "sample at trace distance " + std::to_string(d) + " outside radius " +
                      std::to_string(region.radius()));
  }
}

// Region sampling law (kept simple so tests can regenerate it independently):
// from Rng(seed), per sample draw a Gaussian hermitian matrix
//   G_jj = normal(), G_jl = (normal() + i normal())/sqrt(2) for j < l,
// project it traceless, scale it to trace norm u*radius with u ~ U(0.05,0.95),
// and add it to the center. If the shift provably keeps the state positive
// (operator norm below the center's smallest eigenvalue) the sample is taken
// as is; otherwise eigenvalues are clipped at zero, the trace renormalized,
// and the shift halved until membership holds.
inline DensityMatrix perturb_state(const DensityMatrix& center, double center_min_eig,
                                   double radius, Rng& rng) {
  const int d = center.dim();
  Matrix g(d, d);
  for (int j = 0; j < d; ++j) {
    g(j, j) = rng.normal();
    for (int l = j + 1; l < d; ++l) {
      Complex z(rng.normal(), rng.normal());
      g(j, l) = z / std::sqrt(2.0);
      g(l, j) = std::conj(g(j, l));
    }
  }
  Complex tr = g.trace();
  g -= (tr / static_cast<double>(d)) * Matrix::Identity(d, d);

  RealVector vals = eigvalsh(g);
  double tn = vals.cwiseAbs().sum();
  double on = vals.cwiseAbs().maxCoeff();
  if (tn <= 0.0) return center;

  double target = radius * rng.uniform(0.05, 0.95);
  double s = target / tn;
  if (s * on <= center_min_eig) {
    return DensityMatrix::trusted(center.entries() + s * g);
  }
  for (int attempt = 0; attempt < 60; ++attempt) {
    DensityMatrix candidate = DensityMatrix::repaired(center.entries() + s * g);
    if (trace_distance(candidate, center) < radius * (1.0 - 1e-9)) return candidate;
    s *= 0.5;
  }
  throw Error(ErrorKind::preparation_failed, "could not keep perturbed sample inside the region");
}

inline StateRegion sample_region(const DensityMatrix& center, double radius,
                                 std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw Error(ErrorKind::invalid_argument, "region needs n_samples >= 1");
  if (radius < 0.0) throw Error(ErrorKind::invalid_argument, "radius must be >= 0");
  std::vector<DensityMatrix> samples;
  samples.push_back(center);
  if (radius == 0.0) return StateRegion(center, radius, seed, std::move(samples));

  double min_eig = eigvalsh(center.entries()).minCoeff();
  Rng rng(seed);
  for (std::size_t i = 1; i < n_samples; ++i)
    samples.push_back(perturb_state(center, min_eig, radius, rng));
  return StateRegion(center, radius, seed, std::move(samples));
}

// Wishart-style random mixed state: G G^dag / Tr(G G^dag) with Gaussian G of
// the given rank (full rank when rank == 0).
inline DensityMatrix random_density_matrix(int dim, Rng& rng, int rank = 0) {
  if (dim < 1) throw Error(ErrorKind::invalid_argument, "dim must be >= 1");
  if (rank <= 0 || rank > dim) rank = dim;
  Matrix g(dim, rank);
  for (int j = 0; j < rank; ++j)
    for (int i = 0; i < dim; ++i) g(i, j) = Complex(rng.normal(), rng.normal());
  Matrix w = g * g.adjoint();
  return DensityMatrix::trusted(w / w.trace().real());
}

// The value of a quantity over a region: one real per witness state plus the
// enclosing interval.
struct QuantumRealNumber {
  std::string operator_label;
  std::vector<double> per_sample;
  double lo = 0.0;
  double hi = 0.0;

  double center_value() const { return per_sample.front(); }
};

inline QuantumRealNumber evaluate_qrn(const HermitianOperator& m, const StateRegion& u) {
  QuantumRealNumber out;
  out.operator_label = m.label();
  out.per_sample.reserve(u.size());
  for (const auto& rho : u.samples()) out.per_sample.push_back(trace_inner(rho, m));
  auto [lo_it, hi_it] = std::minmax_element(out.per_sample.begin(), out.per_sample.end());
  out.lo = *lo_it;
  out.hi = *hi_it;
  return out;
}

namespace detail {
// Variance radicand with clipping for the -1e-12 band of numerical noise.
inline double clipped_sqrt(double radicand) {
  if (radicand < 0.0) {
    if (radicand < tol::variance_clip * 1e3)
      throw Error(ErrorKind::invariant_violation,
                  "variance radicand " + std::to_string(radicand) + " too negative");
    return 0.0;
  }
  return std::sqrt(radicand);
}

inline HermitianOperator squared(const HermitianOperator& m) {
  return apply_function([](double x) { return x * x; }, m, m.label() + "^2");
}
}  // namespace detail

// s(M)(rho) = sqrt(Tr(rho M^2) - Tr(rho M)^2).
inline double spread(const HermitianOperator& m, const DensityMatrix& rho) {
  HermitianOperator m2 = detail::squared(m);
  double mean = trace_inner(rho, m);
  double second = trace_inner(rho, m2);
  return detail::clipped_sqrt(second - mean * mean);
}

struct SpreadValue {
  std::vector<double> per_sample;
};

inline SpreadValue spread_over(const HermitianOperator& m, const StateRegion& u) {
  HermitianOperator m2 = detail::squared(m);
  SpreadValue out;
  out.per_sample.reserve(u.size());
  for (const auto& rho : u.samples()) {
    double mean = trace_inner(rho, m);
    double second = trace_inner(rho, m2);
    out.per_sample.push_back(detail::clipped_sqrt(second - mean * mean));
  }
  return out;
}

// Pointwise sharp-collimation data: per-sample mean, spread, and the band
// mean +- s/sqrt(eps) that must fit inside the slit.
struct SharpnessSample {
  double mean = 0.0;
  double spread = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  bool pass = false;
};

struct SharpnessReport {
  std::vector<SharpnessSample> per_sample;
  bool all = true;
};

// Band data alone, independent of any slit. Slit builders and sharpness
// checks share these exact values so boundary comparisons are float-exact.
inline std::vector<SharpnessSample> sharpness_bands(const HermitianOperator& z,
                                                    const StateRegion& u, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::invalid_argument, "eps must be positive");
  HermitianOperator z2 = detail::squared(z);
  double root_eps = std::sqrt(eps);
  std::vector<SharpnessSample> out;
  out.reserve(u.size());
  for (const auto& rho : u.samples()) {
    SharpnessSample s;
    s.mean = trace_inner(rho, z);
    s.spread = detail::clipped_sqrt(trace_inner(rho, z2) - s.mean * s.mean);
    s.band_lo = s.mean - s.spread / root_eps;
    s.band_hi = s.mean + s.spread / root_eps;
    out.push_back(s);
  }
  return out;
}

// The mean sits strictly inside the slit and the band fits inside it
// (endpoints allowed).
inline SharpnessReport eps_sharpness(const HermitianOperator& z, const StateRegion& u,
                                     const SlitSpec& slit, double eps) {
  SharpnessReport report;
  report.per_sample = sharpness_bands(z, u, eps);
  for (auto& s : report.per_sample) {
    s.pass = slit.contains(s.mean) && slit.lo <= s.band_lo && s.band_hi <= slit.hi;
    report.all = report.all && s.pass;
  }
  return report;
}

inline bool is_eps_sharp(const HermitianOperator& z, const StateRegion& u, const SlitSpec& slit,
                         double eps) {
  return eps_sharpness(z, u, slit, eps).all;
}

// Adds the trace-norm closeness Tr|rho - P rho P| < eps to the pointwise
// sharpness conditions.
struct StrictSharpnessReport {
  SharpnessReport sharp;
  std::vector<double> projection_distance;
  bool all = true;
};

inline StrictSharpnessReport strict_eps_sharpness(const HermitianOperator& z, const StateRegion& u,
                                                  const SlitSpec& slit, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw Error(ErrorKind::invalid_argument, "strict sharpness needs eps in (0,1)");
  StrictSharpnessReport report;
  report.sharp = eps_sharpness(z, u, slit, eps);
  report.all = report.sharp.all;
  Projector p = spectral_projector(z, slit.lo, slit.hi);
  for (const auto& rho : u.samples()) {
    Matrix prp = p.entries() * rho.entries() * p.entries();
    double dist = trace_norm(Matrix(rho.entries() - prp));
    report.projection_distance.push_back(dist);
    report.all = report.all && dist < eps;
  }
  return report;
}

inline bool is_strictly_eps_sharp(const HermitianOperator& z, const StateRegion& u,
                                  const SlitSpec& slit, double eps) {
  return strict_eps_sharpness(z, u, slit, eps).all;
}

// rho restricted to the range of P, renormalized.
inline DensityMatrix restrict_to_slit(const DensityMatrix& rho, const Projector& p) {
  if (rho.dim() != p.dim()) throw Error(ErrorKind::dimension_mismatch, "state/projector dims");
  Matrix prp = p.entries() * rho.entries() * p.entries();
  double weight = prp.trace().real();
  if (weight <= tol::weight_floor)
    throw Error(ErrorKind::null_restriction,
                "restriction weight " + std::to_string(weight) + " vanishes");
  return DensityMatrix::trusted(prp / weight);
}

// |(M_Q)^2 - (M^2)_Q| < eps2 pointwise: the region-valued quantity behaves
// like a single real number to tolerance eps2.
struct ClassicalityReport {
  std::vector<double> discrepancy;  // |mean^2 - second moment| per sample
  bool all = true;
};

inline ClassicalityReport classicality(const HermitianOperator& m, const StateRegion& u,
                                       double eps2) {
  if (!(eps2 > 0.0)) throw Error(ErrorKind::invalid_argument, "eps2 must be positive");
  HermitianOperator m2 = detail::squared(m);
  ClassicalityReport report;
  for (const auto& rho : u.samples()) {
    double mean = trace_inner(rho, m);
    double second = trace_inner(rho, m2);
    double disc = std::abs(second - mean * mean);
    report.discrepancy.push_back(disc);
    report.all = report.all && disc < eps2;
  }
  return report;
}

inline bool is_approx_classical(const HermitianOperator& m, const StateRegion& u, double eps2) {
  return classicality(m, u, eps2).all;
}

}  // namespace qrn
