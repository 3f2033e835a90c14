#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "qrn/grid.hpp"
#include "qrn/region.hpp"
#include "qrn/rng.hpp"

namespace qrn {

// Margin sheet for one inequality check: margin = bound - achieved, and the
// check passes only if every margin clears -1e-9.
struct TheoremReport {
  std::string check_id;
  std::vector<double> per_sample_margin;
  double worst_margin = 0.0;
  bool passed = false;
};

inline TheoremReport make_report(std::string id, std::vector<double> margins) {
  TheoremReport r;
  r.check_id = std::move(id);
  r.per_sample_margin = std::move(margins);
  if (r.per_sample_margin.empty())
    throw Error(ErrorKind::invalid_argument, "report needs at least one margin");
  r.worst_margin = *std::min_element(r.per_sample_margin.begin(), r.per_sample_margin.end());
  r.passed = r.worst_margin >= -tol::bound_slack;
  return r;
}

// Gaussian packet at the slit midpoint with sigma = 0.4 * width * sqrt(eps);
// the band then fits with margin 0.1 * width on each side.
inline DensityMatrix prepare_sharp_state(const SlitSpec& slit, double eps,
                                         const GridConfig& cfg) {
  if (!(eps > 0.0)) throw Error(ErrorKind::invalid_argument, "eps must be positive");
  if (!(slit.lo > -cfg.half_width && slit.hi < cfg.half_width))
    throw Error(ErrorKind::invalid_argument, "slit must sit inside the grid range");
  double sigma = 0.4 * slit.width() * std::sqrt(eps);
  if (sigma < 2.0 * cfg.step())
    throw Error(ErrorKind::grid_too_coarse,
                "packet width " + std::to_string(sigma) + " below grid resolution");
  DensityMatrix rho = gaussian_packet(cfg, slit.mid(), sigma);
  HermitianOperator z = HermitianOperator::diagonal(
      [&] {
        RealVector x(cfg.n);
        for (int j = 0; j < cfg.n; ++j) x(j) = cfg.point(j);
        return x;
      }(),
      "Z");
  if (!is_eps_sharp(z, StateRegion::singleton(rho), slit, eps))
    throw Error(ErrorKind::preparation_failed, "prepared packet is not eps-sharp");
  return rho;
}

namespace detail {

// Trace distance between two low-rank mixtures given as (weight, vector)
// lists; the difference lives in the span of the listed vectors, so the
// eigenproblem collapses to that subspace.
using WeightedVectors = std::vector<std::pair<double, ComplexVector>>;

inline double mixture_trace_distance(const WeightedVectors& a, const WeightedVectors& b) {
  std::vector<ComplexVector> basis;
  auto add = [&](const ComplexVector& v) {
    ComplexVector r = v;
    for (const auto& e : basis) r -= (e.dot(r)) * e;
    double n = r.norm();
    if (n > 1e-12) basis.push_back(r / n);
  };
  for (const auto& [w, v] : a) add(v);
  for (const auto& [w, v] : b) add(v);
  const int k = static_cast<int>(basis.size());
  if (k == 0) return 0.0;
  Matrix diff = Matrix::Zero(k, k);
  auto accumulate = [&](const WeightedVectors& terms, double sign) {
    for (const auto& [w, v] : terms) {
      ComplexVector c(k);
      for (int i = 0; i < k; ++i) c(i) = basis[i].dot(v);
      diff += sign * w * (c * c.adjoint());
    }
  };
  accumulate(a, 1.0);
  accumulate(b, -1.0);
  return eigvalsh(diff).cwiseAbs().sum();
}

inline DensityMatrix mixture_state(int dim, const WeightedVectors& terms) {
  Matrix m = Matrix::Zero(dim, dim);
  double total = 0.0;
  for (const auto& [w, v] : terms) {
    m += w * (v * v.adjoint());
    total += w;
  }
  return DensityMatrix::trusted(m / total);
}

}  // namespace detail

struct SharpRegionOptions {
  std::size_t n_samples = 6;
  double jitter = 1.0;          // overall scale of preparation jitter
  double outside_mass = 0.0;    // fraction of eps allowed outside the slit
  bool strict = false;          // also enforce Tr|rho - P rho P| < eps
};

// Seeded family of slightly different preparations of the same collimated
// packet: jittered centers, widths, small momenta, and optionally a trace of
// mass leaking outside the slit. The generator verifies the sharpness
// hypothesis and shrinks the jitter until it holds.
inline StateRegion sharp_packet_region(const GridConfig& cfg, const SlitSpec& slit, double eps,
                                       const SharpRegionOptions& opts, std::uint64_t seed) {
  const double w = slit.width();
  const double sigma0 = 0.4 * w * std::sqrt(eps);
  if (sigma0 < 2.0 * cfg.step())
    throw Error(ErrorKind::grid_too_coarse, "slit/eps needs a finer grid");
  HermitianOperator z = HermitianOperator::diagonal(
      [&] {
        RealVector x(cfg.n);
        for (int j = 0; j < cfg.n; ++j) x(j) = cfg.point(j);
        return x;
      }(),
      "Z");

  ComplexVector center_vec = gaussian_packet_vector(cfg, slit.mid(), sigma0);
  DensityMatrix center = DensityMatrix::pure(center_vec);

  double scale = opts.jitter;
  for (int attempt = 0; attempt < 10; ++attempt) {
    double radius = 0.05 * std::sqrt(eps) * scale;
    Rng rng(seed);
    std::vector<DensityMatrix> samples{center};
    bool built = true;
    for (std::size_t i = 1; i < opts.n_samples && built; ++i) {
      double dc = 0.05 * w * std::sqrt(eps) * scale * rng.uniform(-1.0, 1.0);
      double ds = 0.10 * sigma0 * scale * rng.uniform(-1.0, 1.0);
      double p0 = 0.02 * std::sqrt(eps) / sigma0 * scale * rng.uniform(-1.0, 1.0) * cfg.hbar;
      double theta = opts.outside_mass * eps * rng.uniform(0.0, 1.0);
      double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
      for (int shrink = 0;; ++shrink) {
        if (shrink > 80) {
          built = false;
          break;
        }
        detail::WeightedVectors terms;
        terms.emplace_back(1.0 - theta,
                           gaussian_packet_vector(cfg, slit.mid() + dc, sigma0 + ds, p0));
        if (theta > 0.0) {
          double leak_center = side > 0 ? slit.hi + sigma0 : slit.lo - sigma0;
          terms.emplace_back(theta, gaussian_packet_vector(cfg, leak_center, sigma0));
        }
        double dist =
            detail::mixture_trace_distance(terms, {{1.0, center_vec}});
        if (dist < 0.9 * radius) {
          samples.push_back(detail::mixture_state(cfg.n, terms));
          break;
        }
        dc *= 0.5;
        ds *= 0.5;
        p0 *= 0.5;
        theta *= 0.5;
      }
    }
    if (built) {
      StateRegion region(center, radius, seed, std::move(samples));
      bool ok = opts.strict ? is_strictly_eps_sharp(z, region, slit, eps)
                            : is_eps_sharp(z, region, slit, eps);
      if (ok) return region;
    }
    scale *= 0.5;
  }
  throw Error(ErrorKind::preparation_failed, "could not build a sharp region for this slit");
}

// Narrowest slit admitting the region at sharpness eps: endpoints at the
// extreme band edges (widened infinitesimally if the bands are degenerate).
inline SlitSpec tightest_slit(const HermitianOperator& m, const StateRegion& u, double eps) {
  std::vector<SharpnessSample> bands = sharpness_bands(m, u, eps);
  double lo = bands.front().band_lo;
  double hi = bands.front().band_hi;
  for (const auto& s : bands) {
    lo = std::min(lo, s.band_lo);
    hi = std::max(hi, s.band_hi);
  }
  if (!(lo < hi)) {
    double pad = std::max(1e-12, 1e-12 * std::abs(lo));
    lo -= pad;
    hi += pad;
  }
  return SlitSpec(lo, hi);
}

// 4 s^2 / width^2 <= eps for every state of a sharp region.
inline TheoremReport check_variance_bound(const HermitianOperator& z, const StateRegion& u,
                                          const SlitSpec& slit, double eps) {
  SharpnessReport sharp = eps_sharpness(z, u, slit, eps);
  if (!sharp.all)
    throw Error(ErrorKind::hypothesis_not_met, "region is not eps-sharp for this slit");
  std::vector<double> margins;
  margins.reserve(u.size());
  const double w2 = slit.width() * slit.width();
  for (const auto& s : sharp.per_sample)
    margins.push_back(eps - 4.0 * s.spread * s.spread / w2);
  return make_report("sharp_collimation_variance_bound", std::move(margins));
}

// Width product of simultaneous position/momentum slits against 2 hbar / eps.
inline TheoremReport check_uncertainty_product(const HermitianOperator& z,
                                               const HermitianOperator& p, const StateRegion& u,
                                               const SlitSpec& zslit, const SlitSpec& pslit,
                                               double eps, double hbar) {
  if (!eps_sharpness(z, u, zslit, eps).all || !eps_sharpness(p, u, pslit, eps).all)
    throw Error(ErrorKind::hypothesis_not_met, "region is not eps-sharp through both slits");
  double product = zslit.width() * pslit.width();
  double bound = 2.0 * hbar / eps;
  return make_report("slit_width_uncertainty_product", {product - bound});
}

// Tr(P rho) > 1 - eps on a sharp region; P is the slit's spectral projector.
inline TheoremReport check_slit_mass(const HermitianOperator& z, const StateRegion& u,
                                     const SlitSpec& slit, double eps) {
  if (!is_eps_sharp(z, u, slit, eps))
    throw Error(ErrorKind::hypothesis_not_met, "region is not eps-sharp for this slit");
  Projector p = spectral_projector(z, slit.lo, slit.hi);
  std::vector<double> margins;
  margins.reserve(u.size());
  for (const auto& rho : u.samples())
    margins.push_back(trace_inner(rho, p.op()) - (1.0 - eps));
  return make_report("slit_mass_lower_bound", std::move(margins));
}

// Distance between a state and its slit restriction against
// eps (2 - eps) / (1 - eps), given the strict-sharpness distance hypothesis.
inline TheoremReport check_restriction_distance(const StateRegion& u, const Projector& p,
                                                double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw Error(ErrorKind::invalid_argument, "restriction bound needs eps in (0,1)");
  const double bound = eps * (2.0 - eps) / (1.0 - eps);
  std::vector<double> margins;
  margins.reserve(u.size());
  for (const auto& rho : u.samples()) {
    Matrix prp = p.entries() * rho.entries() * p.entries();
    double strict_dist = trace_norm(Matrix(rho.entries() - prp));
    if (!(strict_dist < eps))
      throw Error(ErrorKind::hypothesis_not_met,
                  "state is not strictly sharp: Tr|rho - PrhoP| = " + std::to_string(strict_dist));
    DensityMatrix restricted = restrict_to_slit(rho, p);
    margins.push_back(bound - trace_distance(rho, restricted));
  }
  return make_report("slit_restriction_distance", std::move(margins));
}

// |Tr(M rho) - Tr(PMP rho)| <= 3 ||M|| eps on strictly sharp regions.
inline TheoremReport check_projection_transform(const HermitianOperator& z,
                                                const HermitianOperator& m, const StateRegion& u,
                                                const SlitSpec& slit, double eps) {
  if (!is_strictly_eps_sharp(z, u, slit, eps))
    throw Error(ErrorKind::hypothesis_not_met, "region is not strictly eps-sharp");
  Projector p = spectral_projector(z, slit.lo, slit.hi);
  HermitianOperator pmp = sandwich(p, m);
  const double bound = 3.0 * operator_norm(m) * eps;
  std::vector<double> margins;
  margins.reserve(u.size());
  for (const auto& rho : u.samples()) {
    double diff = std::abs(trace_inner(rho, m) - trace_inner(rho, pmp));
    margins.push_back(bound - diff);
  }
  return make_report("projection_transform_error", std::move(margins));
}

// Same transform bound for the slit coordinate itself, valid without an
// operator-norm budget when the slit is narrow relative to its offset:
// 2 width <= eps * 2 min(|lo|, |hi|).
inline TheoremReport check_position_transform(const HermitianOperator& z, const StateRegion& u,
                                              const SlitSpec& slit, double eps) {
  const double m = 2.0 * std::min(std::abs(slit.lo), std::abs(slit.hi));
  if (!(2.0 * slit.width() <= eps * m))
    throw Error(ErrorKind::width_precondition,
                "slit too wide for the unbounded-coordinate bound: 2w = " +
                    std::to_string(2.0 * slit.width()) + " > eps*m = " + std::to_string(eps * m));
  if (!is_strictly_eps_sharp(z, u, slit, eps))
    throw Error(ErrorKind::hypothesis_not_met, "region is not strictly eps-sharp");
  Projector p = spectral_projector(z, slit.lo, slit.hi);
  HermitianOperator pzp = sandwich(p, z);
  const double bound = eps * m;
  std::vector<double> margins;
  margins.reserve(u.size());
  for (const auto& rho : u.samples()) {
    double diff = std::abs(trace_inner(rho, z) - trace_inner(rho, pzp));
    margins.push_back(bound - diff);
  }
  return make_report("position_transform_error", std::move(margins));
}

// Two-point state saturating the Chebyshev step of the slit-mass bound:
// mass q just under eps/(1+eps) parked outside the slit, with the
// sharpness band ending a hair inside the edge.
struct AdversarialInstance {
  HermitianOperator z;
  DensityMatrix rho;
  SlitSpec slit;
  double eps;
};

inline AdversarialInstance adversarial_saturating_instance(const SlitSpec& slit, double eps) {
  if (!(eps > 0.0 && eps < 1.0))
    throw Error(ErrorKind::invalid_argument, "needs eps in (0,1)");
  const double m = slit.mid();
  const double half = 0.5 * slit.width();
  const double q = (eps / (1.0 + eps)) * (1.0 - 1e-3);
  const double denom = q + std::sqrt(q * (1.0 - q) / eps);
  const double d = half * (1.0 - 1e-6) / denom;
  RealVector zvals(2);
  zvals << m, m + d;
  HermitianOperator z = HermitianOperator::diagonal(zvals, "Z");
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 1.0 - q;
  rho(1, 1) = q;
  return {std::move(z), DensityMatrix::trusted(std::move(rho)), slit, eps};
}

}  // namespace qrn
