#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "qrn/collimation.hpp"
#include "qrn/grid.hpp"
#include "qrn/operators.hpp"
#include "qrn/region.hpp"

namespace qrn {

// Impulsive system/pointer coupling H = g X(1) P(2): after the kick the
// pointer position picks up g dt times the system position.
struct PointerModel {
  GridConfig grid1;
  GridConfig grid2;
  HermitianOperator x1;
  HermitianOperator x2;
  HermitianOperator p2;
  double g = 1.0;
  double dt = 1.0;

  PointerModel(const GridConfig& g1, const GridConfig& g2, double g_, double dt_)
      : grid1(g1),
        grid2(g2),
        x1(HermitianOperator::zero(1)),
        x2(HermitianOperator::zero(1)),
        p2(HermitianOperator::zero(1)),
        g(g_),
        dt(dt_) {
    if (!(g * dt > 0.0) || !std::isfinite(g * dt))
      throw Error(ErrorKind::invalid_argument, "g*dt must be finite and positive");
    if (static_cast<long>(g1.n) * g2.n > 4096)
      throw Error(ErrorKind::dimension_limit, "joint dimension capped at 4096");
    GridOperators ops1 = grid_operators(g1);
    GridOperators ops2 = grid_operators(g2);
    x1 = ops1.position.relabeled("X1");
    x2 = ops2.position.relabeled("X2");
    p2 = ops2.momentum.relabeled("P2");
  }

  double kick() const { return g * dt; }
};

// Heisenberg-picture pointer position after the impulse:
// I x X2 + (g dt) X1 x I. No time integration; the kick is closed-form.
inline HermitianOperator pointer_final_operator(const PointerModel& model) {
  HermitianOperator i1 = HermitianOperator::identity(model.grid1.n);
  HermitianOperator i2 = HermitianOperator::identity(model.grid2.n);
  HermitianOperator out = tensor(i1, model.x2) + model.kick() * tensor(model.x1, i2);
  return out.relabeled("X2f");
}

// Joint region built from product samples of the factor regions; the partial
// traces then land exactly in the factor balls, and position cross terms
// vanish sample by sample.
struct TwoParticleRegion {
  StateRegion w1;
  StateRegion w2;
  std::vector<DensityMatrix> joint;
};

inline TwoParticleRegion build_superset(const StateRegion& w1, const StateRegion& w2,
                                        std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorKind::invalid_argument, "superset needs n >= 1");
  TwoParticleRegion out{w1, w2, {}};
  out.joint.reserve(n);
  out.joint.push_back(tensor(w1.center(), w2.center()));
  Rng rng(seed);
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t i1 = static_cast<std::size_t>(rng.uniform() * w1.size()) % w1.size();
    std::size_t i2 = static_cast<std::size_t>(rng.uniform() * w2.size()) % w2.size();
    out.joint.push_back(tensor(w1.samples()[i1], w2.samples()[i2]));
  }
  return out;
}

inline void validate_superset(const TwoParticleRegion& region) {
  const int d1 = region.w1.dim();
  const int d2 = region.w2.dim();
  for (const auto& rho : region.joint) {
    DensityMatrix r1 = partial_trace(rho, 1, d1, d2);
    DensityMatrix r2 = partial_trace(rho, 2, d1, d2);
    double dist1 = trace_distance(r1, region.w1.center());
    double dist2 = trace_distance(r2, region.w2.center());
    if (!(dist1 < region.w1.radius() + 1e-12) || !(dist2 < region.w2.radius() + 1e-12))
      throw Error(ErrorKind::invariant_violation, "joint sample escapes a factor ball");
  }
}

// Variance budget of the final pointer position, split into the pointer's
// own spread, the kicked-in system spread, and the covariance cross term.
struct SpreadDecomposition {
  double total_sq = 0.0;
  double pointer_term = 0.0;    // S_{X2}^2
  double particle_term = 0.0;   // (g dt)^2 S_{X1}^2
  double cross_term = 0.0;      // 2 g dt (⟨X1 X2⟩ - ⟨X1⟩⟨X2⟩)

  double recomposed() const { return pointer_term + particle_term + cross_term; }
};

inline std::vector<SpreadDecomposition> pointer_spread(const PointerModel& model,
                                                       const TwoParticleRegion& region) {
  HermitianOperator i1 = HermitianOperator::identity(model.grid1.n);
  HermitianOperator i2 = HermitianOperator::identity(model.grid2.n);
  HermitianOperator x1j = tensor(model.x1, i2);
  HermitianOperator x2j = tensor(i1, model.x2);
  HermitianOperator x1x2 = tensor(model.x1, model.x2);
  HermitianOperator xf = pointer_final_operator(model);
  HermitianOperator xf2 = detail::squared(xf);
  HermitianOperator x1j2 = detail::squared(x1j);
  HermitianOperator x2j2 = detail::squared(x2j);
  const double k = model.kick();

  std::vector<SpreadDecomposition> out;
  out.reserve(region.joint.size());
  for (const auto& rho : region.joint) {
    SpreadDecomposition d;
    double m1 = trace_inner(rho, x1j);
    double m2 = trace_inner(rho, x2j);
    double mf = trace_inner(rho, xf);
    d.pointer_term = trace_inner(rho, x2j2) - m2 * m2;
    d.particle_term = k * k * (trace_inner(rho, x1j2) - m1 * m1);
    d.cross_term = 2.0 * k * (trace_inner(rho, x1x2) - m1 * m2);
    d.total_sq = trace_inner(rho, xf2) - mf * mf;
    out.push_back(d);
  }
  return out;
}

// total variance equals the three-term budget, sample by sample.
inline TheoremReport check_spread_decomposition(const PointerModel& model,
                                                const TwoParticleRegion& region) {
  std::vector<double> margins;
  for (const auto& d : pointer_spread(model, region))
    margins.push_back(tol::bound_slack - std::abs(d.total_sq - d.recomposed()));
  return make_report("pointer_spread_decomposition", std::move(margins));
}

// Jittered pure packets around one center; distances are exact via the
// low-rank subspace, so no dense eigensolves are needed.
inline StateRegion packet_region(const GridConfig& cfg, double center_x, double sigma,
                                 std::size_t n_samples, std::uint64_t seed, double radius) {
  ComplexVector center_vec = gaussian_packet_vector(cfg, center_x, sigma);
  DensityMatrix center = DensityMatrix::pure(center_vec);
  std::vector<DensityMatrix> samples{center};
  Rng rng(seed);
  for (std::size_t i = 1; i < n_samples; ++i) {
    double dc = 0.5 * sigma * rng.uniform(-1.0, 1.0);
    double ds = 0.1 * sigma * rng.uniform(-1.0, 1.0);
    for (int shrink = 0; shrink < 80; ++shrink) {
      detail::WeightedVectors cand{{1.0, gaussian_packet_vector(cfg, center_x + dc, sigma + ds)}};
      if (detail::mixture_trace_distance(cand, {{1.0, center_vec}}) < 0.9 * radius) {
        samples.push_back(detail::mixture_state(cfg.n, cand));
        break;
      }
      dc *= 0.5;
      ds *= 0.5;
    }
  }
  return StateRegion(center, radius, seed, std::move(samples));
}

// Region for a particle prepared across two slit positions, either as a
// 50/50 mixture or as a coherent superposition of the two packets.
inline StateRegion union_region(const GridConfig& cfg, double xa, double xc, double sigma,
                                std::size_t n_samples, std::uint64_t seed, double radius,
                                bool coherent) {
  auto build = [&](double da, double dc2) {
    if (coherent) {
      ComplexVector v = gaussian_packet_vector(cfg, xa + da, sigma) +
                        gaussian_packet_vector(cfg, xc + dc2, sigma);
      detail::WeightedVectors terms{{1.0, v / v.norm()}};
      return terms;
    }
    detail::WeightedVectors terms{{0.5, gaussian_packet_vector(cfg, xa + da, sigma)},
                                  {0.5, gaussian_packet_vector(cfg, xc + dc2, sigma)}};
    return terms;
  };
  detail::WeightedVectors center_terms = build(0.0, 0.0);
  DensityMatrix center = detail::mixture_state(cfg.n, center_terms);
  std::vector<DensityMatrix> samples{center};
  Rng rng(seed);
  for (std::size_t i = 1; i < n_samples; ++i) {
    double da = 0.3 * sigma * rng.uniform(-1.0, 1.0);
    double dc2 = 0.3 * sigma * rng.uniform(-1.0, 1.0);
    for (int shrink = 0; shrink < 80; ++shrink) {
      detail::WeightedVectors cand = build(da, dc2);
      if (detail::mixture_trace_distance(cand, center_terms) < 0.9 * radius) {
        samples.push_back(detail::mixture_state(cfg.n, cand));
        break;
      }
      da *= 0.5;
      dc2 *= 0.5;
    }
  }
  return StateRegion(center, radius, seed, std::move(samples));
}

// A value registers only if the final pointer position is approximately
// classical: every joint sample keeps total spread^2 under
// (1 + (g dt)^2) eps2, both factor tolerances propagated through the budget.
struct RegistrationResult {
  bool registered = false;
  double threshold = 0.0;
  double worst_total_sq = 0.0;
  double worst_particle_term = 0.0;
  std::vector<SpreadDecomposition> decomposition;
};

inline RegistrationResult classify_registration(const PointerModel& model, const StateRegion& o,
                                                const StateRegion& w2, double eps2) {
  if (!is_approx_classical(model.x2, w2, eps2))
    throw Error(ErrorKind::hypothesis_not_met, "pointer preparation is not approximately classical");
  TwoParticleRegion joint =
      build_superset(o, w2, std::max(o.size(), w2.size()), o.seed() ^ (w2.seed() << 1));
  RegistrationResult out;
  out.threshold = (1.0 + model.kick() * model.kick()) * eps2;
  out.decomposition = pointer_spread(model, joint);
  out.registered = true;
  for (const auto& d : out.decomposition) {
    out.worst_total_sq = std::max(out.worst_total_sq, d.total_sq);
    out.worst_particle_term = std::max(out.worst_particle_term, d.particle_term);
    if (!(d.total_sq < out.threshold)) out.registered = false;
  }
  return out;
}

}  // namespace qrn
