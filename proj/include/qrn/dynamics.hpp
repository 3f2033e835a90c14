#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "qrn/collimation.hpp"
#include "qrn/grid.hpp"
#include "qrn/operators.hpp"
#include "qrn/region.hpp"

namespace qrn {

// One-dimensional force with its potential, F = -V'. The pair is checked for
// numerical consistency on the grid (central differences at h = 1e-4; the
// grid step itself is too coarse for steep polynomial forces).
struct ForceField {
  std::function<double(double)> force;
  std::function<double(double)> potential;
  std::string name;
  bool smooth = true;

  static ForceField linear(double k, double c = 0.0) {
    return {[k, c](double x) { return -k * x + c; },
            [k, c](double x) { return 0.5 * k * x * x - c * x; },
            "linear", true};
  }

  static ForceField harmonic(double k = 1.0) {
    ForceField f = linear(k);
    f.name = "harmonic";
    return f;
  }

  static ForceField cubic() {
    return {[](double x) { return x * x * x; },
            [](double x) { return -0.25 * x * x * x * x; },
            "cubic", true};
  }

  static ForceField quartic_well() {
    return {[](double x) { return -x * x * x; },
            [](double x) { return 0.25 * x * x * x * x; },
            "quartic", true};
  }

  static ForceField free_particle() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }, "free", true};
  }

  // Force given by polynomial coefficients c0 + c1 x + ...; the potential is
  // the exact antiderivative with the opposite sign.
  static ForceField polynomial(const std::vector<double>& coeffs) {
    return {[coeffs](double x) {
              double acc = 0.0, xp = 1.0;
              for (double c : coeffs) {
                acc += c * xp;
                xp *= x;
              }
              return acc;
            },
            [coeffs](double x) {
              double acc = 0.0, xp = x;
              for (std::size_t i = 0; i < coeffs.size(); ++i) {
                acc -= coeffs[i] * xp / static_cast<double>(i + 1);
                xp *= x;
              }
              return acc;
            },
            "poly", true};
  }
};

inline void check_force_consistency(const ForceField& f, const GridConfig& cfg) {
  const double h = 1e-4;
  for (int j = 0; j < cfg.n; ++j) {
    double x = cfg.point(j);
    double grad = (f.potential(x + h) - f.potential(x - h)) / (2.0 * h);
    if (std::abs(f.force(x) + grad) > 1e-4)
      throw Error(ErrorKind::invariant_violation,
                  "force/potential mismatch at x = " + std::to_string(x));
  }
}

// |Tr(rho F(Q)) - F(Tr(rho Q))|: how far the averaged force sits from the
// force at the averaged position.
inline double ehrenfest_gap(const ForceField& f, const HermitianOperator& q,
                            const DensityMatrix& rho) {
  HermitianOperator fq = apply_function(f.force, q, "F(Q)");
  double mean_force = trace_inner(rho, fq);
  double mean_pos = trace_inner(rho, q);
  return std::abs(mean_force - f.force(mean_pos));
}

// Largest delta with |F(r) - F(x)| < target whenever |r - x| < delta, the
// search clipped to the grid range. Bisection against a dense sampling of
// the interval.
inline double continuity_modulus_delta(const ForceField& f, double r, double target,
                                       double range_half_width) {
  if (!(target > 0.0)) throw Error(ErrorKind::invalid_argument, "target must be positive");
  const double fr = f.force(r);
  auto worst = [&](double delta) {
    double lo = std::max(r - delta, -range_half_width);
    double hi = std::min(r + delta, range_half_width);
    double m = 0.0;
    const int samples = 256;
    for (int i = 0; i <= samples; ++i) {
      double x = lo + (hi - lo) * i / samples;
      m = std::max(m, std::abs(fr - f.force(x)));
    }
    return m;
  };
  double full = 2.0 * range_half_width;
  if (worst(full) < target) return full;
  double lo = 0.0, hi = full;
  for (int iter = 0; iter < 80; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (worst(mid) < target * (1.0 - 1e-9))
      lo = mid;
    else
      hi = mid;
  }
  if (lo <= 0.0)
    throw Error(ErrorKind::modulus_search_failed,
                "no continuity margin at r = " + std::to_string(r));
  return lo;
}

// Narrow packet at r whose position and force expectations both land within
// the requested tolerances; the width is halved until they do.
inline DensityMatrix construct_weyl_state(const GridConfig& cfg, double r, const ForceField& f,
                                          double force_tol, double position_tol) {
  if (!(r > -cfg.half_width && r < cfg.half_width))
    throw Error(ErrorKind::invalid_argument, "r must lie inside the grid range");
  GridOperators ops = grid_operators(cfg);
  HermitianOperator fq = apply_function(f.force, ops.position, "F(Q)");
  double sigma = cfg.half_width / 8.0;
  const double fr = f.force(r);
  while (sigma >= 1.5 * cfg.step()) {
    DensityMatrix rho = gaussian_packet(cfg, r, sigma);
    double mean_pos = trace_inner(rho, ops.position);
    double mean_force = trace_inner(rho, fq);
    if (std::abs(mean_pos - r) < position_tol && std::abs(mean_force - fr) < force_tol)
      return rho;
    sigma *= 0.5;
  }
  throw Error(ErrorKind::grid_too_coarse,
              "no packet width meets the tolerances at r = " + std::to_string(r));
}

// Neighbourhood of a Weyl state on which averaged Heisenberg dynamics tracks
// the Newtonian value: position means within delta of the anchor, force
// means within eps/3.
struct EhrenfestWindow {
  double r = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  DensityMatrix rho_r;
  StateRegion region;
};

inline EhrenfestWindow construct_window(const ForceField& f, double r, double eps,
                                        const GridConfig& cfg, std::size_t n_samples = 8,
                                        std::uint64_t seed = 1) {
  if (!(eps > 0.0)) throw Error(ErrorKind::invalid_argument, "eps must be positive");
  double delta = continuity_modulus_delta(f, r, eps / 6.0, cfg.half_width);
  DensityMatrix rho_r = construct_weyl_state(cfg, r, f, eps / 12.0, delta / 4.0);

  GridOperators ops = grid_operators(cfg);
  HermitianOperator fq = apply_function(f.force, ops.position, "F(Q)");
  double anchor_pos = trace_inner(rho_r, ops.position);
  double anchor_force = trace_inner(rho_r, fq);

  // Witness states are jittered packets; the mean conditions below are the
  // window's membership contract (position within delta/2 keeps the
  // composed modulus argument valid).
  double sigma = std::sqrt(std::max(
      trace_inner(rho_r, detail::squared(ops.position)) - anchor_pos * anchor_pos, 1e-12));
  ComplexVector center_vec = gaussian_packet_vector(cfg, r, sigma);
  Rng rng(seed);
  std::vector<DensityMatrix> samples{rho_r};
  double fq_norm = 0.0;
  for (int j = 0; j < cfg.n; ++j) fq_norm = std::max(fq_norm, std::abs(f.force(cfg.point(j))));
  double radius = 0.45 * std::min(delta / (2.0 * cfg.half_width),
                                  (eps / 3.0) / std::max(fq_norm, 1e-12));

  for (std::size_t i = 1; i < n_samples; ++i) {
    double dc = 0.25 * delta * rng.uniform(-1.0, 1.0);
    double ds = 0.1 * sigma * rng.uniform(-1.0, 1.0);
    for (int shrink = 0; shrink < 100; ++shrink) {
      detail::WeightedVectors cand{{1.0, gaussian_packet_vector(cfg, r + dc, sigma + ds)}};
      double dist = detail::mixture_trace_distance(cand, {{1.0, center_vec}});
      DensityMatrix rho = detail::mixture_state(cfg.n, cand);
      bool pos_ok = std::abs(trace_inner(rho, ops.position) - anchor_pos) < 0.5 * delta;
      bool force_ok = std::abs(trace_inner(rho, fq) - anchor_force) < eps / 3.0;
      if (dist < radius && pos_ok && force_ok) {
        samples.push_back(std::move(rho));
        break;
      }
      dc *= 0.5;
      ds *= 0.5;
    }
  }
  StateRegion region(rho_r, radius, seed, std::move(samples));
  return {r, eps, delta, std::move(rho_r), std::move(region)};
}

// Gap below eps for every state of the window.
inline TheoremReport check_newton_gap(const EhrenfestWindow& window, const ForceField& f,
                                      const GridConfig& cfg) {
  GridOperators ops = grid_operators(cfg);
  HermitianOperator fq = apply_function(f.force, ops.position, "F(Q)");
  std::vector<double> margins;
  margins.reserve(window.region.size());
  for (const auto& rho : window.region.samples()) {
    double gap = std::abs(trace_inner(rho, fq) - f.force(trace_inner(rho, ops.position)));
    margins.push_back(window.eps - gap);
  }
  return make_report("newton_heisenberg_gap", std::move(margins));
}

// Union of the windows' position intervals (r - delta, r + delta) for r on
// a fixed lattice; true when they cover [lo, hi] with no gap.
inline bool lattice_windows_cover(const ForceField& f, double eps, double lo, double hi,
                                  double spacing, double range_half_width) {
  if (!(spacing > 0.0) || !(lo < hi))
    throw Error(ErrorKind::invalid_argument, "need positive spacing and lo < hi");
  double covered_to = lo;
  for (double r = lo; r <= hi + 0.5 * spacing; r += spacing) {
    double delta = continuity_modulus_delta(f, r, eps / 6.0, range_half_width);
    if (r - delta > covered_to) return false;  // gap before this interval
    covered_to = std::max(covered_to, r + delta);
  }
  return covered_to >= hi;
}

// Greedy march with adaptive anchors: each window hands off at r + delta(r)
// so consecutive intervals overlap. Returns how many windows cover [lo, hi].
inline std::size_t adaptive_window_cover_count(const ForceField& f, double eps, double lo,
                                               double hi, double range_half_width,
                                               std::size_t max_windows = 200000) {
  double r = lo;
  std::size_t count = 0;
  while (r < hi) {
    double delta = continuity_modulus_delta(f, eps / 6.0 > 0 ? r : r, eps / 6.0,
                                            range_half_width);
    if (!(delta > 0.0))
      throw Error(ErrorKind::modulus_search_failed, "window degenerated during the march");
    r += delta;
    if (++count > max_windows)
      throw Error(ErrorKind::modulus_search_failed, "cover needs too many windows");
  }
  return count;
}

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> q_quantum;
  std::vector<double> p_quantum;
  std::vector<double> energy;
  std::vector<double> trace;
};

struct ClassicalTrajectory {
  std::vector<double> times;
  std::vector<double> q;
  std::vector<double> p;
  std::vector<double> energy;
};

inline void require_increasing(const std::vector<double>& times) {
  if (times.empty()) throw Error(ErrorKind::invalid_argument, "empty time grid");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw Error(ErrorKind::invalid_argument, "time grid must be strictly increasing");
}

inline std::vector<double> make_times(double t_max, double dt) {
  if (!(dt > 0.0) || !(t_max >= 0.0))
    throw Error(ErrorKind::invalid_argument, "need dt > 0 and t_max >= 0");
  std::vector<double> t;
  for (double v = 0.0; v <= t_max + 0.5 * dt; v += dt) t.push_back(v);
  return t;
}

// Exact unitary evolution through the eigenbasis of H. With
// rho~ = V^dag rho V and A~ = V^dag A V, the expectation at time t is
// u^T (rho~ .* A~^T) conj(u) with u_j = exp(-i E_j t / hbar).
inline TrajectoryRecord evolve_expectations(const HermitianOperator& h, const DensityMatrix& rho0,
                                            const std::vector<double>& times,
                                            const HermitianOperator& q,
                                            const HermitianOperator& p, double hbar = 1.0) {
  require_increasing(times);
  h.require_same_dim(q);
  h.require_same_dim(p);
  if (h.dim() != rho0.dim()) throw Error(ErrorKind::dimension_mismatch, "state/hamiltonian dims");
  EighResult es = eigh(h.entries());
  const Matrix& v = es.vectors;
  Matrix rho_t = v.adjoint() * rho0.entries() * v;
  auto weights = [&](const Matrix& a) -> Matrix {
    Matrix at = v.adjoint() * a * v;
    return rho_t.cwiseProduct(at.transpose());
  };
  Matrix wq = weights(q.entries());
  Matrix wp = weights(p.entries());
  const Eigen::Index n = rho_t.rows();

  TrajectoryRecord rec;
  rec.times = times;
  rec.q_quantum.reserve(times.size());
  rec.p_quantum.reserve(times.size());
  rec.energy.reserve(times.size());
  rec.trace.reserve(times.size());
  ComplexVector u(n);
  for (double t : times) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double phase = -es.values(j) * t / hbar;
      u(j) = Complex(std::cos(phase), std::sin(phase));
    }
    ComplexVector uc = u.conjugate();
    rec.q_quantum.push_back((u.transpose() * (wq * uc)).value().real());
    rec.p_quantum.push_back((u.transpose() * (wp * uc)).value().real());
    double e = 0.0, tr = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      e += rho_t(j, j).real() * es.values(j);
      tr += rho_t(j, j).real();
    }
    rec.energy.push_back(e);
    rec.trace.push_back(tr);
  }
  return rec;
}

// H = P^2 / (2 mu) + V(Q) on the grid.
inline HermitianOperator grid_hamiltonian(const GridOperators& ops, double mu,
                                          const ForceField& f) {
  Matrix kinetic = ops.momentum.entries() * ops.momentum.entries() / (2.0 * mu);
  HermitianOperator vq = apply_function(f.potential, ops.position, "V(Q)");
  return HermitianOperator(kinetic + vq.entries(), "H");
}

// Classical reference: RK4 on (q' = p/mu, p' = F(q)) over the given grid.
inline ClassicalTrajectory newton_trajectory(double mu, const ForceField& f, double q0, double p0,
                                             const std::vector<double>& times) {
  require_increasing(times);
  if (!(mu > 0.0)) throw Error(ErrorKind::invalid_argument, "mass must be positive");
  ClassicalTrajectory out;
  out.times = times;
  double q = q0, p = p0;
  auto energy = [&](double qq, double pp) { return pp * pp / (2.0 * mu) + f.potential(qq); };
  out.q.push_back(q);
  out.p.push_back(p);
  out.energy.push_back(energy(q, p));
  for (std::size_t i = 1; i < times.size(); ++i) {
    double dt = times[i] - times[i - 1];
    double k1q = p / mu, k1p = f.force(q);
    double k2q = (p + 0.5 * dt * k1p) / mu, k2p = f.force(q + 0.5 * dt * k1q);
    double k3q = (p + 0.5 * dt * k2p) / mu, k3p = f.force(q + 0.5 * dt * k2q);
    double k4q = (p + dt * k3p) / mu, k4p = f.force(q + dt * k3q);
    q += dt / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    p += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    out.q.push_back(q);
    out.p.push_back(p);
    out.energy.push_back(energy(q, p));
  }
  return out;
}

// Largest position deviation between the quantum means and the classical
// reference over the shared time grid.
inline double compare_trajectories(const TrajectoryRecord& quantum,
                                   const ClassicalTrajectory& classical) {
  if (quantum.times.size() != classical.times.size())
    throw Error(ErrorKind::invalid_argument, "trajectories live on different time grids");
  double worst = 0.0;
  for (std::size_t i = 0; i < quantum.times.size(); ++i)
    worst = std::max(worst, std::abs(quantum.q_quantum[i] - classical.q[i]));
  return worst;
}

// Mean drift under measurement-driven sharpening:
// mu dq/dt = -lambda Var(t), with the variance history supplied by the
// caller (the model constrains only the mean).
inline std::vector<double> sharpening_ode(double mu, double lambda, double q0,
                                          const std::function<double(double)>& variance_fn,
                                          const std::vector<double>& times) {
  require_increasing(times);
  if (!(mu > 0.0) || !(lambda > 0.0))
    throw Error(ErrorKind::invalid_argument, "mu and lambda must be positive");
  std::vector<double> q;
  q.reserve(times.size());
  double cur = q0;
  q.push_back(cur);
  const double rate = lambda / mu;
  for (std::size_t i = 1; i < times.size(); ++i) {
    double t = times[i - 1];
    double dt = times[i] - t;
    double k1 = -rate * variance_fn(t);
    double k2 = -rate * variance_fn(t + 0.5 * dt);
    double k3 = k2;
    double k4 = -rate * variance_fn(t + dt);
    cur += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    q.push_back(cur);
  }
  return q;
}

}  // namespace qrn
