#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "qrn/pointer.hpp"

using namespace qrn;

namespace {

const GridConfig kSys{16, 3.0, 1.0};
const GridConfig kPtr{16, 2.0, 1.0};

}  // namespace

TEST_CASE("pointer final operator") {
  PointerModel tiny(kSys, kPtr, 1e-9, 1.0);
  HermitianOperator xf = pointer_final_operator(tiny);
  HermitianOperator x2j = tensor(HermitianOperator::identity(kSys.n), tiny.x2);
  CHECK((xf.entries() - x2j.entries()).cwiseAbs().maxCoeff() < 1e-8);

  // Spectrum oracle: diagonal model, eigenvalues are all sums
  // x2 + (g dt) x1 over the two grids.
  PointerModel model(kSys, kPtr, 0.5, 1.0);
  RealVector vals = eigvalsh(pointer_final_operator(model).entries());
  std::vector<double> sums;
  for (int i = 0; i < kSys.n; ++i)
    for (int j = 0; j < kPtr.n; ++j) sums.push_back(kPtr.point(j) + 0.5 * kSys.point(i));
  std::sort(sums.begin(), sums.end());
  REQUIRE(vals.size() == static_cast<Eigen::Index>(sums.size()));
  for (Eigen::Index k = 0; k < vals.size(); ++k)
    CHECK(vals(k) == Catch::Approx(sums[k]).margin(1e-10));

  CHECK_THROWS_AS(PointerModel(kSys, kPtr, 0.0, 1.0), Error);
  CHECK_THROWS_AS(PointerModel(GridConfig{128, 3.0, 1.0}, GridConfig{64, 2.0, 1.0}, 1.0, 1.0),
                  Error);
}

TEST_CASE("superset construction and factorization") {
  StateRegion w1 = StateRegion::singleton(gaussian_packet(kSys, 0.5, 0.4));
  StateRegion w2 = StateRegion::singleton(gaussian_packet(kPtr, 0.0, 0.3));
  TwoParticleRegion single = build_superset(w1, w2, 1, 3);
  CHECK(single.joint.size() == 1);
  validate_superset(single);

  StateRegion r1 = packet_region(kSys, 0.5, 0.4, 6, 11, 1e-3);
  StateRegion r2 = packet_region(kPtr, 0.0, 0.3, 6, 12, 1e-3);
  TwoParticleRegion joint = build_superset(r1, r2, 8, 5);
  validate_superset(joint);

  // Product samples carry no position cross-covariance.
  PointerModel model(kSys, kPtr, 1.0, 1.0);
  HermitianOperator x1j = tensor(model.x1, HermitianOperator::identity(kPtr.n));
  HermitianOperator x2j = tensor(HermitianOperator::identity(kSys.n), model.x2);
  HermitianOperator x1x2 = tensor(model.x1, model.x2);
  for (const auto& rho : joint.joint) {
    double cov = trace_inner(rho, x1x2) - trace_inner(rho, x1j) * trace_inner(rho, x2j);
    CHECK(std::abs(cov) < 1e-10);
  }
}

TEST_CASE("spread decomposition identity and terms") {
  PointerModel model(kSys, kPtr, 1.0, 1.0);

  // Both factors at grid eigenstates: total spread vanishes.
  TwoParticleRegion points = build_superset(
      StateRegion::singleton(grid_point_state(kSys, 0.75)),
      StateRegion::singleton(grid_point_state(kPtr, -0.5)), 1, 0);
  std::vector<SpreadDecomposition> zero = pointer_spread(model, points);
  CHECK(zero[0].total_sq == Catch::Approx(0.0).margin(1e-12));
  CHECK(check_spread_decomposition(model, points).passed);

  // Product states: cross term zero, total = pointer + particle terms.
  TwoParticleRegion joint = build_superset(
      packet_region(kSys, 0.0, 0.5, 4, 21, 1e-3), packet_region(kPtr, 0.0, 0.25, 4, 22, 1e-3), 6,
      9);
  for (const auto& d : pointer_spread(model, joint)) {
    CHECK(std::abs(d.cross_term) < 1e-10);
    CHECK(d.total_sq == Catch::Approx(d.pointer_term + d.particle_term).margin(1e-9));
  }
  CHECK(check_spread_decomposition(model, joint).passed);

  // 50/50 mixture across slit centers a and c: the kicked-in variance term
  // approaches (g dt)^2 ((c-a)/2)^2.
  const double a = -1.0, c = 1.0;
  StateRegion mix = union_region(kSys, a, c, 0.25, 4, 31, 1e-4, false);
  TwoParticleRegion um =
      build_superset(mix, StateRegion::singleton(gaussian_packet(kPtr, 0.0, 0.25)), 4, 13);
  std::vector<SpreadDecomposition> dm = pointer_spread(model, um);
  double expect = std::pow((c - a) / 2.0, 2);
  CHECK(dm[0].particle_term == Catch::Approx(expect).epsilon(0.1));
  CHECK(dm[0].particle_term > 0.9);
}

TEST_CASE("registration classification") {
  const double eps2 = 0.01;
  PointerModel model(kSys, kPtr, 1.0, 1.0);
  StateRegion w2 = packet_region(kPtr, 0.0, 0.08, 4, 41, 1e-7);
  REQUIRE(is_approx_classical(model.x2, w2, eps2));

  // Single slit, nearly classical system region: registered.
  StateRegion single = packet_region(kSys, -1.0, 0.08, 4, 42, 1e-7);
  RegistrationResult reg = classify_registration(model, single, w2, eps2);
  CHECK(reg.registered);
  CHECK(reg.worst_total_sq <= reg.threshold);
  CHECK(reg.threshold == Catch::Approx((1.0 + 1.0) * eps2).margin(1e-15));

  // Union of both slits: the particle term alone breaks the threshold.
  StateRegion both = union_region(kSys, -1.0, 1.0, 0.08, 4, 43, 1e-7, false);
  RegistrationResult nreg = classify_registration(model, both, w2, eps2);
  CHECK_FALSE(nreg.registered);
  CHECK(nreg.worst_particle_term > 0.9);

  // Coherent superposition across the slits fails the same way.
  StateRegion coherent = union_region(kSys, -1.0, 1.0, 0.08, 4, 44, 1e-7, true);
  CHECK_FALSE(classify_registration(model, coherent, w2, eps2).registered);

  // Vanishing kick decouples the pointer: even the union registers.
  PointerModel weak(kSys, kPtr, 1e-6, 1.0);
  CHECK(classify_registration(weak, both, w2, eps2).registered);

  // Monotonicity: enlarging the system region from one slit to the union
  // never shrinks the kicked-in variance term.
  CHECK(nreg.worst_particle_term >=
        classify_registration(model, single, w2, eps2).worst_particle_term);

  // A non-classical pointer preparation is rejected.
  StateRegion bad = union_region(kPtr, -1.0, 1.0, 0.08, 2, 45, 1e-7, false);
  CHECK_THROWS_MATCHES(classify_registration(model, single, bad, eps2), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::hypothesis_not_met;
                       }));
}

TEST_CASE("classification is covariant under grid-aligned slit shifts") {
  // Shift both slit centers by one grid step times an integer; on the
  // periodic grid this is an exact relabeling away from the boundary.
  GridConfig sys{32, 4.0, 1.0};
  PointerModel model(sys, kPtr, 1.0, 1.0);
  StateRegion w2 = packet_region(kPtr, 0.0, 0.25, 3, 51, 1e-7);

  const double shift = 0.5;  // two steps of the 0.25 grid
  StateRegion u0 = union_region(sys, -1.0, 1.0, 0.3, 3, 52, 1e-7, false);
  StateRegion u1 = union_region(sys, -1.0 + shift, 1.0 + shift, 0.3, 3, 52, 1e-7, false);
  RegistrationResult r0 = classify_registration(model, u0, w2, 0.1);
  RegistrationResult r1 = classify_registration(model, u1, w2, 0.1);
  CHECK(r0.registered == r1.registered);
  CHECK(r0.worst_particle_term == Catch::Approx(r1.worst_particle_term).margin(1e-9));
  CHECK(r0.worst_total_sq == Catch::Approx(r1.worst_total_sq).margin(1e-9));
}
