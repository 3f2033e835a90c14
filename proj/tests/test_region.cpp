#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qrn/grid.hpp"
#include "qrn/region.hpp"

using namespace qrn;

namespace {

DensityMatrix basis_state(int dim, int k) {
  ComplexVector v = ComplexVector::Zero(dim);
  v(k) = 1.0;
  return DensityMatrix::pure(v);
}

}  // namespace

TEST_CASE("evaluate_qrn intervals") {
  StateRegion single = StateRegion::singleton(basis_state(2, 0));
  HermitianOperator m = HermitianOperator::diagonal((RealVector(2) << 5, 9).finished(), "M");
  QuantumRealNumber v = evaluate_qrn(m, single);
  CHECK(v.lo == Catch::Approx(5.0));
  CHECK(v.hi == Catch::Approx(5.0));
  CHECK(v.center_value() == Catch::Approx(5.0));

  StateRegion pair(basis_state(2, 0), 2.5, 0, {basis_state(2, 0), basis_state(2, 1)});
  HermitianOperator p1 = HermitianOperator::diagonal((RealVector(2) << 0, 1).finished());
  QuantumRealNumber w = evaluate_qrn(p1, pair);
  CHECK(w.lo == Catch::Approx(0.0));
  CHECK(w.hi == Catch::Approx(1.0));

  CHECK_THROWS_AS(evaluate_qrn(HermitianOperator::identity(3), single), Error);
}

TEST_CASE("qrn width respects the trace-norm duality bound") {
  Rng rng(21);
  DensityMatrix center = DensityMatrix::maximally_mixed(4);
  const double radius = 0.1;
  StateRegion u = sample_region(center, radius, 16, 77);
  validate_region(u);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix g(4, 4);
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) g(i, j) = Complex(rng.normal(), rng.normal());
    HermitianOperator m(0.5 * (g + g.adjoint()));
    HermitianOperator unit = (1.0 / operator_norm(m)) * m;  // ||M|| = 1
    QuantumRealNumber v = evaluate_qrn(unit, u);
    CHECK(v.hi - v.lo <= 2.0 * radius + 1e-12);
  }
}

TEST_CASE("spread pinned values") {
  HermitianOperator m = HermitianOperator::diagonal((RealVector(2) << 0, 1).finished());
  CHECK(spread(m, basis_state(2, 0)) == Catch::Approx(0.0).margin(1e-9));

  // Two-point variance oracle: p(1-p) with p = 1/2 over eigenvalues {0,1}.
  CHECK(spread(m, DensityMatrix::maximally_mixed(2)) == Catch::Approx(0.5).margin(1e-12));

  GridConfig cfg{256, 10.0, 1.0};
  GridOperators ops = grid_operators(cfg);
  const double sigma = 0.7;
  CHECK(spread(ops.position, gaussian_packet(cfg, 1.0, sigma)) ==
        Catch::Approx(sigma).epsilon(0.01));
}

TEST_CASE("spread squared plus mean squared equals the second moment") {
  Rng rng(22);
  GridConfig cfg{64, 6.0, 1.0};
  GridOperators ops = grid_operators(cfg);
  HermitianOperator q2 = apply_function([](double x) { return x * x; }, ops.position);
  for (int trial = 0; trial < 10; ++trial) {
    DensityMatrix rho = random_density_matrix(64, rng);
    double s = spread(ops.position, rho);
    double mean = trace_inner(rho, ops.position);
    CHECK(s * s + mean * mean == Catch::Approx(trace_inner(rho, q2)).margin(1e-9));
  }
}

TEST_CASE("sample_region determinism and membership") {
  Rng rng(23);
  DensityMatrix center = random_density_matrix(6, rng);

  StateRegion zero = sample_region(center, 0.0, 8, 5);
  CHECK(zero.size() == 1);
  CHECK(trace_distance(zero.samples()[0], center) == Catch::Approx(0.0).margin(1e-15));

  StateRegion a = sample_region(center, 0.2, 12, 99);
  StateRegion b = sample_region(center, 0.2, 12, 99);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Matrix& ma = a.samples()[i].entries();
    const Matrix& mb = b.samples()[i].entries();
    REQUIRE(ma.rows() == mb.rows());
    for (Eigen::Index r = 0; r < ma.rows(); ++r)
      for (Eigen::Index c = 0; c < ma.cols(); ++c) {
        CHECK(ma(r, c).real() == mb(r, c).real());
        CHECK(ma(r, c).imag() == mb(r, c).imag());
      }
  }
  validate_region(a);
  // Different seeds move the witnesses.
  StateRegion c = sample_region(center, 0.2, 12, 100);
  CHECK(trace_distance(a.samples()[1], c.samples()[1]) > 1e-6);

  // Samples pass the full state validation.
  for (const auto& s : a.samples()) CHECK_NOTHROW(DensityMatrix(s.entries()));

  CHECK_THROWS_AS(sample_region(center, 0.1, 0, 1), Error);
  CHECK_THROWS_AS(sample_region(center, -0.1, 4, 1), Error);
}

TEST_CASE("pure-center regions exercise the clipping repair path") {
  StateRegion u = sample_region(basis_state(8, 3), 0.05, 10, 321);
  validate_region(u);
  for (const auto& s : u.samples()) {
    CHECK(eigvalsh(s.entries()).minCoeff() >= tol::psd_floor);
    CHECK(s.entries().trace().real() == Catch::Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("linearity of region evaluation") {
  Rng rng(24);
  DensityMatrix center = random_density_matrix(5, rng);
  StateRegion u = sample_region(center, 0.3, 10, 17);
  Matrix g1(5, 5), g2(5, 5);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 5; ++i) {
      g1(i, j) = Complex(rng.normal(), rng.normal());
      g2(i, j) = Complex(rng.normal(), rng.normal());
    }
  HermitianOperator m(0.5 * (g1 + g1.adjoint()));
  HermitianOperator n(0.5 * (g2 + g2.adjoint()));
  const double alpha = 1.7, beta = -0.4;
  HermitianOperator combo(alpha * m.entries() + beta * n.entries());
  QuantumRealNumber vm = evaluate_qrn(m, u);
  QuantumRealNumber vn = evaluate_qrn(n, u);
  QuantumRealNumber vc = evaluate_qrn(combo, u);
  for (std::size_t i = 0; i < u.size(); ++i)
    CHECK(vc.per_sample[i] ==
          Catch::Approx(alpha * vm.per_sample[i] + beta * vn.per_sample[i]).margin(1e-10));
}

TEST_CASE("monotone localization under subregions") {
  Rng rng(25);
  DensityMatrix center = random_density_matrix(4, rng);
  StateRegion u = sample_region(center, 0.4, 12, 55);
  Matrix g(4, 4);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) g(i, j) = Complex(rng.normal(), rng.normal());
  HermitianOperator m(0.5 * (g + g.adjoint()));
  QuantumRealNumber big = evaluate_qrn(m, u);
  QuantumRealNumber small = evaluate_qrn(m, u.subregion(5));
  CHECK(small.lo >= big.lo);
  CHECK(small.hi <= big.hi);
}

TEST_CASE("eps sharpness on pinned states") {
  const SlitSpec slit(-1.0, 1.0);
  const int n = 64;
  RealVector x(n);
  GridConfig cfg{n, 4.0, 1.0};
  for (int j = 0; j < n; ++j) x(j) = cfg.point(j);
  HermitianOperator z = HermitianOperator::diagonal(x, "Z");

  // Eigenstate at the midpoint: spread zero, sharp for any eps.
  StateRegion point = StateRegion::singleton(grid_point_state(cfg, slit.mid()));
  CHECK(is_eps_sharp(z, point, slit, 1e-6));
  CHECK(is_eps_sharp(z, point, slit, 0.5));

  // Mean outside the slit.
  StateRegion outside = StateRegion::singleton(grid_point_state(cfg, 2.5));
  CHECK_FALSE(is_eps_sharp(z, outside, slit, 0.1));

  // Gaussian with sigma = 0.4 w sqrt(eps): band margin 0.1 w on each side.
  const double eps = 0.04;
  const double sigma = 0.4 * slit.width() * std::sqrt(eps);
  StateRegion packet = StateRegion::singleton(gaussian_packet(cfg, slit.mid(), sigma));
  SharpnessReport report = eps_sharpness(z, packet, slit, eps);
  CHECK(report.all);
  CHECK(slit.hi - report.per_sample[0].band_hi ==
        Catch::Approx(0.1 * slit.width()).epsilon(0.02));
}

TEST_CASE("strict sharpness detects coherent leakage") {
  // Coherent superposition of a point inside the slit and one outside:
  // sqrt(1-q)|in> + sqrt(q)|out>. The band still fits (plain eps-sharp) but
  // Tr|rho - P rho P| = sqrt(q(4-3q)) >> eps.
  const double eps = 0.1;
  const double w = 2.0;
  const double q = 0.04;
  const double d = 1.2 * (w / 2.0);
  RealVector zvals(2);
  zvals << 0.0, d;
  HermitianOperator z = HermitianOperator::diagonal(zvals, "Z");
  SlitSpec slit(-w / 2.0, w / 2.0);
  ComplexVector psi(2);
  psi << std::sqrt(1.0 - q), std::sqrt(q);
  StateRegion u = StateRegion::singleton(DensityMatrix::pure(psi));

  CHECK(is_eps_sharp(z, u, slit, eps));
  StrictSharpnessReport strict = strict_eps_sharpness(z, u, slit, eps);
  CHECK_FALSE(strict.all);
  CHECK(strict.projection_distance[0] ==
        Catch::Approx(std::sqrt(q * (4.0 - 3.0 * q))).margin(1e-10));

  // An incoherent two-point mixture with the same weights stays strict:
  // the leaked block contributes only its mass q < eps.
  Matrix mix = Matrix::Zero(2, 2);
  mix(0, 0) = 1.0 - q;
  mix(1, 1) = q;
  StateRegion um = StateRegion::singleton(DensityMatrix(mix));
  StrictSharpnessReport strict_mix = strict_eps_sharpness(z, um, slit, eps);
  CHECK(strict_mix.all);
  CHECK(strict_mix.projection_distance[0] == Catch::Approx(q).margin(1e-12));

  // Strict sharpness implies plain sharpness on eigenstates for every eps.
  for (double e : {0.01, 0.1, 0.5, 0.9}) {
    StateRegion point = StateRegion::singleton(basis_state(2, 0));
    CHECK(is_strictly_eps_sharp(z, point, slit, e));
    CHECK(is_eps_sharp(z, point, slit, e));
  }
}

TEST_CASE("restrict_to_slit") {
  Projector p(HermitianOperator::diagonal((RealVector(2) << 1, 0).finished()));

  DensityMatrix inside = basis_state(2, 0);
  CHECK(trace_distance(restrict_to_slit(inside, p), inside) < 1e-12);

  DensityMatrix half = DensityMatrix::maximally_mixed(2);
  CHECK(trace_distance(restrict_to_slit(half, p), inside) < 1e-12);

  Rng rng(26);
  for (int trial = 0; trial < 10; ++trial) {
    DensityMatrix rho = random_density_matrix(6, rng);
    Projector proj = spectral_projector(
        HermitianOperator::diagonal((RealVector(6) << 0, 1, 2, 3, 4, 5).finished()), 0.5, 3.5);
    DensityMatrix restricted = restrict_to_slit(rho, proj);
    CHECK(restricted.entries().trace().real() == Catch::Approx(1.0).margin(1e-12));
    Matrix back = proj.entries() * restricted.entries() * proj.entries();
    CHECK((back - restricted.entries()).cwiseAbs().maxCoeff() < 1e-12);
  }

  CHECK_THROWS_MATCHES(restrict_to_slit(basis_state(2, 1), p), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.kind() == ErrorKind::null_restriction;
                       }));
}

TEST_CASE("approximate classicality") {
  HermitianOperator m = HermitianOperator::diagonal((RealVector(2) << 0, 1).finished());
  StateRegion point = StateRegion::singleton(basis_state(2, 0));
  CHECK(is_approx_classical(m, point, 1e-8));

  // Separation-d two-peak mixture: discrepancy d^2/4.
  const double sep = 1.0;
  HermitianOperator z = HermitianOperator::diagonal((RealVector(2) << 0, sep).finished());
  StateRegion mix = StateRegion::singleton(DensityMatrix::maximally_mixed(2));
  ClassicalityReport report = classicality(z, mix, 1.0);
  CHECK(report.discrepancy[0] == Catch::Approx(sep * sep / 4.0).margin(1e-12));
  CHECK_FALSE(is_approx_classical(z, mix, sep * sep / 4.0 * 0.999));

  GridConfig cfg{128, 6.0, 1.0};
  GridOperators ops = grid_operators(cfg);
  const double eps2 = 0.01;
  StateRegion packet =
      StateRegion::singleton(gaussian_packet(cfg, 0.0, std::sqrt(eps2) * 0.8));
  CHECK(is_approx_classical(ops.position, packet, eps2));
}
