#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "qrn/errors.hpp"

namespace qrn {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

namespace tol {
inline constexpr double hermiticity = 1e-12;
inline constexpr double trace_one = 1e-10;
inline constexpr double psd_floor = -1e-10;
inline constexpr double projector_idem = 1e-10;
inline constexpr double projector_spectrum = 1e-8;
inline constexpr double eigen_merge = 1e-8;          // degenerate eigenvalues merged below this gap
inline constexpr double interval_boundary = 1e-9;    // open-interval exclusion band
inline constexpr double reconstruction = 1e-9;
inline constexpr double trace_imag = 1e-10;
inline constexpr double variance_clip = -1e-12;
inline constexpr double weight_floor = 1e-12;        // smallest usable branch / restriction weight
inline constexpr double bound_slack = 1e-9;          // additive slack on theorem-grade bounds
inline constexpr double commutator = 1e-10;
}  // namespace tol

inline bool approx_hermitian(const Matrix& m, double eps = tol::hermiticity) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= eps;
}

// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
struct EighResult {
  RealVector values;
  Matrix vectors;
};

inline EighResult eigh(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::invariant_violation, "eigendecomposition failed to converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline RealVector eigvalsh(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::invariant_violation, "eigenvalue computation failed to converge");
  return solver.eigenvalues();
}

// Tr(AB) for same-sized square matrices without forming the product.
inline Complex trace_product(const Matrix& a, const Matrix& b) {
  return (a.cwiseProduct(b.transpose())).sum();
}

// Self-adjoint operator on a finite-dimensional space. Construction
// symmetrizes, so the stored entries always equal their conjugate transpose.
class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix entries, std::string label = "")
      : label_(std::move(label)) {
    if (entries.rows() < 1 || entries.rows() != entries.cols())
      throw Error(ErrorKind::invalid_argument, "operator must be square with dim >= 1");
    entries_ = 0.5 * (entries + entries.adjoint());
  }

  static HermitianOperator diagonal(const RealVector& values, std::string label = "") {
    Matrix m = Matrix::Zero(values.size(), values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) m(i, i) = values(i);
    return HermitianOperator(std::move(m), std::move(label));
  }

  static HermitianOperator identity(int dim, std::string label = "I") {
    return HermitianOperator(Matrix::Identity(dim, dim), std::move(label));
  }

  static HermitianOperator zero(int dim, std::string label = "0") {
    return HermitianOperator(Matrix::Zero(dim, dim), std::move(label));
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }
  const std::string& label() const { return label_; }

  HermitianOperator relabeled(std::string label) const {
    HermitianOperator out = *this;
    out.label_ = std::move(label);
    return out;
  }

  HermitianOperator operator+(const HermitianOperator& rhs) const {
    require_same_dim(rhs);
    return HermitianOperator(entries_ + rhs.entries_, label_);
  }

  HermitianOperator operator-(const HermitianOperator& rhs) const {
    require_same_dim(rhs);
    return HermitianOperator(entries_ - rhs.entries_, label_);
  }

  friend HermitianOperator operator*(double s, const HermitianOperator& op) {
    return HermitianOperator(s * op.entries_, op.label_);
  }

  void require_same_dim(const HermitianOperator& rhs) const {
    if (dim() != rhs.dim())
      throw Error(ErrorKind::dimension_mismatch,
                  "operator dims " + std::to_string(dim()) + " vs " + std::to_string(rhs.dim()));
  }

 private:
  Matrix entries_;
  std::string label_;
};

// Positive unit-trace state. The validating constructor is the default entry
// point; `repaired` clips sampling noise; `trusted` is for callers that can
// prove positivity and only pay the cheap checks.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix entries) : DensityMatrix(std::move(entries), true) {}

  static DensityMatrix trusted(Matrix entries) { return DensityMatrix(std::move(entries), false); }

  // Clips negative eigenvalues to zero and renormalizes the trace.
  static DensityMatrix repaired(const Matrix& entries) {
    if (entries.rows() != entries.cols())
      throw Error(ErrorKind::invalid_argument, "state must be square");
    Matrix sym = 0.5 * (entries + entries.adjoint());
    EighResult es = eigh(sym);
    RealVector clipped = es.values.cwiseMax(0.0);
    double total = clipped.sum();
    if (total <= tol::weight_floor)
      throw Error(ErrorKind::invalid_argument, "state has no positive weight to renormalize");
    Matrix m = es.vectors * (clipped / total).asDiagonal() * es.vectors.adjoint();
    return trusted(std::move(m));
  }

  static DensityMatrix pure(const ComplexVector& psi) {
    double n2 = psi.squaredNorm();
    if (n2 <= 0.0) throw Error(ErrorKind::invalid_argument, "zero vector cannot define a state");
    Matrix m = (psi * psi.adjoint()) / n2;
    return trusted(std::move(m));
  }

  static DensityMatrix maximally_mixed(int dim) {
    return trusted(Matrix::Identity(dim, dim) / static_cast<double>(dim));
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Matrix& entries() const { return entries_; }

 private:
  DensityMatrix(Matrix entries, bool validate_spectrum) {
    if (entries.rows() < 1 || entries.rows() != entries.cols())
      throw Error(ErrorKind::invalid_argument, "state must be square with dim >= 1");
    if (!approx_hermitian(entries, 1e-10))
      throw Error(ErrorKind::invariant_violation, "state is not hermitian");
    entries_ = 0.5 * (entries + entries.adjoint());
    double tr = entries_.trace().real();
    if (std::abs(tr - 1.0) > tol::trace_one)
      throw Error(ErrorKind::invariant_violation,
                  "state trace " + std::to_string(tr) + " is not 1");
    if (validate_spectrum) {
      RealVector vals = eigvalsh(entries_);
      if (vals.minCoeff() < tol::psd_floor)
        throw Error(ErrorKind::invariant_violation,
                    "state has negative eigenvalue " + std::to_string(vals.minCoeff()));
    }
  }

  Matrix entries_;
};

// Orthogonal projection; idempotence and 0/1 spectrum are checked on entry.
class Projector {
 public:
  explicit Projector(HermitianOperator op) : op_(std::move(op)) {
    const Matrix& p = op_.entries();
    bool diagonal = true;
    for (Eigen::Index j = 0; j < p.cols() && diagonal; ++j)
      for (Eigen::Index i = 0; i < p.rows(); ++i)
        if (i != j && p(i, j) != Complex(0.0, 0.0)) {
          diagonal = false;
          break;
        }
    if (diagonal) {
      for (Eigen::Index i = 0; i < p.rows(); ++i) {
        double v = p(i, i).real();
        if (std::min(std::abs(v), std::abs(v - 1.0)) > tol::projector_spectrum)
          throw Error(ErrorKind::invariant_violation, "projector eigenvalue off {0,1}");
      }
      return;
    }
    double idem = (p * p - p).cwiseAbs().maxCoeff();
    if (idem > tol::projector_idem)
      throw Error(ErrorKind::invariant_violation,
                  "projector fails idempotence by " + std::to_string(idem));
    RealVector vals = eigvalsh(p);
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
      double d = std::min(std::abs(vals(i)), std::abs(vals(i) - 1.0));
      if (d > tol::projector_spectrum)
        throw Error(ErrorKind::invariant_violation, "projector eigenvalue off {0,1}");
    }
  }

  static Projector zero(int dim) { return Projector(HermitianOperator::zero(dim, "0")); }
  static Projector identity(int dim) { return Projector(HermitianOperator::identity(dim)); }

  int dim() const { return op_.dim(); }
  const Matrix& entries() const { return op_.entries(); }
  const HermitianOperator& op() const { return op_; }

  Projector complement() const {
    return Projector(HermitianOperator(Matrix::Identity(dim(), dim()) - entries(),
                                       "1-" + op_.label()));
  }

  double rank() const { return std::round(entries().trace().real()); }

 private:
  HermitianOperator op_;
};

struct SpectralDecomposition {
  std::vector<double> eigenvalues;       // ascending, degeneracies merged
  std::vector<HermitianOperator> eigenprojectors;
};

// Tr(rho M) as a real number; the imaginary residue must stay below 1e-10.
inline double trace_inner(const DensityMatrix& rho, const HermitianOperator& m) {
  if (rho.dim() != m.dim())
    throw Error(ErrorKind::dimension_mismatch, "state dim " + std::to_string(rho.dim()) +
                                                   " vs operator dim " + std::to_string(m.dim()));
  Complex t = trace_product(rho.entries(), m.entries());
  if (std::abs(t.imag()) > tol::trace_imag)
    throw Error(ErrorKind::invariant_violation,
                "trace imaginary residue " + std::to_string(t.imag()));
  return t.real();
}

inline double trace_norm(const Matrix& hermitian) {
  return eigvalsh(hermitian).cwiseAbs().sum();
}

inline double trace_norm(const HermitianOperator& a) { return trace_norm(a.entries()); }

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::dimension_mismatch, "state dims differ");
  return trace_norm(Matrix(a.entries() - b.entries()));
}

inline double operator_norm(const Matrix& hermitian) {
  RealVector vals = eigvalsh(hermitian);
  return std::max(std::abs(vals.minCoeff()), std::abs(vals.maxCoeff()));
}

inline double operator_norm(const HermitianOperator& a) { return operator_norm(a.entries()); }

// sqrt(A*A): same eigenvectors, absolute eigenvalues.
inline HermitianOperator operator_abs(const HermitianOperator& a) {
  EighResult es = eigh(a.entries());
  Matrix m = es.vectors * es.values.cwiseAbs().asDiagonal() * es.vectors.adjoint();
  return HermitianOperator(std::move(m), "|" + a.label() + "|");
}

inline SpectralDecomposition spectral_decompose(const HermitianOperator& a,
                                                double merge_gap = tol::eigen_merge) {
  EighResult es = eigh(a.entries());
  SpectralDecomposition out;
  const Eigen::Index n = es.values.size();
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && es.values(stop) - es.values(stop - 1) < merge_gap) ++stop;
    Matrix block = es.vectors.middleCols(start, stop - start);
    Matrix proj = block * block.adjoint();
    double mean = es.values.segment(start, stop - start).mean();
    out.eigenvalues.push_back(mean);
    out.eigenprojectors.emplace_back(std::move(proj), a.label() + "-band");
    start = stop;
  }
  return out;
}

inline bool is_diagonal(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != Complex(0.0, 0.0)) return false;
  return true;
}

// Spectral projector onto the open interval ]lo, hi[. Eigenvalues within
// `boundary` of an endpoint are excluded. An empty intersection with the
// spectrum yields the zero projector.
inline Projector spectral_projector(const HermitianOperator& a, double lo, double hi,
                                    double boundary = tol::interval_boundary) {
  if (!(lo < hi)) throw Error(ErrorKind::invalid_argument, "interval is empty");
  const Matrix& m = a.entries();
  auto inside = [&](double v) { return v > lo + boundary && v < hi - boundary; };
  if (is_diagonal(m)) {
    RealVector diag(a.dim());
    for (int i = 0; i < a.dim(); ++i) diag(i) = inside(m(i, i).real()) ? 1.0 : 0.0;
    return Projector(HermitianOperator::diagonal(diag, "E_" + a.label()));
  }
  EighResult es = eigh(m);
  Matrix p = Matrix::Zero(a.dim(), a.dim());
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (inside(es.values(i))) p += es.vectors.col(i) * es.vectors.col(i).adjoint();
  return Projector(HermitianOperator(std::move(p), "E_" + a.label()));
}

// Spectral calculus f(A). Diagonal operators take the elementwise fast path.
template <typename Fn>
HermitianOperator apply_function(Fn&& f, const HermitianOperator& a, std::string label = "") {
  const Matrix& m = a.entries();
  const Eigen::Index n = m.rows();
  bool diagonal = true;
  for (Eigen::Index j = 0; j < n && diagonal; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j && m(i, j) != Complex(0.0, 0.0)) {
        diagonal = false;
        break;
      }
  if (label.empty()) label = "f(" + a.label() + ")";
  if (diagonal) {
    RealVector vals(n);
    for (Eigen::Index i = 0; i < n; ++i) vals(i) = f(m(i, i).real());
    return HermitianOperator::diagonal(vals, std::move(label));
  }
  EighResult es = eigh(m);
  RealVector mapped(n);
  for (Eigen::Index i = 0; i < n; ++i) mapped(i) = f(es.values(i));
  Matrix out = es.vectors * mapped.asDiagonal() * es.vectors.adjoint();
  return HermitianOperator(std::move(out), std::move(label));
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  return HermitianOperator(kron(a.entries(), b.entries()), a.label() + "(x)" + b.label());
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix::trusted(kron(a.entries(), b.entries()));
}

// Partial trace over the discarded factor of a d1*d2 system; keep is 1 or 2.
inline Matrix partial_trace_matrix(const Matrix& m, int keep, int d1, int d2) {
  if (keep != 1 && keep != 2)
    throw Error(ErrorKind::invalid_argument, "keep must be 1 or 2");
  if (m.rows() != m.cols() || m.rows() != static_cast<Eigen::Index>(d1) * d2)
    throw Error(ErrorKind::dimension_mismatch,
                "joint dim " + std::to_string(m.rows()) + " does not factor as " +
                    std::to_string(d1) + "*" + std::to_string(d2));
  if (keep == 1) {
    Matrix out = Matrix::Zero(d1, d1);
    for (int i = 0; i < d1; ++i)
      for (int j = 0; j < d1; ++j)
        for (int k = 0; k < d2; ++k) out(i, j) += m(i * d2 + k, j * d2 + k);
    return out;
  }
  Matrix out = Matrix::Zero(d2, d2);
  for (int i = 0; i < d2; ++i)
    for (int j = 0; j < d2; ++j)
      for (int k = 0; k < d1; ++k) out(i, j) += m(k * d2 + i, k * d2 + j);
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, int keep, int d1, int d2) {
  return DensityMatrix(partial_trace_matrix(rho.entries(), keep, d1, d2));
}

// Operator norm of the commutator; AB-BA is anti-hermitian, so we measure
// the (hermitian) matrix i[A,B].
inline double commute_check(const HermitianOperator& a, const HermitianOperator& b) {
  a.require_same_dim(b);
  Matrix c = a.entries() * b.entries() - b.entries() * a.entries();
  Matrix ic = Complex(0.0, 1.0) * c;
  return operator_norm(Matrix(0.5 * (ic + ic.adjoint())));
}

// P M P, hermitian whenever M and P are.
inline HermitianOperator sandwich(const Projector& p, const HermitianOperator& m) {
  if (p.dim() != m.dim()) throw Error(ErrorKind::dimension_mismatch, "projector/operator dims");
  return HermitianOperator(p.entries() * m.entries() * p.entries(),
                           "P" + m.label() + "P");
}

}  // namespace qrn
