#pragma once

#include <Eigen/Eigenvalues>
#include <vector>

#include "qmarkov/matrix.hpp"

namespace qmarkov {

namespace tol {
inline constexpr double hermitian = 1e-10;
inline constexpr double psd = 1e-10;          // eigenvalues >= -psd
inline constexpr double support_cutoff = 1e-12;  // eigenvalues below count as zero
inline constexpr double trace_one = 1e-10;
inline constexpr double completeness = 1e-10;
inline constexpr double completeness_composed = 1e-9;
inline constexpr double assignment_consistency = 1e-8;
inline constexpr double cmi_default = 1e-9;
inline constexpr double reassembly = 1e-8;
inline constexpr double recovery_roundtrip = 1e-7;
}  // namespace tol

struct EighResult {
  RealVector eigenvalues;   // descending
  ComplexMatrix eigenvectors;  // columns, matching order
};

// Hermitian eigendecomposition. Symmetrizes (m+m†)/2 when the hermiticity
// defect is within `herm_tol`, errors beyond it. Eigenvalues descending.
inline EighResult eigh(const ComplexMatrix& m, double herm_tol = tol::hermitian) {
  const double defect = hermiticity_defect(m);
  if (defect > herm_tol)
    throw Error(Errc::NonHermitian,
                "hermiticity defect " + std::to_string(defect) + " exceeds tolerance");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success)
    throw Error(Errc::InvalidArgument, "eigendecomposition failed to converge");
  const Index d = m.rows();
  EighResult out;
  out.eigenvalues = RealVector(d);
  out.eigenvectors = ComplexMatrix(d, d);
  for (Index i = 0; i < d; ++i) {  // Eigen returns ascending order
    out.eigenvalues(i) = solver.eigenvalues()(d - 1 - i);
    out.eigenvectors.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  return out;
}

namespace detail {

inline ComplexMatrix psd_function(const ComplexMatrix& m, double (*fn)(double),
                                  double psd_tol, double cutoff) {
  EighResult e = eigh(m);
  const Index d = m.rows();
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) {
    double lam = e.eigenvalues(i);
    if (lam < -psd_tol)
      throw Error(Errc::NotPsd, "eigenvalue " + std::to_string(lam) + " below -tolerance");
    if (lam < cutoff) continue;
    out += fn(lam) * (e.eigenvectors.col(i) * e.eigenvectors.col(i).adjoint());
  }
  return out;
}

}  // namespace detail

// Positive-semidefinite square root; eigenvalues in [-psd_tol, 0) clipped to 0.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& m, double psd_tol = tol::psd) {
  return detail::psd_function(
      m, +[](double x) { return std::sqrt(x); }, psd_tol, tol::support_cutoff);
}

// Inverse of psd_sqrt on the support; eigenvalues below the support cutoff are
// treated as zero and excluded from inversion.
inline ComplexMatrix psd_pinv_sqrt(const ComplexMatrix& m, double psd_tol = tol::psd) {
  return detail::psd_function(
      m, +[](double x) { return 1.0 / std::sqrt(x); }, psd_tol, tol::support_cutoff);
}

// Projector onto the eigenspaces with eigenvalue above the support cutoff.
inline ComplexMatrix support_projector(const ComplexMatrix& m, double psd_tol = tol::psd) {
  return detail::psd_function(
      m, +[](double) { return 1.0; }, psd_tol, tol::support_cutoff);
}

inline Index psd_rank(const ComplexMatrix& m, double cutoff = tol::support_cutoff) {
  EighResult e = eigh(m);
  Index r = 0;
  for (Index i = 0; i < e.eigenvalues.size(); ++i)
    if (e.eigenvalues(i) >= cutoff) ++r;
  return r;
}

// (1/2)·sum |eigenvalues of (a-b)| for Hermitian a, b.
inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(Errc::ShapeMismatch, "trace_distance shape mismatch");
  EighResult e = eigh(a - b);
  double acc = 0.0;
  for (Index i = 0; i < e.eigenvalues.size(); ++i) acc += std::abs(e.eigenvalues(i));
  return 0.5 * acc;
}

}  // namespace qmarkov
