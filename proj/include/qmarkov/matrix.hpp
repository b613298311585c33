#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <initializer_list>

#include "qmarkov/errors.hpp"

namespace qmarkov {

using cplx = std::complex<double>;

// Dense complex matrix, row-major so flattened entries match the serialized
// row-major convention used by the state files.
using ComplexMatrix =
    Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

using Index = Eigen::Index;

inline ComplexMatrix identity(Index d) { return ComplexMatrix::Identity(d, d); }

inline ComplexMatrix zeros(Index rows, Index cols) {
  return ComplexMatrix::Zero(rows, cols);
}

// |i> as a d x 1 matrix.
inline ComplexMatrix basis_column(Index d, Index i) {
  if (i < 0 || i >= d) throw Error(Errc::IndexOutOfRange, "basis index out of range");
  ComplexMatrix v = ComplexMatrix::Zero(d, 1);
  v(i, 0) = 1.0;
  return v;
}

inline ComplexMatrix dagger(const ComplexMatrix& m) { return m.adjoint(); }

inline double frobenius_norm(const ComplexMatrix& m) { return m.norm(); }

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool all_finite(const ComplexMatrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const cplx v = m(i, j);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
  return true;
}

inline void require_finite(const ComplexMatrix& m, const char* who) {
  if (!all_finite(m))
    throw Error(Errc::InvalidArgument, std::string(who) + ": non-finite entries");
}

// max_i |m(i,j) - conj(m(j,i))|; zero for exactly Hermitian matrices.
inline double hermiticity_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols())
    throw Error(Errc::ShapeMismatch, "hermiticity defect of non-square matrix");
  return max_abs(m - m.adjoint());
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

inline cplx trace(const ComplexMatrix& m) { return m.trace(); }

// Small literal helper for tests and builders; rows of equal length.
inline ComplexMatrix matrix_from_rows(std::initializer_list<std::initializer_list<cplx>> rows) {
  const Index r = static_cast<Index>(rows.size());
  const Index c = r > 0 ? static_cast<Index>(rows.begin()->size()) : 0;
  ComplexMatrix m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Index>(row.size()) != c)
      throw Error(Errc::ShapeMismatch, "ragged rows in matrix literal");
    Index j = 0;
    for (const cplx& v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

namespace pauli {
inline ComplexMatrix x() { return matrix_from_rows({{0, 1}, {1, 0}}); }
inline ComplexMatrix y() { return matrix_from_rows({{0, cplx(0, -1)}, {cplx(0, 1), 0}}); }
inline ComplexMatrix z() { return matrix_from_rows({{1, 0}, {0, -1}}); }
}  // namespace pauli

}  // namespace qmarkov
