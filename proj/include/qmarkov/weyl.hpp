#pragma once

#include <vector>

#include "qmarkov/linalg.hpp"
#include "qmarkov/matrix.hpp"

namespace qmarkov {

// d² unitary matrices forming a trace-orthogonal basis of the d x d operators:
// Tr(A_m† A_n) = d·δ_mn, with element 0 the identity.
struct OperatorBasis {
  std::size_t dim = 0;
  std::vector<ComplexMatrix> elements;
};

// Shift/clock (Weyl-Heisenberg) construction: A_{(a,b)} = Σ_m ω^{bm} |m+a mod d><m|
// with ω = exp(2πi/d), ordered so (a,b) = (0,0) — the identity — comes first.
inline OperatorBasis weyl_basis(std::size_t d) {
  if (d == 0) throw Error(Errc::InvalidArgument, "weyl_basis: d must be positive");
  OperatorBasis basis;
  basis.dim = d;
  basis.elements.reserve(d * d);
  const double theta = 2.0 * M_PI / static_cast<double>(d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      ComplexMatrix u = ComplexMatrix::Zero(d, d);
      for (std::size_t m = 0; m < d; ++m) {
        const std::size_t bm = (b * m) % d;
        const cplx phase = bm == 0 ? cplx(1.0, 0.0) : std::polar(1.0, theta * bm);
        u((m + a) % d, m) = phase;
      }
      basis.elements.push_back(std::move(u));
    }
  }
  return basis;
}

// Coefficients c_m = (1/d)·Tr(A_m† M); M = Σ_m c_m A_m.
inline std::vector<cplx> operator_basis_coefficients(const OperatorBasis& basis,
                                                     const ComplexMatrix& m) {
  if (m.rows() != static_cast<Index>(basis.dim) || m.cols() != static_cast<Index>(basis.dim))
    throw Error(Errc::ShapeMismatch, "matrix does not match basis dimension");
  std::vector<cplx> coeffs;
  coeffs.reserve(basis.elements.size());
  for (const auto& u : basis.elements)
    coeffs.push_back((u.adjoint() * m).trace() / static_cast<double>(basis.dim));
  return coeffs;
}

}  // namespace qmarkov
