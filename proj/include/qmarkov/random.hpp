#pragma once

#include <random>

#include "qmarkov/channel.hpp"
#include "qmarkov/density.hpp"

namespace qmarkov {

// All randomized routines take an explicit engine; callers own seeding. The
// generator is std::mt19937_64 throughout, so a seed pins the whole sweep.
using Rng = std::mt19937_64;

// Entries i.i.d. standard complex normal.
inline ComplexMatrix ginibre(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = cplx(re, im);
    }
  return m;
}

// Haar-distributed unitary: QR of a Ginibre matrix with the R-diagonal phases
// folded into Q (Mezzadri's construction).
inline ComplexMatrix random_haar_unitary(Index d, Rng& rng) {
  const ComplexMatrix g = ginibre(d, d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < d; ++i) {
    const cplx rii = r(i, i);
    const double a = std::abs(rii);
    q.col(i) *= a > 0.0 ? rii / a : cplx(1.0, 0.0);
  }
  return q;
}

// G·G†/Tr(G·G†) for a d x rank Ginibre G.
inline DensityMatrix random_density(const SpaceLayout& layout, std::size_t rank, Rng& rng) {
  const std::size_t d = layout.total_dim();
  if (rank == 0 || rank > d)
    throw Error(Errc::InvalidArgument, "random_density: rank must be in [1, dim]");
  const ComplexMatrix g = ginibre(static_cast<Index>(d), static_cast<Index>(rank), rng);
  ComplexMatrix m = g * g.adjoint();
  m /= m.real().trace();
  return validate_density(m, layout);
}

inline DensityMatrix random_density(const SpaceLayout& layout, std::size_t rank,
                                    std::uint64_t seed) {
  Rng rng(seed);
  return random_density(layout, rank, rng);
}

// Haar-random isometry H_in -> H_out ⊗ H_anc sliced along the ancilla basis;
// the slices are Kraus operators with Σ f†f = V†V = I.
inline KrausChannel random_cptp(const SpaceLayout& in_layout, const SpaceLayout& out_layout,
                                std::size_t kraus_count, Rng& rng) {
  const Index d_in = static_cast<Index>(in_layout.total_dim());
  const Index d_out = static_cast<Index>(out_layout.total_dim());
  if (kraus_count < 1) throw Error(Errc::InvalidArgument, "random_cptp: kraus_count >= 1");
  const Index big = d_out * static_cast<Index>(kraus_count);
  if (big < d_in)
    throw Error(Errc::InvalidArgument, "random_cptp: d_out * kraus_count < d_in");
  const ComplexMatrix u = random_haar_unitary(big, rng);
  const ComplexMatrix v = u.leftCols(d_in);  // isometry
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(kraus_count);
  for (std::size_t i = 0; i < kraus_count; ++i) {
    ComplexMatrix f(d_out, d_in);
    for (Index o = 0; o < d_out; ++o)
      f.row(o) = v.row(o * static_cast<Index>(kraus_count) + static_cast<Index>(i));
    kraus.push_back(std::move(f));
  }
  return validate_channel(kraus, in_layout, out_layout);
}

inline KrausChannel random_cptp(const SpaceLayout& in_layout, const SpaceLayout& out_layout,
                                std::size_t kraus_count, std::uint64_t seed) {
  Rng rng(seed);
  return random_cptp(in_layout, out_layout, kraus_count, rng);
}

}  // namespace qmarkov
