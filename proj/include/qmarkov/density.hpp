#pragma once

#include <string>
#include <vector>

#include "qmarkov/layout.hpp"
#include "qmarkov/linalg.hpp"
#include "qmarkov/tensor.hpp"

namespace qmarkov {

// Validated density operator on a composite space: Hermitian, PSD and unit
// trace within tolerance, with dimensions matching the layout.
struct DensityMatrix {
  ComplexMatrix mat;
  SpaceLayout layout;

  std::size_t dim() const { return layout.total_dim(); }
};

struct DensityTolerances {
  double hermitian = tol::hermitian;
  double psd = tol::psd;
  double trace_one = tol::trace_one;
};

// Checks the invariants; clips eigenvalues in [-psd_tol, 0) to zero and
// renormalizes trace drift within tolerance.
inline DensityMatrix validate_density(const ComplexMatrix& m, const SpaceLayout& layout,
                                      const DensityTolerances& t = {}) {
  require_finite(m, "validate_density");
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != layout.total_dim())
    throw Error(Errc::LayoutMismatch,
                "matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                    " but layout " + layout.to_string() + " has total dim " +
                    std::to_string(layout.total_dim()));
  if (hermiticity_defect(m) > t.hermitian)
    throw Error(Errc::NonHermitian,
                "hermiticity defect " + std::to_string(hermiticity_defect(m)));
  const double tr = m.real().trace();
  if (std::abs(tr - 1.0) > t.trace_one)
    throw Error(Errc::TraceNotOne, "trace " + std::to_string(tr));
  EighResult e = eigh(m, t.hermitian);
  const double min_eig = e.eigenvalues(e.eigenvalues.size() - 1);
  if (min_eig < -t.psd)
    throw Error(Errc::NotPsd, "eigenvalue " + std::to_string(min_eig));

  DensityMatrix rho;
  rho.layout = layout;
  if (min_eig < 0.0) {
    ComplexMatrix rebuilt = ComplexMatrix::Zero(m.rows(), m.cols());
    for (Index i = 0; i < e.eigenvalues.size(); ++i) {
      const double lam = e.eigenvalues(i);
      if (lam <= 0.0) continue;
      rebuilt += lam * (e.eigenvectors.col(i) * e.eigenvectors.col(i).adjoint());
    }
    rho.mat = rebuilt / rebuilt.real().trace();
  } else {
    rho.mat = hermitian_part(m) / tr;
  }
  return rho;
}

inline DensityMatrix marginal(const DensityMatrix& rho, const std::vector<std::string>& keep,
                              const DensityTolerances& t = {}) {
  return validate_density(partial_trace(rho.mat, rho.layout, keep), rho.layout.sublayout(keep),
                          t);
}

inline DensityMatrix permuted(const DensityMatrix& rho, const std::vector<std::string>& order) {
  auto [m, layout] = permute_subsystems(rho.mat, rho.layout, order);
  return DensityMatrix{std::move(m), std::move(layout)};
}

// Reorders the factors so the groups are contiguous (in the given group
// order), then merges each group into a single factor. Merging contiguous
// factors preserves the row-major flat index, so the matrix is only permuted.
inline DensityMatrix regroup(const DensityMatrix& rho,
                             const std::vector<std::vector<std::string>>& groups,
                             const std::vector<std::string>& group_labels) {
  if (groups.size() != group_labels.size())
    throw Error(Errc::InvalidArgument, "regroup: one label per group required");
  std::vector<std::string> order;
  for (const auto& g : groups) order.insert(order.end(), g.begin(), g.end());
  auto [m, layout] = permute_subsystems(rho.mat, rho.layout, order);
  std::vector<SpaceLayout::Factor> merged;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::size_t d = 1;
    for (const auto& l : groups[g]) d *= rho.layout.dim_of(l);
    merged.push_back({group_labels[g], d});
  }
  return DensityMatrix{std::move(m), SpaceLayout(std::move(merged))};
}

// Reinterprets one factor as a list of sub-factors with the same total
// dimension (inverse of merging contiguous factors).
inline DensityMatrix split_factor(const DensityMatrix& rho, const std::string& label,
                                  const SpaceLayout& sub) {
  std::vector<SpaceLayout::Factor> fs;
  for (const auto& f : rho.layout.factors()) {
    if (f.label == label) {
      if (sub.total_dim() != f.dim)
        throw Error(Errc::LayoutMismatch, "split_factor: sub-layout dim mismatch");
      for (const auto& s : sub.factors()) fs.push_back(s);
    } else {
      fs.push_back(f);
    }
  }
  return DensityMatrix{rho.mat, SpaceLayout(std::move(fs))};
}

// Same matrix, fresh factor labels (dimension structure unchanged).
inline DensityMatrix relabeled(const DensityMatrix& rho, const std::vector<std::string>& labels) {
  if (labels.size() != rho.layout.size())
    throw Error(Errc::InvalidArgument, "relabeled: one label per factor required");
  std::vector<SpaceLayout::Factor> fs;
  for (std::size_t i = 0; i < labels.size(); ++i) fs.push_back({labels[i], rho.layout[i].dim});
  return DensityMatrix{rho.mat, SpaceLayout(std::move(fs))};
}

inline DensityMatrix tensor_states(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix{tensor(a.mat, b.mat), SpaceLayout::concat(a.layout, b.layout)};
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.layout.total_dim() != b.layout.total_dim())
    throw Error(Errc::LayoutMismatch, "trace_distance between different spaces");
  return trace_distance(a.mat, b.mat);
}

// |v><v| as a density matrix; v normalized.
inline DensityMatrix pure_state(const ComplexMatrix& v, const SpaceLayout& layout) {
  if (v.cols() != 1) throw Error(Errc::ShapeMismatch, "pure_state expects a column vector");
  const double n = v.norm();
  if (n <= 0.0) throw Error(Errc::InvalidArgument, "pure_state: zero vector");
  ComplexMatrix w = v / n;
  return DensityMatrix{w * w.adjoint(), layout};
}

inline DensityMatrix maximally_mixed(const SpaceLayout& layout) {
  const std::size_t d = layout.total_dim();
  return DensityMatrix{ComplexMatrix::Identity(d, d) / static_cast<double>(d), layout};
}

inline DensityMatrix basis_state(const SpaceLayout& layout, std::size_t i) {
  return pure_state(basis_column(layout.total_dim(), static_cast<Index>(i)), layout);
}

// (|00...> + |11...> + ...)/√d on two equal-dimension factors.
inline DensityMatrix max_entangled(const std::string& l1, const std::string& l2,
                                   std::size_t d) {
  ComplexMatrix v = ComplexMatrix::Zero(d * d, 1);
  for (std::size_t i = 0; i < d; ++i) v(i * d + i, 0) = 1.0 / std::sqrt(static_cast<double>(d));
  return pure_state(v, SpaceLayout({{l1, d}, {l2, d}}));
}

}  // namespace qmarkov
