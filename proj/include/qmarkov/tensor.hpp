#pragma once

#include <numeric>
#include <vector>

#include "qmarkov/layout.hpp"
#include "qmarkov/matrix.hpp"

namespace qmarkov {

// Kronecker product with a's indices major: out(ia*rb+ib, ja*cb+jb) = a(ia,ja)*b(ib,jb).
inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
  ComplexMatrix out(ra * rb, ca * cb);
  for (Index ia = 0; ia < ra; ++ia)
    for (Index ja = 0; ja < ca; ++ja)
      out.block(ia * rb, ja * cb, rb, cb) = a(ia, ja) * b;
  return out;
}

inline ComplexMatrix tensor(const std::vector<ComplexMatrix>& ms) {
  if (ms.empty()) return identity(1);
  ComplexMatrix out = ms.front();
  for (std::size_t i = 1; i < ms.size(); ++i) out = tensor(out, ms[i]);
  return out;
}

// Block-diagonal sum of square blocks; off-block entries exactly zero.
inline ComplexMatrix direct_sum(const std::vector<ComplexMatrix>& blocks) {
  Index d = 0;
  for (const auto& b : blocks) {
    if (b.rows() != b.cols())
      throw Error(Errc::ShapeMismatch, "direct_sum block is not square");
    d += b.rows();
  }
  ComplexMatrix out = ComplexMatrix::Zero(d, d);
  Index off = 0;
  for (const auto& b : blocks) {
    out.block(off, off, b.rows(), b.rows()) = b;
    off += b.rows();
  }
  return out;
}

namespace detail {

// Row-major strides of a dims list: stride[f] = prod of dims after f.
inline std::vector<std::size_t> strides_of(const std::vector<std::size_t>& dims) {
  std::vector<std::size_t> s(dims.size(), 1);
  for (std::size_t i = dims.size(); i-- > 1;) s[i - 1] = s[i] * dims[i];
  return s;
}

// Flat offsets of every multi-index over the selected factors, holding the
// other factors at zero. Offsets over disjoint factor sets are additive.
inline std::vector<std::size_t> subindex_offsets(const std::vector<std::size_t>& dims,
                                                 const std::vector<std::size_t>& strides,
                                                 const std::vector<std::size_t>& sel) {
  std::size_t n = 1;
  for (auto f : sel) n *= dims[f];
  std::vector<std::size_t> offs(n, 0);
  std::size_t repeat = n;
  for (auto f : sel) {
    repeat /= dims[f];
    // digit for factor f cycles with period repeat, dims[f] values
    std::size_t idx = 0;
    while (idx < n) {
      for (std::size_t v = 0; v < dims[f]; ++v)
        for (std::size_t r = 0; r < repeat; ++r) offs[idx++] += v * strides[f];
    }
  }
  return offs;
}

}  // namespace detail

// Trace out all factors not in `keep`; result is on the kept factors in
// layout order. Tr(result) = Tr(m).
inline ComplexMatrix partial_trace(const ComplexMatrix& m, const SpaceLayout& layout,
                                   const std::vector<std::string>& keep) {
  const std::size_t dim = layout.total_dim();
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != dim)
    throw Error(Errc::LayoutMismatch, "matrix dim " + std::to_string(m.rows()) +
                                          " does not match layout " + layout.to_string());
  std::vector<std::size_t> keep_idx, trace_idx;
  for (const auto& l : keep) layout.index_of(l);  // unknown-label check
  for (std::size_t f = 0; f < layout.size(); ++f) {
    const bool kept = std::find(keep.begin(), keep.end(), layout[f].label) != keep.end();
    (kept ? keep_idx : trace_idx).push_back(f);
  }
  const auto dims = layout.dims();
  const auto strides = detail::strides_of(dims);
  const auto kept_offs = detail::subindex_offsets(dims, strides, keep_idx);
  const auto trace_offs = detail::subindex_offsets(dims, strides, trace_idx);

  const std::size_t dk = kept_offs.size();
  ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
  for (std::size_t r = 0; r < dk; ++r)
    for (std::size_t c = 0; c < dk; ++c) {
      cplx acc = 0.0;
      for (std::size_t t : trace_offs) acc += m(kept_offs[r] + t, kept_offs[c] + t);
      out(r, c) = acc;
    }
  return out;
}

// Partial trace over the leading factor of dimension d_lead on both sides of a
// possibly rectangular matrix: rows = d_lead*r', cols = d_lead*c'.
inline ComplexMatrix trace_out_leading(const ComplexMatrix& m, std::size_t d_lead) {
  if (d_lead == 0 || m.rows() % static_cast<Index>(d_lead) != 0 ||
      m.cols() % static_cast<Index>(d_lead) != 0)
    throw Error(Errc::ShapeMismatch, "matrix shape not divisible by leading dim");
  const Index r = m.rows() / static_cast<Index>(d_lead);
  const Index c = m.cols() / static_cast<Index>(d_lead);
  ComplexMatrix out = ComplexMatrix::Zero(r, c);
  for (Index a = 0; a < static_cast<Index>(d_lead); ++a) out += m.block(a * r, a * c, r, c);
  return out;
}

// Permutation matrix P with P|i_old> = |i_new> for the factor reordering
// old layout -> new_order.
inline ComplexMatrix permutation_matrix(const SpaceLayout& layout,
                                        const std::vector<std::string>& new_order) {
  const SpaceLayout out_layout = layout.reordered(new_order);
  const auto dims = layout.dims();
  const auto strides = detail::strides_of(dims);
  const auto new_strides = detail::strides_of(out_layout.dims());
  const std::size_t n = layout.total_dim();

  // position of old factor f in the new order
  std::vector<std::size_t> new_pos(layout.size());
  for (std::size_t f = 0; f < layout.size(); ++f)
    new_pos[f] = out_layout.index_of(layout[f].label);

  ComplexMatrix p = ComplexMatrix::Zero(n, n);
  for (std::size_t old = 0; old < n; ++old) {
    std::size_t rem = old, idx = 0;
    for (std::size_t f = 0; f < layout.size(); ++f) {
      const std::size_t digit = rem / strides[f];
      rem %= strides[f];
      idx += digit * new_strides[new_pos[f]];
    }
    p(idx, old) = 1.0;
  }
  return p;
}

// Conjugation by the index-permutation unitary; trace and spectrum preserved.
inline std::pair<ComplexMatrix, SpaceLayout> permute_subsystems(
    const ComplexMatrix& m, const SpaceLayout& layout,
    const std::vector<std::string>& new_order) {
  const std::size_t dim = layout.total_dim();
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != dim)
    throw Error(Errc::LayoutMismatch, "matrix dim does not match layout");
  const SpaceLayout out_layout = layout.reordered(new_order);

  const auto dims = layout.dims();
  const auto strides = detail::strides_of(dims);
  const auto new_strides = detail::strides_of(out_layout.dims());
  std::vector<std::size_t> new_pos(layout.size());
  for (std::size_t f = 0; f < layout.size(); ++f)
    new_pos[f] = out_layout.index_of(layout[f].label);

  std::vector<std::size_t> map(dim);
  for (std::size_t old = 0; old < dim; ++old) {
    std::size_t rem = old, idx = 0;
    for (std::size_t f = 0; f < layout.size(); ++f) {
      const std::size_t digit = rem / strides[f];
      rem %= strides[f];
      idx += digit * new_strides[new_pos[f]];
    }
    map[old] = idx;
  }
  ComplexMatrix out(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) out(map[i], map[j]) = m(i, j);
  return {out, out_layout};
}

// Isometry embedding block `which` of a direct-sum space into the sum:
// rows = total, cols = block dim, acting as |v>_k -> |offset_k + v>.
inline ComplexMatrix block_injection(const std::vector<std::size_t>& block_dims,
                                     std::size_t which) {
  if (which >= block_dims.size()) throw Error(Errc::IndexOutOfRange, "block index");
  const std::size_t total = std::accumulate(block_dims.begin(), block_dims.end(), std::size_t{0});
  std::size_t off = 0;
  for (std::size_t k = 0; k < which; ++k) off += block_dims[k];
  ComplexMatrix inj = ComplexMatrix::Zero(total, block_dims[which]);
  for (std::size_t v = 0; v < block_dims[which]; ++v) inj(off + v, v) = 1.0;
  return inj;
}

}  // namespace qmarkov
