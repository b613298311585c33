#pragma once

#include <Eigen/SVD>
#include <optional>
#include <vector>

#include "qmarkov/assignment.hpp"
#include "qmarkov/random.hpp"

namespace qmarkov {

// Block data of a Markov state: a decomposition H_B = ⊕_k H_bL_k ⊗ H_bR_k
// (given by the embedding unitary, blocks in column order, bL index major
// inside each block) and per-block states so that the full state is
// ⊕_k q_k ρ_{AbL_k} ⊗ ρ_{bR_kE}.
struct MarkovBlock {
  double q = 0.0;
  std::size_t d_bl = 1;
  std::size_t d_br = 1;
  DensityMatrix rho_a_bl;  // on (A, bL_k)
  DensityMatrix rho_br_e;  // on (bR_k, E)
};

struct MarkovDecomposition {
  std::size_t d_a = 1;
  std::size_t d_e = 1;
  std::vector<MarkovBlock> blocks;
  ComplexMatrix embedding;  // d_B x d_B unitary, ⊕_k (bL_k ⊗ bR_k) -> H_B

  std::size_t d_b() const {
    std::size_t d = 0;
    for (const auto& b : blocks) d += b.d_bl * b.d_br;
    return d;
  }

  std::vector<std::size_t> block_dims() const {
    std::vector<std::size_t> out;
    for (const auto& b : blocks) out.push_back(b.d_bl * b.d_br);
    return out;
  }
};

inline void validate_markov_decomposition(const MarkovDecomposition& d) {
  if (d.blocks.empty()) throw Error(Errc::InvalidArgument, "decomposition has no blocks");
  double qsum = 0.0;
  for (const auto& b : d.blocks) {
    if (b.q < 0.0) throw Error(Errc::InvalidArgument, "negative block weight");
    qsum += b.q;
    if (b.rho_a_bl.layout.size() != 2 || b.rho_a_bl.layout[0].dim != d.d_a ||
        b.rho_a_bl.layout[1].dim != b.d_bl)
      throw Error(Errc::LayoutMismatch, "block state on (A,bL) has wrong dims");
    if (b.rho_br_e.layout.size() != 2 || b.rho_br_e.layout[0].dim != b.d_br ||
        b.rho_br_e.layout[1].dim != d.d_e)
      throw Error(Errc::LayoutMismatch, "block state on (bR,E) has wrong dims");
  }
  if (std::abs(qsum - 1.0) > 1e-12)
    throw Error(Errc::InvalidArgument, "block weights sum to " + std::to_string(qsum));
  const Index d_b = static_cast<Index>(d.d_b());
  if (d.embedding.rows() != d_b || d.embedding.cols() != d_b)
    throw Error(Errc::LayoutMismatch, "embedding is not d_B x d_B");
  if (max_abs(d.embedding.adjoint() * d.embedding - identity(d_b)) > 1e-10)
    throw Error(Errc::InvalidArgument, "embedding is not unitary");
}

// ⊕_k q_k ρ_{AbL_k} ⊗ ρ_{bR_kE} on (A,B,E).
inline DensityMatrix assemble(const MarkovDecomposition& d, const std::string& a_label = "A",
                              const std::string& b_label = "B",
                              const std::string& e_label = "E") {
  validate_markov_decomposition(d);
  const Index d_a = static_cast<Index>(d.d_a);
  const Index d_e = static_cast<Index>(d.d_e);
  const Index d_b = static_cast<Index>(d.d_b());
  ComplexMatrix acc = ComplexMatrix::Zero(d_a * d_b * d_e, d_a * d_b * d_e);
  Index offset = 0;
  for (const auto& blk : d.blocks) {
    const Index d_k = static_cast<Index>(blk.d_bl * blk.d_br);
    if (blk.q > 0.0) {
      const ComplexMatrix w_k = d.embedding.block(0, offset, d_b, d_k);
      const ComplexMatrix embed = tensor(tensor(identity(d_a), w_k), identity(d_e));
      const ComplexMatrix t_k = tensor(blk.rho_a_bl.mat, blk.rho_br_e.mat);
      acc += blk.q * (embed * t_k * embed.adjoint());
    }
    offset += d_k;
  }
  SpaceLayout layout({{a_label, d.d_a}, {b_label, d.d_b()}, {e_label, d.d_e}});
  return validate_density(acc, layout);
}

// Λ_B : H_B -> H_B ⊗ H_E assembled block-wise from Petz maps,
// Λ_B = ⊕_k id_bL_k ⊗ Λ_bR_k. Blocks of weight below q_floor contribute a
// plain |0_E> embedding so the channel stays CPTP on all of H_B.
inline KrausChannel markov_assignment_channel(const MarkovDecomposition& d,
                                              const std::string& b_label = "B",
                                              const std::string& e_label = "E",
                                              double q_floor = 1e-12) {
  validate_markov_decomposition(d);
  const Index d_b = static_cast<Index>(d.d_b());
  const Index d_e = static_cast<Index>(d.d_e);
  std::vector<ComplexMatrix> kraus;
  Index offset = 0;
  for (const auto& blk : d.blocks) {
    const Index d_k = static_cast<Index>(blk.d_bl * blk.d_br);
    const ComplexMatrix w_k = d.embedding.block(0, offset, d_b, d_k);
    const ComplexMatrix w_k_e = tensor(w_k, identity(d_e));
    if (blk.q >= q_floor) {
      AssignmentMap petz = petz_assignment(blk.rho_br_e);
      for (const auto& k_i : petz.channel.kraus)
        kraus.push_back(w_k_e * tensor(identity(static_cast<Index>(blk.d_bl)), k_i) *
                        w_k.adjoint());
    } else {
      kraus.push_back(w_k_e * tensor(identity(d_k), basis_column(d_e, 0)) * w_k.adjoint());
    }
    offset += d_k;
  }
  SpaceLayout in = single_factor(b_label, d.d_b());
  SpaceLayout out({{b_label, d.d_b()}, {e_label, d.d_e}});
  return validate_channel(std::move(kraus), in, out, 1e-9);
}

// id_A ⊗ Λ_B as an assignment map reproducing assemble(d).
inline AssignmentMap localized_assignment_from_markov(const MarkovDecomposition& d,
                                                      const std::string& a_label = "A",
                                                      const std::string& b_label = "B",
                                                      const std::string& e_label = "E") {
  const DensityMatrix target = assemble(d, a_label, b_label, e_label);
  const DensityMatrix source = marginal(target, {a_label, b_label});
  KrausChannel lam_b = markov_assignment_channel(d, b_label, e_label);
  KrausChannel lifted = lift_localized(lam_b, source.layout);
  return make_assignment(std::move(lifted), source, target);
}

struct MarkovVerdict {
  bool markov = false;
  double cmi = 0.0;            // I(a:e|b), bits
  double petz_distance = 0.0;  // || rho - (id_a ⊗ Petz_{b->be})(rho_ab) ||_tr
};

// Operational Markov test: conditional mutual information plus exactness of
// the Petz recovery applied as id_a ⊗ Λ_b. The Petz threshold scales as √tol.
inline MarkovVerdict is_markov(const DensityMatrix& rho, const std::vector<std::string>& a,
                               const std::vector<std::string>& b,
                               const std::vector<std::string>& e,
                               double tolerance = tol::cmi_default) {
  MarkovVerdict v;
  v.cmi = conditional_mutual_information(rho, a, e, b);
  const DensityMatrix grouped = regroup(rho, {a, b, e}, {"a", "b", "e"});
  const DensityMatrix rho_be = marginal(grouped, {"b", "e"});
  const DensityMatrix rho_ab = marginal(grouped, {"a", "b"});
  AssignmentMap petz = petz_assignment(rho_be);
  KrausChannel lifted = lift_localized(petz.channel, rho_ab.layout);
  v.petz_distance = trace_distance(apply(lifted, rho_ab), grouped);
  v.markov = v.cmi <= tolerance && v.petz_distance <= std::sqrt(tolerance);
  return v;
}

struct RecoveryOptions {
  double cmi_tol = tol::cmi_default;
  double verify_tol = tol::recovery_roundtrip;
  double fixed_space_tol = 1e-7;  // singular-value cutoff for the fixed space
  double cluster_gap = 1e-7;      // eigenvalue grouping threshold
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;  // internal draws; fixed for determinism
};

namespace detail {

inline ComplexVector vec_rowmajor(const ComplexMatrix& m) {
  ComplexVector v(m.size());
  Index idx = 0;
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) v(idx++) = m(i, j);
  return v;
}

inline ComplexMatrix unvec_rowmajor(const ComplexVector& v, Index rows, Index cols) {
  ComplexMatrix m(rows, cols);
  Index idx = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = v(idx++);
  return m;
}

// Frobenius-orthonormal basis of the span via a rank-revealing SVD.
inline std::vector<ComplexMatrix> orthonormalize(const std::vector<ComplexMatrix>& ms) {
  if (ms.empty()) return {};
  const Index rows = ms.front().rows(), cols = ms.front().cols();
  ComplexMatrix stack(rows * cols, static_cast<Index>(ms.size()));
  for (std::size_t i = 0; i < ms.size(); ++i) stack.col(static_cast<Index>(i)) = vec_rowmajor(ms[i]);
  Eigen::JacobiSVD<ComplexMatrix> svd(stack, Eigen::ComputeThinU);
  const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  std::vector<ComplexMatrix> basis;
  if (smax <= 1e-12) return basis;
  for (Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-6 * smax)
      basis.push_back(unvec_rowmajor(svd.matrixU().col(i), rows, cols));
  return basis;
}

// Hermitian spanning set of a *-closed space.
inline std::vector<ComplexMatrix> hermitian_span(const std::vector<ComplexMatrix>& ms) {
  std::vector<ComplexMatrix> out;
  for (const auto& m : ms) {
    out.push_back(hermitian_part(m));
    out.push_back(hermitian_part(cplx(0, -1) * m));
  }
  return orthonormalize(out);
}

struct EigenClusters {
  std::vector<std::vector<Index>> groups;  // indices into the eigh result
  bool ambiguous = false;
};

inline EigenClusters cluster_eigenvalues(const RealVector& vals, double gap) {
  EigenClusters c;
  std::vector<Index> order(vals.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return vals(a) < vals(b); });
  std::vector<Index> cur;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!cur.empty()) {
      const double delta = vals(order[i]) - vals(cur.back());
      if (delta > gap) {
        c.groups.push_back(cur);
        cur.clear();
      } else if (delta > gap * 1e-2) {
        c.ambiguous = true;  // too close to call; caller redraws
      }
    }
    cur.push_back(order[i]);
  }
  if (!cur.empty()) c.groups.push_back(cur);
  return c;
}

// Generic Hermitian element of a *-closed span: complex coefficients keep the
// Hermitian projection surjective regardless of the basis phases.
inline ComplexMatrix random_hermitian_combo(const std::vector<ComplexMatrix>& basis, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ComplexMatrix g = ComplexMatrix::Zero(basis.front().rows(), basis.front().cols());
  for (const auto& b : basis) {
    const double re = normal(rng);
    const double im = normal(rng);
    g += cplx(re, im) * b;
  }
  return hermitian_part(g);
}

// Unitary polar factor via SVD, rank-truncated.
inline ComplexMatrix polar_unitary(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace detail

// Recovers a Markov decomposition from a tripartite Markov state. The
// decomposition of H_B is read off the fixed-point algebra of the map
// X_B -> ρ_B^{-1/2} Tr_E[ρ_BE^{1/2}(X ⊗ I)ρ_BE^{1/2}] ρ_B^{-1/2} (trace-out
// composed with Petz recovery): on a Markov state the fixed points form
// ⊕_k L(H_bL_k) ⊗ I_bR_k on supp ρ_B. Blocks come from the algebra center,
// the bL/bR split from a matrix-unit construction inside each block, and the
// result is verified by reassembly. Finer-than-minimal output is acceptable;
// a failed verification is reported, never silently accepted.
inline MarkovDecomposition recover_structure(const DensityMatrix& rho,
                                             const RecoveryOptions& opts = {}) {
  if (rho.layout.size() != 3)
    throw Error(Errc::LayoutMismatch, "recover_structure expects a three-factor state");
  const std::string a_label = rho.layout[0].label;
  const std::string b_label = rho.layout[1].label;
  const std::string e_label = rho.layout[2].label;
  const Index d_a = static_cast<Index>(rho.layout[0].dim);
  const Index d_b = static_cast<Index>(rho.layout[1].dim);
  const Index d_e = static_cast<Index>(rho.layout[2].dim);

  const double cmi = conditional_mutual_information(rho, {a_label}, {e_label}, {b_label});
  if (cmi > opts.cmi_tol)
    throw Error(Errc::NotMarkov, "CMI " + std::to_string(cmi) + " exceeds tolerance");

  const DensityMatrix rho_b = marginal(rho, {b_label});
  const DensityMatrix rho_be = marginal(rho, {b_label, e_label});
  const DensityMatrix rho_ab = marginal(rho, {a_label, b_label});

  // support of ρ_B
  EighResult eb = eigh(rho_b.mat);
  Index r = 0;
  while (r < d_b && eb.eigenvalues(r) >= tol::support_cutoff) ++r;
  if (r == 0) throw Error(Errc::InvalidArgument, "ρ_B has empty support");
  const ComplexMatrix v_s = eb.eigenvectors.leftCols(r);
  const ComplexMatrix v_perp = eb.eigenvectors.rightCols(d_b - r);

  const ComplexMatrix v_s_e = tensor(v_s, identity(d_e));
  const ComplexMatrix rb = v_s.adjoint() * rho_b.mat * v_s;
  const ComplexMatrix rbe = v_s_e.adjoint() * rho_be.mat * v_s_e;
  const ComplexMatrix sqrt_be = psd_sqrt(hermitian_part(rbe));
  const ComplexMatrix pinv_b = psd_pinv_sqrt(hermitian_part(rb));
  const SpaceLayout be_r({{"b", static_cast<std::size_t>(r)}, {"e", static_cast<std::size_t>(d_e)}});

  // superoperator of the trace-out ∘ Petz map on L(supp ρ_B)
  const Index rr = r * r;
  ComplexMatrix phi = ComplexMatrix::Zero(rr, rr);
  for (Index p = 0; p < r; ++p)
    for (Index q = 0; q < r; ++q) {
      ComplexMatrix unit = zeros(r, r);
      unit(p, q) = 1.0;
      const ComplexMatrix mapped =
          pinv_b *
          partial_trace(sqrt_be * tensor(unit, identity(d_e)) * sqrt_be, be_r, {"b"}) * pinv_b;
      phi.col(p * r + q) = detail::vec_rowmajor(mapped);
    }

  Eigen::JacobiSVD<ComplexMatrix> svd(phi - identity(rr), Eigen::ComputeFullV);
  std::vector<ComplexMatrix> fixed;
  for (Index i = 0; i < rr; ++i)
    if (svd.singularValues()(i) <= opts.fixed_space_tol)
      fixed.push_back(detail::unvec_rowmajor(svd.matrixV().col(i), r, r));
  if (fixed.empty())
    throw Error(Errc::StructureRecoveryFailed, "fixed-point space is empty");
  const std::vector<ComplexMatrix> f_basis = detail::hermitian_span(fixed);

  // center of the fixed algebra: Y with [Y, F_i] = 0 for all i
  const std::size_t f = f_basis.size();
  ComplexMatrix comm(static_cast<Index>(f) * rr, static_cast<Index>(f));
  for (std::size_t a = 0; a < f; ++a)
    for (std::size_t i = 0; i < f; ++i)
      comm.block(static_cast<Index>(i) * rr, static_cast<Index>(a), rr, 1) =
          detail::vec_rowmajor(f_basis[a] * f_basis[i] - f_basis[i] * f_basis[a]);
  Eigen::JacobiSVD<ComplexMatrix> csvd(comm, Eigen::ComputeFullV);
  std::vector<ComplexMatrix> center_raw;
  for (Index i = 0; i < static_cast<Index>(f); ++i) {
    if (csvd.singularValues()(i) > 1e-8) continue;
    ComplexMatrix z = ComplexMatrix::Zero(r, r);
    for (std::size_t a = 0; a < f; ++a) z += csvd.matrixV()(static_cast<Index>(a), i) * f_basis[a];
    center_raw.push_back(std::move(z));
  }
  const std::vector<ComplexMatrix> center = detail::hermitian_span(center_raw);
  if (center.empty())
    throw Error(Errc::StructureRecoveryFailed, "algebra center is empty");

  // split supp ρ_B along the center blocks
  Rng rng(opts.seed);
  detail::EigenClusters clusters;
  EighResult ez;
  bool ok = false;
  for (int attempt = 0; attempt < 8 && !ok; ++attempt) {
    ez = eigh(detail::random_hermitian_combo(center, rng), 1e-8);
    clusters = detail::cluster_eigenvalues(ez.eigenvalues, opts.cluster_gap);
    ok = !clusters.ambiguous && clusters.groups.size() == center.size();
  }
  if (!ok)
    throw Error(Errc::StructureRecoveryFailed, "could not separate the center spectrum");

  struct RawBlock {
    ComplexMatrix basis;  // r x d_m, columns ordered bL-major
    std::size_t d_bl, d_br;
  };
  std::vector<RawBlock> raw_blocks;

  for (const auto& group : clusters.groups) {
    const Index d_m = static_cast<Index>(group.size());
    ComplexMatrix u_m(r, d_m);
    for (Index i = 0; i < d_m; ++i) u_m.col(i) = ez.eigenvectors.col(group[i]);

    // restrict the fixed algebra to this block
    std::vector<ComplexMatrix> restricted;
    for (const auto& fb : f_basis) restricted.push_back(u_m.adjoint() * fb * u_m);
    const std::vector<ComplexMatrix> g_basis = detail::hermitian_span(restricted);
    const std::size_t f_m = g_basis.size();
    const auto c_m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(f_m))));
    if (c_m * c_m != f_m || group.size() % c_m != 0)
      throw Error(Errc::StructureRecoveryFailed,
                  "block algebra dimension " + std::to_string(f_m) + " is not a square");
    const std::size_t v_m = group.size() / c_m;

    RawBlock blk;
    blk.d_bl = c_m;
    blk.d_br = v_m;
    if (c_m == 1) {
      blk.basis = u_m;  // trivial bL; any orthonormal basis of the block works
    } else {
      // minimal projections of L(C)⊗I_V from a generic Hermitian element,
      // matrix units from the polar part of p_g Y p_1
      bool built = false;
      for (int attempt = 0; attempt < 8 && !built; ++attempt) {
        EighResult eg = eigh(detail::random_hermitian_combo(g_basis, rng), 1e-8);
        detail::EigenClusters sub = detail::cluster_eigenvalues(eg.eigenvalues, opts.cluster_gap);
        if (sub.ambiguous || sub.groups.size() != c_m) continue;
        bool sizes_ok = true;
        for (const auto& g : sub.groups) sizes_ok &= g.size() == v_m;
        if (!sizes_ok) continue;

        const ComplexMatrix y = detail::random_hermitian_combo(g_basis, rng);
        ComplexMatrix w1(d_m, static_cast<Index>(v_m));
        for (std::size_t al = 0; al < v_m; ++al) w1.col(al) = eg.eigenvectors.col(sub.groups[0][al]);

        ComplexMatrix q_m(d_m, d_m);
        q_m.leftCols(static_cast<Index>(v_m)) = w1;
        bool identified = true;
        for (std::size_t g = 1; g < c_m && identified; ++g) {
          ComplexMatrix w_g(d_m, static_cast<Index>(v_m));
          for (std::size_t al = 0; al < v_m; ++al)
            w_g.col(al) = eg.eigenvectors.col(sub.groups[g][al]);
          const ComplexMatrix m_g = w_g.adjoint() * y * w1;
          Eigen::JacobiSVD<ComplexMatrix> psvd(m_g, Eigen::ComputeFullU | Eigen::ComputeFullV);
          if (psvd.singularValues()(static_cast<Index>(v_m) - 1) < 1e-6) {
            identified = false;  // Y too close to singular between these blocks
            break;
          }
          q_m.middleCols(static_cast<Index>(g * v_m), static_cast<Index>(v_m)) =
              w_g * (psvd.matrixU() * psvd.matrixV().adjoint());
        }
        if (!identified) continue;

        // sanity: the restricted algebra must look like (C-part) ⊗ I_V now
        double worst = 0.0;
        for (const auto& gb : g_basis) {
          const ComplexMatrix in_basis = q_m.adjoint() * gb * q_m;
          ComplexMatrix c_part = zeros(static_cast<Index>(c_m), static_cast<Index>(c_m));
          for (std::size_t g1 = 0; g1 < c_m; ++g1)
            for (std::size_t g2 = 0; g2 < c_m; ++g2) {
              cplx acc = 0.0;
              for (std::size_t al = 0; al < v_m; ++al)
                acc += in_basis(static_cast<Index>(g1 * v_m + al),
                                static_cast<Index>(g2 * v_m + al));
              c_part(static_cast<Index>(g1), static_cast<Index>(g2)) =
                  acc / static_cast<double>(v_m);
            }
          worst = std::max(worst, max_abs(in_basis - tensor(c_part, identity(static_cast<Index>(v_m)))));
        }
        if (worst > 1e-6) continue;

        blk.basis = u_m * q_m;
        built = true;
      }
      if (!built)
        throw Error(Errc::StructureRecoveryFailed, "matrix-unit construction failed");
    }
    raw_blocks.push_back(std::move(blk));
  }

  // assemble the decomposition in H_B coordinates, padding the complement of
  // supp ρ_B with a zero-weight block
  MarkovDecomposition decomp;
  decomp.d_a = static_cast<std::size_t>(d_a);
  decomp.d_e = static_cast<std::size_t>(d_e);
  ComplexMatrix w_full(d_b, d_b);
  Index col = 0;
  for (const auto& blk : raw_blocks) {
    const Index d_m = blk.basis.cols();
    w_full.middleCols(col, d_m) = v_s * blk.basis;
    col += d_m;
  }
  if (d_b - r > 0) w_full.rightCols(d_b - r) = v_perp;

  DensityTolerances block_tol;
  block_tol.trace_one = 1e-9;  // projection and division leave small drift
  col = 0;
  for (const auto& blk : raw_blocks) {
    const Index d_m = blk.basis.cols();
    const ComplexMatrix w_k = w_full.middleCols(col, d_m);
    col += d_m;
    MarkovBlock out;
    out.d_bl = blk.d_bl;
    out.d_br = blk.d_br;
    out.q = (w_k.adjoint() * rho_b.mat * w_k).real().trace();
    if (out.q < 1e-12) continue;  // numerically empty block

    const SpaceLayout abl_layout(
        {{a_label, static_cast<std::size_t>(d_a)}, {"bL", blk.d_bl}, {"bR", blk.d_br}});
    const ComplexMatrix proj_ab = tensor(identity(d_a), w_k);
    out.rho_a_bl = validate_density(
        partial_trace(proj_ab.adjoint() * rho_ab.mat * proj_ab / out.q, abl_layout,
                      {a_label, "bL"}),
        SpaceLayout({{a_label, static_cast<std::size_t>(d_a)}, {"bL", blk.d_bl}}), block_tol);

    const SpaceLayout bre_layout(
        {{"bL", blk.d_bl}, {"bR", blk.d_br}, {e_label, static_cast<std::size_t>(d_e)}});
    const ComplexMatrix proj_be = tensor(w_k, identity(d_e));
    out.rho_br_e = validate_density(
        partial_trace(proj_be.adjoint() * rho_be.mat * proj_be / out.q, bre_layout,
                      {"bR", e_label}),
        SpaceLayout({{"bR", blk.d_br}, {e_label, static_cast<std::size_t>(d_e)}}), block_tol);
    decomp.blocks.push_back(std::move(out));
  }
  if (d_b - r > 0) {
    MarkovBlock pad;
    pad.q = 0.0;
    pad.d_bl = static_cast<std::size_t>(d_b - r);
    pad.d_br = 1;
    pad.rho_a_bl = maximally_mixed(
        SpaceLayout({{a_label, static_cast<std::size_t>(d_a)}, {"bL", pad.d_bl}}));
    pad.rho_br_e =
        maximally_mixed(SpaceLayout({{"bR", 1}, {e_label, static_cast<std::size_t>(d_e)}}));
    decomp.blocks.push_back(std::move(pad));
  }

  // renormalize the weights (projection drift) and verify by reassembly
  double qsum = 0.0;
  for (const auto& b : decomp.blocks) qsum += b.q;
  for (auto& b : decomp.blocks) b.q /= qsum;
  decomp.embedding = std::move(w_full);

  const DensityMatrix rebuilt = assemble(decomp, a_label, b_label, e_label);
  const double dist = trace_distance(rebuilt, rho);
  if (dist > opts.verify_tol)
    throw Error(Errc::StructureRecoveryFailed,
                "reassembly distance " + std::to_string(dist) + " exceeds " +
                    std::to_string(opts.verify_tol) + " (" +
                    std::to_string(decomp.blocks.size()) + " blocks)");
  return decomp;
}

// ε̄_B = Tr_E' ∘ F_BE ∘ Λ_B together with the forward-reduction check
// || Tr_E'[(id_A ⊗ F_BE)(ρ_ABE)] - (id_A ⊗ ε̄_B)(ρ_AB) ||_tr.
inline std::pair<KrausChannel, double> markov_reduced_channel(const MarkovDecomposition& d,
                                                              const KrausChannel& ch_be) {
  const DensityMatrix full = assemble(d);
  const SpaceLayout be_layout = full.layout.sublayout({"B", "E"});
  if (ch_be.in_layout != be_layout)
    throw Error(Errc::LayoutMismatch, "channel input " + ch_be.in_layout.to_string() +
                                          " does not match decomposition " +
                                          be_layout.to_string());
  const KrausChannel lam_b = markov_assignment_channel(d);
  const std::string e_out = ch_be.out_layout[1].label;
  const KrausChannel eps_b =
      compose(trace_out_channel(ch_be.out_layout, {e_out}), compose(ch_be, lam_b));

  const DensityMatrix rho_ab = marginal(full, {"A", "B"});
  const DensityMatrix evolved = apply(lift_localized(ch_be, full.layout), full);
  const DensityMatrix truth = marginal(evolved, {"A", ch_be.out_layout[0].label});
  const DensityMatrix via_eps = apply(lift_localized(eps_b, rho_ab.layout), rho_ab);
  const double check = trace_distance(truth, via_eps);
  return {eps_b, check};
}

// Single block with trivial bR: the factorized state ρ_AB ⊗ ω_E.
inline MarkovDecomposition factorized_markov_decomposition(const DensityMatrix& rho_ab,
                                                           const DensityMatrix& omega_e) {
  if (rho_ab.layout.size() != 2 || omega_e.layout.size() != 1)
    throw Error(Errc::LayoutMismatch, "expected a bipartite system state and an environment");
  MarkovDecomposition d;
  d.d_a = rho_ab.layout[0].dim;
  d.d_e = omega_e.layout[0].dim;
  MarkovBlock blk;
  blk.q = 1.0;
  blk.d_bl = rho_ab.layout[1].dim;
  blk.d_br = 1;
  blk.rho_a_bl =
      DensityMatrix{rho_ab.mat, SpaceLayout({{"A", d.d_a}, {"bL", blk.d_bl}})};
  blk.rho_br_e = DensityMatrix{omega_e.mat, SpaceLayout({{"bR", 1}, {"E", d.d_e}})};
  d.blocks.push_back(std::move(blk));
  d.embedding = identity(static_cast<Index>(d.d_b()));
  return d;
}

struct RandomMarkovOptions {
  std::size_t max_blocks = 2;
  std::size_t max_factor = 2;  // bL and bR dims drawn from [1, max_factor]
};

inline MarkovDecomposition random_markov_decomposition(std::size_t d_a, std::size_t d_e,
                                                       Rng& rng,
                                                       const RandomMarkovOptions& opts = {}) {
  std::uniform_int_distribution<std::size_t> nblocks(1, opts.max_blocks);
  std::uniform_int_distribution<std::size_t> factor(1, opts.max_factor);
  std::uniform_real_distribution<double> weight(0.05, 1.0);

  MarkovDecomposition d;
  d.d_a = d_a;
  d.d_e = d_e;
  const std::size_t n = nblocks(rng);
  double qsum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    MarkovBlock blk;
    blk.d_bl = factor(rng);
    blk.d_br = factor(rng);
    blk.q = weight(rng);
    qsum += blk.q;
    blk.rho_a_bl = random_density(SpaceLayout({{"A", d_a}, {"bL", blk.d_bl}}),
                                  d_a * blk.d_bl, rng);
    blk.rho_br_e = random_density(SpaceLayout({{"bR", blk.d_br}, {"E", d_e}}),
                                  blk.d_br * d_e, rng);
    d.blocks.push_back(std::move(blk));
  }
  for (auto& blk : d.blocks) blk.q /= qsum;
  d.embedding = random_haar_unitary(static_cast<Index>(d.d_b()), rng);
  return d;
}

}  // namespace qmarkov
