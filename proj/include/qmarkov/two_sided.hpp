#pragma once

#include "qmarkov/markov.hpp"

namespace qmarkov {

// One summand of ⊕_j p_j ρ_{A_jB} ⊗ ρ_E^{(j)}: the state on the j-th A-block
// (merged factor) with B, plus the environment state attached to the block.
struct TwoSidedBlock {
  double p = 0.0;
  DensityMatrix rho_ajb;  // on (Aj, B)
  DensityMatrix rho_e;    // on E
};

// Result of the two-sided analysis: the A-block form, the dual B-block form,
// and the fully-factorized special case flag.
struct TwoSidedDecomposition {
  std::vector<TwoSidedBlock> blocks;  // over j
  ComplexMatrix a_embedding;          // ⊕_j H_Aj -> H_A

  struct DualBlock {
    double q = 0.0;
    DensityMatrix rho_abk;  // on (A, Bk)
    DensityMatrix rho_e;    // on E
  };
  std::vector<DualBlock> dual_blocks;  // over k
  ComplexMatrix b_embedding;

  bool fully_factorized = false;
  double reassembly_primal = 0.0;  // A-block form vs input
  double reassembly_dual = 0.0;    // B-block form vs input
  Eigen::MatrixXd overlaps;        // Tr[Π_jk ρ Π_jk]
};

// Assembles ⊕_j p_j ρ_{A_jB} ⊗ ρ_E^{(j)} on (A,B,E); block order follows the
// embedding's column blocks.
inline DensityMatrix build_two_sided(const std::vector<TwoSidedBlock>& blocks,
                                     const ComplexMatrix& a_embedding,
                                     const std::string& a_label = "A",
                                     const std::string& b_label = "B",
                                     const std::string& e_label = "E") {
  if (blocks.empty()) throw Error(Errc::InvalidArgument, "no blocks");
  const std::size_t d_b = blocks.front().rho_ajb.layout[1].dim;
  const std::size_t d_e = blocks.front().rho_e.dim();
  std::size_t d_a = 0;
  double psum = 0.0;
  for (const auto& blk : blocks) {
    if (blk.rho_ajb.layout.size() != 2 || blk.rho_ajb.layout[1].dim != d_b ||
        blk.rho_e.dim() != d_e)
      throw Error(Errc::LayoutMismatch, "inconsistent block layouts");
    if (blk.p < 0.0) throw Error(Errc::InvalidArgument, "negative block weight");
    d_a += blk.rho_ajb.layout[0].dim;
    psum += blk.p;
  }
  if (std::abs(psum - 1.0) > 1e-12)
    throw Error(Errc::InvalidArgument, "block weights sum to " + std::to_string(psum));
  if (a_embedding.rows() != static_cast<Index>(d_a) ||
      a_embedding.cols() != static_cast<Index>(d_a))
    throw Error(Errc::LayoutMismatch, "A-embedding does not match the block dims");

  const Index dim = static_cast<Index>(d_a * d_b * d_e);
  ComplexMatrix acc = ComplexMatrix::Zero(dim, dim);
  Index offset = 0;
  for (const auto& blk : blocks) {
    const Index d_aj = static_cast<Index>(blk.rho_ajb.layout[0].dim);
    if (blk.p > 0.0) {
      const ComplexMatrix w_j = a_embedding.block(0, offset, static_cast<Index>(d_a), d_aj);
      const ComplexMatrix embed = tensor(w_j, identity(static_cast<Index>(d_b * d_e)));
      acc += blk.p * (embed * tensor(blk.rho_ajb.mat, blk.rho_e.mat) * embed.adjoint());
    }
    offset += d_aj;
  }
  return validate_density(acc, SpaceLayout({{a_label, d_a}, {b_label, d_b}, {e_label, d_e}}));
}

namespace detail {

inline DensityMatrix assemble_dual_form(const std::vector<TwoSidedDecomposition::DualBlock>& blocks,
                                        const ComplexMatrix& b_embedding,
                                        const SpaceLayout& layout) {
  const Index d_a = static_cast<Index>(layout[0].dim);
  const Index d_b = static_cast<Index>(layout[1].dim);
  const Index d_e = static_cast<Index>(layout[2].dim);
  ComplexMatrix acc = ComplexMatrix::Zero(d_a * d_b * d_e, d_a * d_b * d_e);
  Index offset = 0;
  for (const auto& blk : blocks) {
    const Index d_bk = static_cast<Index>(blk.rho_abk.layout[1].dim);
    if (blk.q > 0.0) {
      const ComplexMatrix w_k = b_embedding.block(0, offset, d_b, d_bk);
      const ComplexMatrix embed = tensor(tensor(identity(d_a), w_k), identity(d_e));
      acc += blk.q * (embed * tensor(blk.rho_abk.mat, blk.rho_e.mat) * embed.adjoint());
    }
    offset += d_bk;
  }
  return validate_density(acc, layout);
}

}  // namespace detail

// Verifies that a state that is Markov for both role assignments (B touching
// the environment, and A touching it) carries the joint block structure: the
// environment factorizes away from the whole system, block by block. Returns
// both equivalent forms; throws NotTwoSidedMarkov when a precondition or the
// factorization fails.
inline TwoSidedDecomposition check_two_sided(const DensityMatrix& rho,
                                             double tolerance = tol::reassembly) {
  if (rho.layout.size() != 3)
    throw Error(Errc::LayoutMismatch, "check_two_sided expects a three-factor state");
  const std::string a_label = rho.layout[0].label;
  const std::string b_label = rho.layout[1].label;
  const std::string e_label = rho.layout[2].label;
  const std::size_t d_a = rho.layout[0].dim;
  const std::size_t d_e = rho.layout[2].dim;

  const MarkovVerdict v_b = is_markov(rho, {a_label}, {b_label}, {e_label});
  if (!v_b.markov)
    throw Error(Errc::NotTwoSidedMarkov,
                "not Markov for the B-side role (CMI " + std::to_string(v_b.cmi) + ")");
  const DensityMatrix rho_bae = permuted(rho, {b_label, a_label, e_label});
  const MarkovVerdict v_a = is_markov(rho_bae, {b_label}, {a_label}, {e_label});
  if (!v_a.markov)
    throw Error(Errc::NotTwoSidedMarkov,
                "not Markov for the A-side role (CMI " + std::to_string(v_a.cmi) + ")");

  const MarkovDecomposition decomp_b = recover_structure(rho);
  const MarkovDecomposition decomp_a = recover_structure(rho_bae);

  TwoSidedDecomposition out;
  out.a_embedding = decomp_a.embedding;
  out.b_embedding = decomp_b.embedding;

  // overlap weights Tr[Π_jk ρ Π_jk]
  const std::size_t nj = decomp_a.blocks.size();
  const std::size_t nk = decomp_b.blocks.size();
  out.overlaps = Eigen::MatrixXd::Zero(static_cast<Index>(nj), static_cast<Index>(nk));
  std::vector<ComplexMatrix> proj_a(nj), proj_b(nk);
  {
    Index off = 0;
    for (std::size_t j = 0; j < nj; ++j) {
      const Index d = static_cast<Index>(decomp_a.blocks[j].d_bl * decomp_a.blocks[j].d_br);
      const ComplexMatrix w = decomp_a.embedding.block(0, off, static_cast<Index>(d_a), d);
      proj_a[j] = w * w.adjoint();
      off += d;
    }
    off = 0;
    for (std::size_t k = 0; k < nk; ++k) {
      const Index d = static_cast<Index>(decomp_b.blocks[k].d_bl * decomp_b.blocks[k].d_br);
      const ComplexMatrix w =
          decomp_b.embedding.block(0, off, static_cast<Index>(rho.layout[1].dim), d);
      proj_b[k] = w * w.adjoint();
      off += d;
    }
  }
  for (std::size_t j = 0; j < nj; ++j)
    for (std::size_t k = 0; k < nk; ++k) {
      const ComplexMatrix pi =
          tensor(tensor(proj_a[j], proj_b[k]), identity(static_cast<Index>(d_e)));
      out.overlaps(static_cast<Index>(j), static_cast<Index>(k)) =
          (pi * rho.mat).real().trace();
    }

  // the per-block environment states from both recoveries; on overlapping
  // (j,k) pairs they must agree and the (right-factor, E) states factorize
  constexpr double weight_floor = 1e-10;
  std::vector<DensityMatrix> env_a(nj), env_b(nk);
  for (std::size_t j = 0; j < nj; ++j)
    if (decomp_a.blocks[j].q > weight_floor)
      env_a[j] = marginal(decomp_a.blocks[j].rho_br_e, {e_label});
  for (std::size_t k = 0; k < nk; ++k)
    if (decomp_b.blocks[k].q > weight_floor)
      env_b[k] = marginal(decomp_b.blocks[k].rho_br_e, {e_label});

  for (std::size_t j = 0; j < nj; ++j) {
    if (decomp_a.blocks[j].q <= weight_floor) continue;
    for (std::size_t k = 0; k < nk; ++k) {
      if (decomp_b.blocks[k].q <= weight_floor) continue;
      if (out.overlaps(static_cast<Index>(j), static_cast<Index>(k)) <= weight_floor) continue;
      // ρ_{aR_jE} = ρ_{aR_j} ⊗ ρ̄_E^{(k)} and its dual
      const DensityMatrix& ar_e = decomp_a.blocks[j].rho_br_e;
      const DensityMatrix fac_a =
          tensor_states(marginal(ar_e, {"bR"}), env_b[k]);
      const double dist_a = trace_distance(ar_e.mat, fac_a.mat);
      const DensityMatrix& br_e = decomp_b.blocks[k].rho_br_e;
      const DensityMatrix fac_b =
          tensor_states(marginal(br_e, {"bR"}), env_a[j]);
      const double dist_b = trace_distance(br_e.mat, fac_b.mat);
      if (dist_a > tolerance || dist_b > tolerance)
        throw Error(Errc::NotTwoSidedMarkov,
                    "environment does not factorize on overlap (" + std::to_string(j) + "," +
                        std::to_string(k) + "): " + std::to_string(std::max(dist_a, dist_b)));
    }
  }

  // primal form over j: ρ_{A_jB} = ρ_{aL_jB} ⊗ ρ_{aR_j}
  for (std::size_t j = 0; j < nj; ++j) {
    const auto& blk = decomp_a.blocks[j];
    TwoSidedBlock tsb;
    tsb.p = blk.q;
    if (blk.q > weight_floor) {
      const DensityMatrix al_b = permuted(blk.rho_a_bl, {"bL", b_label});  // (aL_j, B)
      const DensityMatrix ar = marginal(blk.rho_br_e, {"bR"});             // aR_j
      DensityMatrix joint = tensor_states(al_b, ar);                       // (aL, B, aR)
      joint = permuted(joint, {"bL", "bR", b_label});
      tsb.rho_ajb = regroup(joint, {{"bL", "bR"}, {b_label}}, {"Aj", b_label});
      tsb.rho_e = relabeled(env_a[j], {e_label});
    } else {
      tsb.rho_ajb = maximally_mixed(SpaceLayout({{"Aj", blk.d_bl * blk.d_br},
                                                 {b_label, rho.layout[1].dim}}));
      tsb.rho_e = maximally_mixed(single_factor(e_label, d_e));
    }
    out.blocks.push_back(std::move(tsb));
  }

  // dual form over k: ρ̂_{AB_k} = ρ_{AbL_k} ⊗ ρ_{bR_k}
  for (std::size_t k = 0; k < nk; ++k) {
    const auto& blk = decomp_b.blocks[k];
    TwoSidedDecomposition::DualBlock db;
    db.q = blk.q;
    if (blk.q > weight_floor) {
      DensityMatrix joint = tensor_states(blk.rho_a_bl, marginal(blk.rho_br_e, {"bR"}));
      db.rho_abk = regroup(joint, {{a_label}, {"bL", "bR"}}, {a_label, "Bk"});
      db.rho_e = relabeled(env_b[k], {e_label});
    } else {
      db.rho_abk = maximally_mixed(
          SpaceLayout({{a_label, d_a}, {"Bk", blk.d_bl * blk.d_br}}));
      db.rho_e = maximally_mixed(single_factor(e_label, d_e));
    }
    out.dual_blocks.push_back(std::move(db));
  }

  const DensityMatrix primal =
      build_two_sided(out.blocks, out.a_embedding, a_label, b_label, e_label);
  out.reassembly_primal = trace_distance(primal, rho);
  const DensityMatrix dual =
      detail::assemble_dual_form(out.dual_blocks, out.b_embedding, rho.layout);
  out.reassembly_dual = trace_distance(dual, rho);
  if (out.reassembly_primal > tolerance || out.reassembly_dual > tolerance)
    throw Error(Errc::NotTwoSidedMarkov,
                "reassembly distance " +
                    std::to_string(std::max(out.reassembly_primal, out.reassembly_dual)));

  // special case: one A-block overlapping every B-block forces a single
  // environment state, i.e. the state factorizes as (system) ⊗ ρ_E
  for (std::size_t j = 0; j < nj && !out.fully_factorized; ++j) {
    if (decomp_a.blocks[j].q <= weight_floor) continue;
    bool all = true;
    for (std::size_t k = 0; k < nk; ++k) {
      if (decomp_b.blocks[k].q <= weight_floor) continue;
      all = all && out.overlaps(static_cast<Index>(j), static_cast<Index>(k)) > weight_floor;
    }
    if (!all) continue;
    bool same_env = true;
    for (std::size_t j2 = 0; j2 < nj && same_env; ++j2) {
      if (decomp_a.blocks[j2].q <= weight_floor) continue;
      same_env = trace_distance(env_a[j2].mat, env_a[j].mat) <= tolerance;
    }
    out.fully_factorized = same_env;
  }
  return out;
}

// Random instance of the joint two-sided structure, returned in the primal
// form ready for build_two_sided. The overlap pattern controls which blocks
// share an environment state.
struct TwoSidedInstance {
  std::vector<TwoSidedBlock> blocks;
  ComplexMatrix a_embedding;
  bool fully_factorized = false;
  std::size_t d_a = 0, d_b = 0, d_e = 0;
};

inline TwoSidedInstance random_two_sided_instance(Rng& rng, std::size_t d_env = 2,
                                                  bool force_full_overlap = false) {
  std::uniform_int_distribution<std::size_t> nblocks(1, 2);
  std::uniform_int_distribution<std::size_t> factor(1, 2);
  std::uniform_real_distribution<double> weight(0.1, 1.0);

  const std::size_t nj = nblocks(rng), nk = nblocks(rng);
  std::vector<std::pair<std::size_t, std::size_t>> a_dims(nj), b_dims(nk);
  for (auto& d : a_dims) d = {factor(rng), factor(rng)};
  for (auto& d : b_dims) d = {factor(rng), factor(rng)};

  // overlap pattern: either everything overlaps (single environment) or a
  // diagonal-ish pattern splitting into components
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Index>(nj), static_cast<Index>(nk));
  const bool full = force_full_overlap || nj == 1 || nk == 1 || (rng() % 2 == 0);
  for (std::size_t j = 0; j < nj; ++j)
    for (std::size_t k = 0; k < nk; ++k)
      if (full || j % nk == k) c(static_cast<Index>(j), static_cast<Index>(k)) = weight(rng);
  c /= c.sum();

  // connected components of the overlap pattern determine shared env states
  std::vector<int> comp_j(nj, -1), comp_k(nk, -1);
  int ncomp = 0;
  for (std::size_t j0 = 0; j0 < nj; ++j0) {
    if (comp_j[j0] >= 0) continue;
    std::vector<std::size_t> stack = {j0};
    comp_j[j0] = ncomp;
    while (!stack.empty()) {
      const std::size_t j = stack.back();
      stack.pop_back();
      for (std::size_t k = 0; k < nk; ++k) {
        if (c(static_cast<Index>(j), static_cast<Index>(k)) <= 0.0 || comp_k[k] >= 0) continue;
        comp_k[k] = ncomp;
        for (std::size_t j2 = 0; j2 < nj; ++j2)
          if (c(static_cast<Index>(j2), static_cast<Index>(k)) > 0.0 && comp_j[j2] < 0) {
            comp_j[j2] = ncomp;
            stack.push_back(j2);
          }
      }
    }
    ++ncomp;
  }
  std::vector<DensityMatrix> mu(static_cast<std::size_t>(ncomp));
  for (auto& m : mu) m = random_density(single_factor("E", d_env), d_env, rng);

  std::size_t d_b = 0;
  for (const auto& [bl, br] : b_dims) d_b += bl * br;
  const ComplexMatrix w_b = random_haar_unitary(static_cast<Index>(d_b), rng);

  std::vector<DensityMatrix> tau(nk);
  for (std::size_t k = 0; k < nk; ++k)
    tau[k] = random_density(single_factor("bR", b_dims[k].second), b_dims[k].second, rng);

  TwoSidedInstance inst;
  inst.d_b = d_b;
  inst.d_e = d_env;
  std::size_t d_a = 0;
  for (const auto& [al, ar] : a_dims) d_a += al * ar;
  inst.d_a = d_a;
  inst.fully_factorized = ncomp == 1;

  for (std::size_t j = 0; j < nj; ++j) {
    const auto [d_al, d_ar] = a_dims[j];
    const double p_j = c.row(static_cast<Index>(j)).sum();

    // ρ_{aL_jB} = ⊕_k (c_jk/p_j) ρ^{jk}_{aL bL} ⊗ τ^k embedded along the B split
    const Index d_albd = static_cast<Index>(d_al * d_b);
    ComplexMatrix al_b = ComplexMatrix::Zero(d_albd, d_albd);
    Index off = 0;
    for (std::size_t k = 0; k < nk; ++k) {
      const auto [d_bl, d_br] = b_dims[k];
      const Index d_bk = static_cast<Index>(d_bl * d_br);
      const double c_jk = c(static_cast<Index>(j), static_cast<Index>(k));
      if (c_jk > 0.0) {
        DensityMatrix joint = random_density(
            SpaceLayout({{"aL", d_al}, {"bL", d_bl}}), d_al * d_bl, rng);
        const ComplexMatrix w_bk = w_b.block(0, off, static_cast<Index>(d_b), d_bk);
        const ComplexMatrix embed = tensor(identity(static_cast<Index>(d_al)), w_bk);
        al_b += (c_jk / p_j) * (embed * tensor(joint.mat, tau[k].mat) * embed.adjoint());
      }
      off += d_bk;
    }
    const DensityMatrix rho_al_b =
        validate_density(al_b, SpaceLayout({{"aL", d_al}, {"B", d_b}}));
    const DensityMatrix omega =
        random_density(single_factor("aR", d_ar), d_ar, rng);
    DensityMatrix ajb = permuted(tensor_states(rho_al_b, omega), {"aL", "aR", "B"});

    TwoSidedBlock blk;
    blk.p = p_j;
    blk.rho_ajb = regroup(ajb, {{"aL", "aR"}, {"B"}}, {"Aj", "B"});
    blk.rho_e = mu[static_cast<std::size_t>(comp_j[j])];
    inst.blocks.push_back(std::move(blk));
  }
  inst.a_embedding = random_haar_unitary(static_cast<Index>(d_a), rng);
  return inst;
}

}  // namespace qmarkov
