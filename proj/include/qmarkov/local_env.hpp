#pragma once

#include "qmarkov/two_sided.hpp"

namespace qmarkov {

// Four-partite block data on (A, E_A, B, E_B):
//   ρ = ⊕_{jk} q_jk ρ_{aL_jE_A} ⊗ ρ_{aR_jbL_k} ⊗ ρ_{bR_kE_B},
// with H_A = ⊕_j aL_j ⊗ aR_j and H_B = ⊕_k bL_k ⊗ bR_k. The A-environment
// state depends only on j, the B-environment state only on k; the middle
// factor couples the two splits.
struct LocalEnvDecomposition {
  struct Split {
    std::size_t d_l = 1, d_r = 1;
  };
  std::vector<Split> a_factors;  // (aL_j, aR_j)
  std::vector<Split> b_factors;  // (bL_k, bR_k)
  Eigen::MatrixXd weights;       // q_jk, rows j
  std::vector<DensityMatrix> a_env;                  // per j, on (aL, EA)
  std::vector<std::vector<DensityMatrix>> mid;       // per (j,k), on (aR, bL)
  std::vector<DensityMatrix> b_env;                  // per k, on (bR, EB)
  ComplexMatrix a_embedding;  // ⊕_j (aL_j ⊗ aR_j) -> H_A
  ComplexMatrix b_embedding;  // ⊕_k (bL_k ⊗ bR_k) -> H_B
  std::vector<std::pair<std::size_t, std::size_t>> placeholder_blocks;  // p'_jk = 0

  std::size_t d_a() const {
    std::size_t d = 0;
    for (const auto& s : a_factors) d += s.d_l * s.d_r;
    return d;
  }
  std::size_t d_b() const {
    std::size_t d = 0;
    for (const auto& s : b_factors) d += s.d_l * s.d_r;
    return d;
  }
};

inline DensityMatrix build_local_env(const LocalEnvDecomposition& d,
                                     const std::string& a_label = "A",
                                     const std::string& ea_label = "EA",
                                     const std::string& b_label = "B",
                                     const std::string& eb_label = "EB") {
  const std::size_t nj = d.a_factors.size(), nk = d.b_factors.size();
  if (nj == 0 || nk == 0) throw Error(Errc::InvalidArgument, "empty decomposition");
  if (d.weights.rows() != static_cast<Index>(nj) || d.weights.cols() != static_cast<Index>(nk))
    throw Error(Errc::LayoutMismatch, "weight matrix shape");
  if (std::abs(d.weights.sum() - 1.0) > 1e-12)
    throw Error(Errc::InvalidArgument, "weights sum to " + std::to_string(d.weights.sum()));
  const std::size_t d_ea = d.a_env.front().layout[1].dim;
  const std::size_t d_eb = d.b_env.front().layout[1].dim;
  const Index d_a = static_cast<Index>(d.d_a());
  const Index d_b = static_cast<Index>(d.d_b());
  const Index dim = d_a * static_cast<Index>(d_ea) * d_b * static_cast<Index>(d_eb);

  ComplexMatrix acc = ComplexMatrix::Zero(dim, dim);
  Index a_off = 0;
  for (std::size_t j = 0; j < nj; ++j) {
    const auto [d_al, d_ar] = std::pair{d.a_factors[j].d_l, d.a_factors[j].d_r};
    const Index d_aj = static_cast<Index>(d_al * d_ar);
    const ComplexMatrix w_aj = d.a_embedding.block(0, a_off, d_a, d_aj);
    a_off += d_aj;
    Index b_off = 0;
    for (std::size_t k = 0; k < nk; ++k) {
      const auto [d_bl, d_br] = std::pair{d.b_factors[k].d_l, d.b_factors[k].d_r};
      const Index d_bk = static_cast<Index>(d_bl * d_br);
      const ComplexMatrix w_bk = d.b_embedding.block(0, b_off, d_b, d_bk);
      b_off += d_bk;
      const double q = d.weights(static_cast<Index>(j), static_cast<Index>(k));
      if (q <= 0.0) continue;

      DensityMatrix t = tensor_states(tensor_states(d.a_env[j], d.mid[j][k]), d.b_env[k]);
      t = relabeled(t, {"aL", "ea", "aR", "bL", "bR", "eb"});
      t = permuted(t, {"aL", "aR", "ea", "bL", "bR", "eb"});
      const ComplexMatrix embed =
          tensor(tensor(tensor(w_aj, identity(static_cast<Index>(d_ea))), w_bk),
                 identity(static_cast<Index>(d_eb)));
      acc += q * (embed * t.mat * embed.adjoint());
    }
  }
  SpaceLayout layout({{a_label, d.d_a()},
                      {ea_label, d_ea},
                      {b_label, d.d_b()},
                      {eb_label, d_eb}});
  return validate_density(acc, layout);
}

// Verifies the joint structure of a four-partite state that passes the
// grouped Markov test for both local interactions and returns the recovered
// block data. Blocks with vanishing intersection weight get a flagged
// maximally-mixed placeholder.
inline LocalEnvDecomposition check_local_env(const DensityMatrix& rho,
                                             double tolerance = tol::reassembly) {
  if (rho.layout.size() != 4)
    throw Error(Errc::LayoutMismatch, "check_local_env expects four factors (A,EA,B,EB)");
  const std::string a_l = rho.layout[0].label;
  const std::string ea_l = rho.layout[1].label;
  const std::string b_l = rho.layout[2].label;
  const std::string eb_l = rho.layout[3].label;
  const std::size_t d_ea = rho.layout[1].dim;
  const std::size_t d_eb = rho.layout[3].dim;

  const MarkovVerdict v_b = is_markov(rho, {a_l, ea_l}, {b_l}, {eb_l});
  if (!v_b.markov)
    throw Error(Errc::NotLocalEnvMarkov,
                "not Markov for the (B,EB) interaction (CMI " + std::to_string(v_b.cmi) + ")");
  const MarkovVerdict v_a = is_markov(rho, {b_l, eb_l}, {a_l}, {ea_l});
  if (!v_a.markov)
    throw Error(Errc::NotLocalEnvMarkov,
                "not Markov for the (A,EA) interaction (CMI " + std::to_string(v_a.cmi) + ")");

  // B-side structure from the (AE_A | B | E_B) grouping
  const DensityMatrix grouped_b = regroup(rho, {{a_l, ea_l}, {b_l}, {eb_l}}, {"x", "B", "EB"});
  const MarkovDecomposition decomp_b = recover_structure(grouped_b);

  // A-side structure from the (BE_B | A | E_A) grouping
  const DensityMatrix grouped_a = regroup(rho, {{b_l, eb_l}, {a_l}, {ea_l}}, {"y", "A", "EA"});
  const MarkovDecomposition decomp_a = recover_structure(grouped_a);

  const std::size_t nj = decomp_a.blocks.size(), nk = decomp_b.blocks.size();
  LocalEnvDecomposition out;
  out.weights = Eigen::MatrixXd::Zero(static_cast<Index>(nj), static_cast<Index>(nk));
  out.mid.resize(nj, std::vector<DensityMatrix>(nk));
  out.a_env.resize(nj);
  out.b_env.resize(nk);

  // the recovered A blocks come out (untouched-paired, env-paired), i.e.
  // (aR_j, aL_j); the assembled convention wants aL major, so swap the
  // in-block column order of the embedding
  const Index d_a = static_cast<Index>(rho.layout[0].dim);
  ComplexMatrix w_a(d_a, d_a);
  {
    Index off = 0;
    for (const auto& blk : decomp_a.blocks) {
      const Index d_ar = static_cast<Index>(blk.d_bl);  // untouched-paired
      const Index d_al = static_cast<Index>(blk.d_br);  // env-paired
      for (Index al = 0; al < d_al; ++al)
        for (Index ar = 0; ar < d_ar; ++ar)
          w_a.col(off + al * d_ar + ar) = decomp_a.embedding.col(off + ar * d_al + al);
      off += d_al * d_ar;
    }
  }
  out.a_embedding = w_a;
  out.b_embedding = decomp_b.embedding;
  for (const auto& blk : decomp_a.blocks) out.a_factors.push_back({blk.d_br, blk.d_bl});
  for (const auto& blk : decomp_b.blocks) out.b_factors.push_back({blk.d_bl, blk.d_br});

  constexpr double weight_floor = 1e-12;
  DensityTolerances loose;
  loose.trace_one = 1e-9;

  for (std::size_t k = 0; k < nk; ++k) {
    const auto& blk = decomp_b.blocks[k];
    if (blk.q > weight_floor) {
      out.b_env[k] = relabeled(blk.rho_br_e, {"bR", eb_l});
    } else {
      out.b_env[k] =
          maximally_mixed(SpaceLayout({{"bR", blk.d_br}, {eb_l, d_eb}}));
    }
  }

  for (std::size_t j = 0; j < nj; ++j) {
    const auto& blk = decomp_a.blocks[j];
    const double p_j = blk.q;
    if (p_j > weight_floor) {
      out.a_env[j] = relabeled(blk.rho_br_e, {"aL", ea_l});
    } else {
      out.a_env[j] = maximally_mixed(SpaceLayout({{"aL", blk.d_br}, {ea_l, d_ea}}));
    }

    // ρ_{aR_j B E_B}: the untouched-paired block state, unfolded
    DensityMatrix ar_bep = permuted(blk.rho_a_bl, {"bL", "y"});  // (aR_j, BEB)
    DensityMatrix ar_b_eb = split_factor(
        ar_bep, "y", SpaceLayout({{b_l, rho.layout[2].dim}, {eb_l, d_eb}}));

    Index b_off = 0;
    for (std::size_t k = 0; k < nk; ++k) {
      const auto& bblk = decomp_b.blocks[k];
      const Index d_bk = static_cast<Index>(bblk.d_bl * bblk.d_br);
      const ComplexMatrix w_bk =
          decomp_b.embedding.block(0, b_off, static_cast<Index>(rho.layout[2].dim), d_bk);
      b_off += d_bk;
      if (p_j <= weight_floor || bblk.q <= weight_floor) {
        out.mid[j][k] = maximally_mixed(
            SpaceLayout({{"aR", out.a_factors[j].d_r}, {"bL", bblk.d_bl}}));
        out.placeholder_blocks.emplace_back(j, k);
        continue;
      }
      const ComplexMatrix proj = tensor(
          tensor(identity(static_cast<Index>(out.a_factors[j].d_r)), w_bk),
          identity(static_cast<Index>(d_eb)));
      const ComplexMatrix sigma = proj.adjoint() * ar_b_eb.mat * proj;
      const double p_prime = sigma.real().trace();
      if (p_prime <= weight_floor) {
        out.mid[j][k] = maximally_mixed(
            SpaceLayout({{"aR", out.a_factors[j].d_r}, {"bL", bblk.d_bl}}));
        out.placeholder_blocks.emplace_back(j, k);
        continue;
      }
      const SpaceLayout sigma_layout({{"aR", out.a_factors[j].d_r},
                                      {"bL", bblk.d_bl},
                                      {"bR", bblk.d_br},
                                      {eb_l, d_eb}});
      out.mid[j][k] = validate_density(
          partial_trace(sigma / p_prime, sigma_layout, {"aR", "bL"}),
          SpaceLayout({{"aR", out.a_factors[j].d_r}, {"bL", bblk.d_bl}}), loose);
      out.weights(static_cast<Index>(j), static_cast<Index>(k)) = p_j * p_prime;
    }
  }
  out.weights /= out.weights.sum();

  const DensityMatrix rebuilt = build_local_env(out, a_l, ea_l, b_l, eb_l);
  const double dist = trace_distance(rebuilt, rho);
  if (dist > tolerance)
    throw Error(Errc::NotLocalEnvMarkov,
                "reassembly distance " + std::to_string(dist) + " exceeds tolerance");
  return out;
}

// Marginal over both environments in block form,
// ⊕_{jk} q_jk ρ_{aL_j} ⊗ ρ_{aR_jbL_k} ⊗ ρ_{bR_k} on (A,B).
inline DensityMatrix local_env_system_marginal(const LocalEnvDecomposition& d,
                                               const std::string& a_label = "A",
                                               const std::string& b_label = "B") {
  const Index d_a = static_cast<Index>(d.d_a());
  const Index d_b = static_cast<Index>(d.d_b());
  ComplexMatrix acc = ComplexMatrix::Zero(d_a * d_b, d_a * d_b);
  Index a_off = 0;
  for (std::size_t j = 0; j < d.a_factors.size(); ++j) {
    const Index d_aj = static_cast<Index>(d.a_factors[j].d_l * d.a_factors[j].d_r);
    const ComplexMatrix w_aj = d.a_embedding.block(0, a_off, d_a, d_aj);
    a_off += d_aj;
    const ComplexMatrix rho_al = partial_trace(
        d.a_env[j].mat,
        SpaceLayout({{"aL", d.a_factors[j].d_l}, {"ea", d.a_env[j].layout[1].dim}}), {"aL"});
    Index b_off = 0;
    for (std::size_t k = 0; k < d.b_factors.size(); ++k) {
      const Index d_bk = static_cast<Index>(d.b_factors[k].d_l * d.b_factors[k].d_r);
      const ComplexMatrix w_bk = d.b_embedding.block(0, b_off, d_b, d_bk);
      b_off += d_bk;
      const double q = d.weights(static_cast<Index>(j), static_cast<Index>(k));
      if (q <= 0.0) continue;
      const ComplexMatrix rho_br = partial_trace(
          d.b_env[k].mat,
          SpaceLayout({{"bR", d.b_factors[k].d_r}, {"eb", d.b_env[k].layout[1].dim}}), {"bR"});
      const ComplexMatrix embed = tensor(w_aj, w_bk);
      acc += q * (embed * tensor(tensor(rho_al, d.mid[j][k].mat), rho_br) * embed.adjoint());
    }
  }
  return validate_density(
      acc, SpaceLayout({{a_label, d.d_a()}, {b_label, d.d_b()}}));
}

// Λ_A = ⊕_j Λ_{aL_j} ⊗ id_{aR_j} : H_A -> H_A ⊗ H_EA, Petz per block.
inline KrausChannel local_env_assignment_a(const LocalEnvDecomposition& d,
                                           const std::string& a_label = "A",
                                           const std::string& ea_label = "EA",
                                           double q_floor = 1e-12) {
  const Index d_a = static_cast<Index>(d.d_a());
  const std::size_t d_ea = d.a_env.front().layout[1].dim;
  std::vector<ComplexMatrix> kraus;
  Index off = 0;
  for (std::size_t j = 0; j < d.a_factors.size(); ++j) {
    const auto [d_al, d_ar] = std::pair{d.a_factors[j].d_l, d.a_factors[j].d_r};
    const Index d_aj = static_cast<Index>(d_al * d_ar);
    const ComplexMatrix w_j = d.a_embedding.block(0, off, d_a, d_aj);
    off += d_aj;
    const ComplexMatrix w_j_e = tensor(w_j, identity(static_cast<Index>(d_ea)));
    const ComplexMatrix perm = permutation_matrix(
        SpaceLayout({{"aL", d_al}, {"ea", d_ea}, {"aR", d_ar}}), {"aL", "aR", "ea"});
    const double p_j = d.weights.row(static_cast<Index>(j)).sum();
    if (p_j >= q_floor) {
      AssignmentMap petz = petz_assignment(d.a_env[j]);
      for (const auto& k_i : petz.channel.kraus)
        kraus.push_back(w_j_e * perm * tensor(k_i, identity(static_cast<Index>(d_ar))) *
                        w_j.adjoint());
    } else {
      kraus.push_back(w_j_e * perm *
                      tensor(tensor(identity(static_cast<Index>(d_al)),
                                    basis_column(static_cast<Index>(d_ea), 0)),
                             identity(static_cast<Index>(d_ar))) *
                      w_j.adjoint());
    }
  }
  SpaceLayout in = single_factor(a_label, d.d_a());
  SpaceLayout out({{a_label, d.d_a()}, {ea_label, d_ea}});
  return validate_channel(std::move(kraus), in, out, 1e-9);
}

// Λ_B = ⊕_k id_{bL_k} ⊗ Λ_{bR_k} : H_B -> H_B ⊗ H_EB.
inline KrausChannel local_env_assignment_b(const LocalEnvDecomposition& d,
                                           const std::string& b_label = "B",
                                           const std::string& eb_label = "EB",
                                           double q_floor = 1e-12) {
  const Index d_b = static_cast<Index>(d.d_b());
  const std::size_t d_eb = d.b_env.front().layout[1].dim;
  std::vector<ComplexMatrix> kraus;
  Index off = 0;
  for (std::size_t k = 0; k < d.b_factors.size(); ++k) {
    const auto [d_bl, d_br] = std::pair{d.b_factors[k].d_l, d.b_factors[k].d_r};
    const Index d_bk = static_cast<Index>(d_bl * d_br);
    const ComplexMatrix w_k = d.b_embedding.block(0, off, d_b, d_bk);
    off += d_bk;
    const ComplexMatrix w_k_e = tensor(w_k, identity(static_cast<Index>(d_eb)));
    const double q_k = d.weights.col(static_cast<Index>(k)).sum();
    if (q_k >= q_floor) {
      AssignmentMap petz = petz_assignment(d.b_env[k]);
      for (const auto& k_i : petz.channel.kraus)
        kraus.push_back(w_k_e * tensor(identity(static_cast<Index>(d_bl)), k_i) * w_k.adjoint());
    } else {
      kraus.push_back(w_k_e *
                      tensor(identity(d_bk), basis_column(static_cast<Index>(d_eb), 0)) *
                      w_k.adjoint());
    }
  }
  SpaceLayout in = single_factor(b_label, d.d_b());
  SpaceLayout out({{b_label, d.d_b()}, {eb_label, d_eb}});
  return validate_channel(std::move(kraus), in, out, 1e-9);
}

// ε̄_A = Tr_EA' ∘ F_AEA ∘ Λ_A and ε̄_B = Tr_EB' ∘ F_BEB ∘ Λ_B, plus the
// product-reduction check distance on the assembled state.
struct LocalReducedProduct {
  KrausChannel eps_a;
  KrausChannel eps_b;
  double check = 0.0;
};

inline LocalReducedProduct local_reduced_product(const LocalEnvDecomposition& d,
                                                 const KrausChannel& ch_a,
                                                 const KrausChannel& ch_b) {
  const DensityMatrix full = build_local_env(d);
  const SpaceLayout aea = full.layout.sublayout({"A", "EA"});
  const SpaceLayout beb = full.layout.sublayout({"B", "EB"});
  if (ch_a.in_layout != aea)
    throw Error(Errc::LayoutMismatch, "channel on (A,EA) expected input " + aea.to_string());
  if (ch_b.in_layout != beb)
    throw Error(Errc::LayoutMismatch, "channel on (B,EB) expected input " + beb.to_string());

  const KrausChannel lam_a = local_env_assignment_a(d);
  const KrausChannel lam_b = local_env_assignment_b(d);
  LocalReducedProduct out{
      compose(trace_out_channel(ch_a.out_layout, {ch_a.out_layout[1].label}),
              compose(ch_a, lam_a)),
      compose(trace_out_channel(ch_b.out_layout, {ch_b.out_layout[1].label}),
              compose(ch_b, lam_b)),
      0.0};

  // truth: apply both lifted channels, trace out the final environments
  const KrausChannel lifted_a = lift_localized(ch_a, full.layout);
  const KrausChannel lifted_b = lift_localized(ch_b, lifted_a.out_layout);
  const DensityMatrix evolved = apply(compose(lifted_b, lifted_a), full);
  const DensityMatrix truth =
      marginal(evolved, {ch_a.out_layout[0].label, ch_b.out_layout[0].label});

  const DensityMatrix rho_ab = marginal(full, {"A", "B"});
  const KrausChannel prod_a = lift_localized(out.eps_a, rho_ab.layout);
  const KrausChannel prod_b = lift_localized(out.eps_b, prod_a.out_layout);
  const DensityMatrix reduced = apply(compose(prod_b, prod_a), rho_ab);
  out.check = trace_distance(truth, reduced);
  return out;
}

// Random valid instance of the Eq-above structure for sweeps.
inline LocalEnvDecomposition random_local_env_instance(Rng& rng, std::size_t d_ea = 2,
                                                       std::size_t d_eb = 2) {
  std::uniform_int_distribution<std::size_t> nblocks(1, 2);
  std::uniform_int_distribution<std::size_t> factor(1, 2);
  std::uniform_real_distribution<double> weight(0.1, 1.0);

  LocalEnvDecomposition d;
  const std::size_t nj = nblocks(rng), nk = nblocks(rng);
  for (std::size_t j = 0; j < nj; ++j) d.a_factors.push_back({factor(rng), factor(rng)});
  for (std::size_t k = 0; k < nk; ++k) d.b_factors.push_back({factor(rng), factor(rng)});

  d.weights = Eigen::MatrixXd::Zero(static_cast<Index>(nj), static_cast<Index>(nk));
  for (std::size_t j = 0; j < nj; ++j)
    for (std::size_t k = 0; k < nk; ++k)
      if (nj == 1 || nk == 1 || rng() % 4 != 0)
        d.weights(static_cast<Index>(j), static_cast<Index>(k)) = weight(rng);
  if (d.weights.sum() <= 0.0) d.weights(0, 0) = 1.0;
  // every block row/column needs some weight for the recovered splits to match
  for (std::size_t j = 0; j < nj; ++j)
    if (d.weights.row(static_cast<Index>(j)).sum() <= 0.0)
      d.weights(static_cast<Index>(j), 0) = weight(rng);
  for (std::size_t k = 0; k < nk; ++k)
    if (d.weights.col(static_cast<Index>(k)).sum() <= 0.0)
      d.weights(0, static_cast<Index>(k)) = weight(rng);
  d.weights /= d.weights.sum();

  d.mid.resize(nj, std::vector<DensityMatrix>(nk));
  for (std::size_t j = 0; j < nj; ++j) {
    d.a_env.push_back(random_density(
        SpaceLayout({{"aL", d.a_factors[j].d_l}, {"ea", d_ea}}), d.a_factors[j].d_l * d_ea,
        rng));
    for (std::size_t k = 0; k < nk; ++k)
      d.mid[j][k] = random_density(
          SpaceLayout({{"aR", d.a_factors[j].d_r}, {"bL", d.b_factors[k].d_l}}),
          d.a_factors[j].d_r * d.b_factors[k].d_l, rng);
  }
  for (std::size_t k = 0; k < nk; ++k)
    d.b_env.push_back(random_density(
        SpaceLayout({{"bR", d.b_factors[k].d_r}, {"eb", d_eb}}), d.b_factors[k].d_r * d_eb,
        rng));
  d.a_embedding = random_haar_unitary(static_cast<Index>(d.d_a()), rng);
  d.b_embedding = random_haar_unitary(static_cast<Index>(d.d_b()), rng);
  return d;
}

}  // namespace qmarkov
