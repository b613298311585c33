#pragma once

#include <optional>
#include <vector>

#include "qmarkov/channel.hpp"
#include "qmarkov/entropy.hpp"
#include "qmarkov/weyl.hpp"

namespace qmarkov {

// A CP map sending a system marginal to a full system-environment state,
// packaged with the pair it reproduces. Consistency (channel(source) = target)
// and compatibility (Tr_env target = source) are enforced at construction.
struct AssignmentMap {
  KrausChannel channel;  // H_src -> H_src ⊗ H_env
  DensityMatrix source;
  DensityMatrix target;
  std::optional<ComplexMatrix> support;  // projector onto supp(source side)
};

inline AssignmentMap make_assignment(KrausChannel channel, DensityMatrix source,
                                     DensityMatrix target,
                                     std::optional<ComplexMatrix> support = std::nullopt,
                                     double consistency_tol = tol::assignment_consistency) {
  if (channel.in_layout != source.layout)
    throw Error(Errc::LayoutMismatch, "assignment input layout does not match source");
  if (channel.out_layout != target.layout)
    throw Error(Errc::LayoutMismatch, "assignment output layout does not match target");
  const double consistency = trace_distance(apply(channel, source), target);
  if (consistency > consistency_tol)
    throw Error(Errc::InvalidArgument,
                "assignment does not reproduce its target (distance " +
                    std::to_string(consistency) + ")");
  const double compat =
      trace_distance(marginal(target, source.layout.labels()), source);
  if (compat > consistency_tol)
    throw Error(Errc::InvalidArgument,
                "target marginal does not match source (distance " + std::to_string(compat) +
                    ")");
  return AssignmentMap{std::move(channel), std::move(source), std::move(target),
                       std::move(support)};
}

// Applies the assignment channel after checking the input lies on the support
// it was built from; off-support weight is reported, never silently projected.
inline DensityMatrix apply_assignment(const AssignmentMap& am, const DensityMatrix& rho,
                                      double support_tol = 1e-9) {
  if (am.support) {
    const Index d = static_cast<Index>(am.source.dim());
    const double outside =
        ((identity(d) - *am.support) * rho.mat).real().trace();
    if (outside > support_tol)
      throw Error(Errc::SupportMismatch,
                  "input has weight " + std::to_string(outside) + " outside the support");
  }
  return apply(am.channel, rho);
}

// Ξ(ρ) = (I ⊗ |i_E>) ρ (I ⊗ <i_E|): embeds with a fixed pure environment.
inline AssignmentMap xi_embed(const DensityMatrix& rho_ab, std::size_t env_dim,
                              std::size_t env_state_index,
                              const std::string& env_label = "E") {
  if (env_state_index >= env_dim)
    throw Error(Errc::IndexOutOfRange, "environment state index out of range");
  const SpaceLayout out =
      SpaceLayout::concat(rho_ab.layout, single_factor(env_label, env_dim));
  const ComplexMatrix r1 =
      tensor(identity(static_cast<Index>(rho_ab.dim())),
             basis_column(static_cast<Index>(env_dim), static_cast<Index>(env_state_index)));
  KrausChannel ch = validate_channel({r1}, rho_ab.layout, out);
  DensityMatrix env = basis_state(single_factor(env_label, env_dim), env_state_index);
  DensityMatrix target = tensor_states(rho_ab, env);
  return make_assignment(std::move(ch), rho_ab, std::move(target));
}

// Petz construction for a two-factor state (kept, env): Kraus
// K_i = ρ_BE^{1/2} (ρ_B^{-1/2} ⊗ |i_E>). Exact on ρ_B and trace preserving on
// its support; when ρ_B is rank deficient the channel is completed with
// (I - Π) ⊗ |0_E> so the Kraus family is CPTP on the whole space.
inline AssignmentMap petz_assignment(const DensityMatrix& rho_be) {
  if (rho_be.layout.size() != 2)
    throw Error(Errc::LayoutMismatch, "petz_assignment expects a two-factor layout");
  const std::string kept = rho_be.layout[0].label;
  const Index d_b = static_cast<Index>(rho_be.layout[0].dim);
  const Index d_e = static_cast<Index>(rho_be.layout[1].dim);

  const DensityMatrix rho_b = marginal(rho_be, {kept});
  const ComplexMatrix sqrt_be = psd_sqrt(rho_be.mat);
  const ComplexMatrix pinv_b = psd_pinv_sqrt(rho_b.mat);
  const ComplexMatrix proj = support_projector(rho_b.mat);

  std::vector<ComplexMatrix> kraus;
  kraus.reserve(d_e + 1);
  for (Index i = 0; i < d_e; ++i)
    kraus.push_back(sqrt_be * tensor(pinv_b, basis_column(d_e, i)));
  if (max_abs(identity(d_b) - proj) > 1e-9)
    kraus.push_back(tensor(identity(d_b) - proj, basis_column(d_e, 0)));

  KrausChannel ch =
      validate_channel(std::move(kraus), rho_b.layout, rho_be.layout, 1e-9);
  return make_assignment(std::move(ch), rho_b, rho_be, proj);
}

// Prepare-the-target assignment: Λ(X) = Tr(X)·ρ_target, a valid CP assignment
// for any target. Kraus √λ_u |ψ_u><e_v| over the target eigenbasis and a
// source basis.
inline AssignmentMap state_preparation_assignment(const DensityMatrix& target,
                                                  const std::vector<std::string>& src_labels) {
  const DensityMatrix source = marginal(target, src_labels);
  const SpaceLayout src_layout = source.layout;
  // assignment channels extend the source space; source factors must lead
  for (std::size_t i = 0; i < src_layout.size(); ++i)
    if (target.layout[i].label != src_layout[i].label)
      throw Error(Errc::LayoutMismatch, "source factors must be leading in the target layout");

  const Index d_src = static_cast<Index>(source.dim());
  EighResult e = eigh(target.mat);
  std::vector<ComplexMatrix> kraus;
  for (Index u = 0; u < e.eigenvalues.size(); ++u) {
    const double lam = e.eigenvalues(u);
    if (lam < tol::support_cutoff) continue;
    for (Index v = 0; v < d_src; ++v)
      kraus.push_back(std::sqrt(lam) * e.eigenvectors.col(u) * basis_column(d_src, v).adjoint());
  }
  KrausChannel ch = validate_channel(std::move(kraus), src_layout, target.layout);
  return make_assignment(std::move(ch), source, target);
}

// <k| contraction of the trailing factor: rows (r, k) -> r.
inline ComplexMatrix contract_trailing(const ComplexMatrix& m, std::size_t d_trail,
                                       std::size_t k) {
  if (d_trail == 0 || m.rows() % static_cast<Index>(d_trail) != 0)
    throw Error(Errc::ShapeMismatch, "contract_trailing: rows not divisible");
  if (k >= d_trail) throw Error(Errc::IndexOutOfRange, "contract_trailing index");
  const Index r = m.rows() / static_cast<Index>(d_trail);
  ComplexMatrix out(r, m.cols());
  for (Index i = 0; i < r; ++i)
    out.row(i) = m.row(i * static_cast<Index>(d_trail) + static_cast<Index>(k));
  return out;
}

// Outcome of the direct-reduction analysis: the contracted operators
// X_jkl = <k_E'| (I_A ⊗ f_j) R_l, their distance to the I_A ⊗ Ē form, and the
// operator-basis decomposition R_l = Σ_m A_m ⊗ B_lm over the Weyl basis of A.
struct DirectReductionReport {
  struct Entry {
    std::size_t j, k, l;
    double residual;
  };
  std::vector<Entry> entries;
  std::vector<ComplexMatrix> x_operators;  // parallel to entries
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool verdict = false;
  double x_completeness_residual = 0.0;  // Σ X†X vs I_AB
  std::optional<std::vector<ComplexMatrix>> extracted_kraus;  // parallel, when verdict
  std::vector<std::vector<ComplexMatrix>> basis_coefficients;  // [l][m], B_lm
  std::vector<double> off_identity_masses;  // per l: Σ_{m≠0} ||B_lm||_F
  double off_identity_mass = 0.0;           // max over l
};

// Tests whether the localized dynamics `ch` (already lifted: every Kraus is
// I_A ⊗ f_j with A the leading factor of dimension d_a) composed with the
// assignment reduces directly: every X_jkl factorizes as I_A ⊗ Ē_jkl.
inline DirectReductionReport direct_reduction(const AssignmentMap& assign,
                                              const KrausChannel& ch, std::size_t d_a,
                                              double tolerance = 1e-8) {
  if (assign.channel.out_layout != ch.in_layout)
    throw Error(Errc::LayoutMismatch,
                "assignment output " + assign.channel.out_layout.to_string() +
                    " does not feed channel input " + ch.in_layout.to_string());
  const SpaceLayout& out = ch.out_layout;
  const std::size_t d_eprime = out[out.size() - 1].dim;
  const Index d_src = static_cast<Index>(assign.channel.d_in());

  DirectReductionReport rep;
  rep.tolerance = tolerance;

  ComplexMatrix completeness = ComplexMatrix::Zero(d_src, d_src);
  for (std::size_t j = 0; j < ch.kraus.size(); ++j) {
    for (std::size_t l = 0; l < assign.channel.kraus.size(); ++l) {
      const ComplexMatrix n_jl = ch.kraus[j] * assign.channel.kraus[l];
      for (std::size_t k = 0; k < d_eprime; ++k) {
        ComplexMatrix x = contract_trailing(n_jl, d_eprime, k);
        completeness += x.adjoint() * x;
        FactorOutResult f = factor_out_identity(x, d_a);
        rep.max_residual = std::max(rep.max_residual, f.residual);
        rep.entries.push_back({j, k, l, f.residual});
        rep.x_operators.push_back(std::move(x));
      }
    }
  }
  rep.x_completeness_residual = max_abs(completeness - identity(d_src));
  rep.verdict = rep.max_residual <= tolerance;

  // operator-basis decomposition of each assignment Kraus over Weyl(d_A)
  const OperatorBasis basis = weyl_basis(d_a);
  const Index rest_rows = static_cast<Index>(assign.channel.d_out() / d_a);
  for (const auto& r_l : assign.channel.kraus) {
    std::vector<ComplexMatrix> coeffs;
    double mass = 0.0;
    for (std::size_t m = 0; m < basis.elements.size(); ++m) {
      const ComplexMatrix lifted_basis = tensor(basis.elements[m].adjoint(), identity(rest_rows));
      ComplexMatrix b_lm = trace_out_leading(lifted_basis * r_l, d_a) / static_cast<double>(d_a);
      if (m != 0) mass += frobenius_norm(b_lm);
      coeffs.push_back(std::move(b_lm));
    }
    rep.off_identity_masses.push_back(mass);
    rep.off_identity_mass = std::max(rep.off_identity_mass, mass);
    rep.basis_coefficients.push_back(std::move(coeffs));
  }

  if (rep.verdict) {
    std::vector<ComplexMatrix> extracted;
    extracted.reserve(rep.x_operators.size());
    for (const auto& x : rep.x_operators)
      extracted.push_back(factor_out_identity(x, d_a).candidate);
    rep.extracted_kraus = std::move(extracted);
  }
  return rep;
}

// Identity plus the d_E² Weyl conjugations on E (tensored with identity on B):
// unitary localized channels whose adjoint vectors span H_B ⊗ H_E, enough to
// certify the operator-basis nullity behind a direct-reduction verdict.
inline std::vector<KrausChannel> probe_channel_family(const SpaceLayout& be_layout) {
  if (be_layout.size() != 2)
    throw Error(Errc::LayoutMismatch, "probe family expects a (B,E) layout");
  const Index d_b = static_cast<Index>(be_layout[0].dim);
  const std::size_t d_e = be_layout[1].dim;
  std::vector<KrausChannel> family;
  family.push_back(identity_channel(be_layout));
  for (const auto& u : weyl_basis(d_e).elements)
    family.push_back(unitary_channel(tensor(identity(d_b), u), be_layout));
  return family;
}

}  // namespace qmarkov
