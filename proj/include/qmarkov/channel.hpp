#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qmarkov/density.hpp"
#include "qmarkov/tensor.hpp"

namespace qmarkov {

// CPTP map in Kraus form. Operators are d_out x d_in; completeness
// Σ_j f_j† f_j = I is enforced at validation and its residual retained so
// downstream consumers can scale trace tolerances.
struct KrausChannel {
  std::vector<ComplexMatrix> kraus;
  SpaceLayout in_layout;
  SpaceLayout out_layout;
  double completeness_residual = 0.0;

  std::size_t d_in() const { return in_layout.total_dim(); }
  std::size_t d_out() const { return out_layout.total_dim(); }
};

inline KrausChannel validate_channel(std::vector<ComplexMatrix> kraus,
                                     const SpaceLayout& in_layout,
                                     const SpaceLayout& out_layout,
                                     double completeness_tol = tol::completeness) {
  if (kraus.empty()) throw Error(Errc::InvalidArgument, "channel needs at least one Kraus operator");
  const Index d_in = static_cast<Index>(in_layout.total_dim());
  const Index d_out = static_cast<Index>(out_layout.total_dim());
  ComplexMatrix sum = ComplexMatrix::Zero(d_in, d_in);
  for (const auto& f : kraus) {
    require_finite(f, "validate_channel");
    if (f.rows() != d_out || f.cols() != d_in)
      throw Error(Errc::ShapeMismatch,
                  "Kraus operator is " + std::to_string(f.rows()) + "x" +
                      std::to_string(f.cols()) + ", expected " + std::to_string(d_out) + "x" +
                      std::to_string(d_in));
    sum += f.adjoint() * f;
  }
  const double residual = max_abs(sum - ComplexMatrix::Identity(d_in, d_in));
  if (residual > completeness_tol)
    throw Error(Errc::NotTracePreserving,
                "completeness residual " + std::to_string(residual));
  KrausChannel ch;
  ch.kraus = std::move(kraus);
  ch.in_layout = in_layout;
  ch.out_layout = out_layout;
  ch.completeness_residual = residual;
  return ch;
}

inline KrausChannel identity_channel(const SpaceLayout& layout) {
  return validate_channel({identity(static_cast<Index>(layout.total_dim()))}, layout, layout);
}

inline KrausChannel unitary_channel(const ComplexMatrix& u, const SpaceLayout& in_layout,
                                    const SpaceLayout& out_layout) {
  return validate_channel({u}, in_layout, out_layout);
}

inline KrausChannel unitary_channel(const ComplexMatrix& u, const SpaceLayout& layout) {
  return unitary_channel(u, layout, layout);
}

// Swap of two equal-dimension factors, U|b,e> = |e,b>, as a unitary channel.
inline KrausChannel swap_channel(const SpaceLayout& layout) {
  if (layout.size() != 2 || layout[0].dim != layout[1].dim)
    throw Error(Errc::LayoutMismatch, "swap_channel needs two equal-dimension factors");
  const std::size_t d = layout[0].dim;
  ComplexMatrix u = ComplexMatrix::Zero(d * d, d * d);
  for (std::size_t b = 0; b < d; ++b)
    for (std::size_t e = 0; e < d; ++e) u(e * d + b, b * d + e) = 1.0;
  SpaceLayout out({{layout[0].label, d}, {layout[1].label, d}});
  return unitary_channel(u, layout, out);
}

// Tr over the given factors realized as a channel with Kraus {I ⊗ <i|}.
inline KrausChannel trace_out_channel(const SpaceLayout& layout,
                                      const std::vector<std::string>& traced) {
  const SpaceLayout out = layout.without(traced);
  const SpaceLayout traced_layout = layout.sublayout(traced);
  // reorder so the kept factors are leading, traced trailing
  std::vector<std::string> order = out.labels();
  for (const auto& l : traced_layout.labels()) order.push_back(l);
  const ComplexMatrix p = permutation_matrix(layout, order);
  const Index dk = static_cast<Index>(out.total_dim());
  const Index dt = static_cast<Index>(traced_layout.total_dim());
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(dt);
  for (Index i = 0; i < dt; ++i) {
    ComplexMatrix k = tensor(identity(dk), basis_column(dt, i).adjoint()) * p;
    kraus.push_back(std::move(k));
  }
  return validate_channel(std::move(kraus), layout, out);
}

// Σ_j f_j ρ f_j† on the output layout.
inline DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho) {
  if (rho.layout != ch.in_layout)
    throw Error(Errc::LayoutMismatch, "state layout " + rho.layout.to_string() +
                                          " does not match channel input " +
                                          ch.in_layout.to_string());
  const Index d_out = static_cast<Index>(ch.d_out());
  ComplexMatrix out = ComplexMatrix::Zero(d_out, d_out);
  for (const auto& f : ch.kraus) out += f * rho.mat * f.adjoint();
  DensityTolerances t;
  t.trace_one = std::max(tol::trace_one, 10.0 * ch.completeness_residual);
  return validate_density(out, ch.out_layout, t);
}

// Lift a channel acting on a subset of factors to the full space, the
// untouched factors carrying the identity. The output layout keeps the
// spectators in place and splices the channel's output factors in at the
// position of the first acted factor.
inline KrausChannel lift_localized(const KrausChannel& ch, const SpaceLayout& full_layout) {
  const auto acted = ch.in_layout.labels();
  for (const auto& l : acted)
    if (!full_layout.has(l) || full_layout.dim_of(l) != ch.in_layout.dim_of(l))
      throw Error(Errc::LayoutMismatch, "acted factor '" + l + "' missing or of wrong dim");

  const SpaceLayout spect = full_layout.without(acted);
  for (const auto& l : ch.out_layout.labels())
    if (spect.has(l))
      throw Error(Errc::LayoutMismatch, "output label '" + l + "' collides with a spectator");

  // input permutation: (spectators..., acted in channel order)
  std::vector<std::string> in_order = spect.labels();
  in_order.insert(in_order.end(), acted.begin(), acted.end());
  const ComplexMatrix p_in = permutation_matrix(full_layout, in_order);

  // final output order: walk the full layout; at the first acted factor emit
  // all channel output factors, skip the remaining acted factors
  std::vector<SpaceLayout::Factor> out_factors;
  bool emitted = false;
  for (const auto& f : full_layout.factors()) {
    if (std::find(acted.begin(), acted.end(), f.label) != acted.end()) {
      if (!emitted) {
        for (const auto& of : ch.out_layout.factors()) out_factors.push_back(of);
        emitted = true;
      }
    } else {
      out_factors.push_back(f);
    }
  }
  const SpaceLayout out_layout(std::move(out_factors));

  // the raw lifted operator produces (spectators..., channel outputs...)
  SpaceLayout raw_out = SpaceLayout::concat(spect, ch.out_layout);
  const ComplexMatrix p_out = permutation_matrix(raw_out, out_layout.labels());

  const ComplexMatrix i_spect = identity(static_cast<Index>(spect.total_dim()));
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(ch.kraus.size());
  for (const auto& f : ch.kraus) kraus.push_back(p_out * tensor(i_spect, f) * p_in);
  return validate_channel(std::move(kraus), full_layout, out_layout,
                          std::max(tol::completeness, 10.0 * ch.completeness_residual));
}

// Kraus set {g_i f_j}; completeness relaxes to the composed tolerance.
inline KrausChannel compose(const KrausChannel& second, const KrausChannel& first) {
  if (first.out_layout != second.in_layout)
    throw Error(Errc::LayoutMismatch, "compose: inner layouts differ (" +
                                          first.out_layout.to_string() + " vs " +
                                          second.in_layout.to_string() + ")");
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(first.kraus.size() * second.kraus.size());
  for (const auto& g : second.kraus)
    for (const auto& f : first.kraus) {
      ComplexMatrix gf = g * f;
      if (frobenius_norm(gf) <= 1e-12) continue;  // zero-weight products
      kraus.push_back(std::move(gf));
    }
  return validate_channel(std::move(kraus), first.in_layout, second.out_layout,
                          tol::completeness_composed);
}

// Frobenius-orthogonal projection of x onto {I_dA ⊗ Y}: the candidate is
// (1/d_A)·Tr_A(x) and the residual is the exact distance to that subspace.
struct FactorOutResult {
  ComplexMatrix candidate;
  double residual = 0.0;

  bool passes(double tolerance) const { return residual <= tolerance; }
};

inline FactorOutResult factor_out_identity(const ComplexMatrix& x, std::size_t d_a) {
  if (d_a == 0 || x.rows() % static_cast<Index>(d_a) != 0 ||
      x.cols() % static_cast<Index>(d_a) != 0)
    throw Error(Errc::ShapeMismatch, "factor_out_identity: dims not divisible by d_A");
  FactorOutResult r;
  r.candidate = trace_out_leading(x, d_a) / static_cast<double>(d_a);
  r.residual = frobenius_norm(x - tensor(identity(static_cast<Index>(d_a)), r.candidate));
  return r;
}

}  // namespace qmarkov
