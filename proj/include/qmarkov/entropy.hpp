#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qmarkov/density.hpp"

namespace qmarkov {

namespace tol {
inline constexpr double entropy_floor = 1e-12;  // eigenvalues below are skipped
}

// Von Neumann entropy in bits: -Σ λ log2 λ with 0·log 0 := 0.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  EighResult e = eigh(rho.mat);
  double s = 0.0;
  for (Index i = 0; i < e.eigenvalues.size(); ++i) {
    const double lam = e.eigenvalues(i);
    if (lam < tol::entropy_floor) continue;
    s -= lam * std::log2(lam);
  }
  return s;
}

namespace detail {

inline void require_partition(const SpaceLayout& layout,
                              const std::vector<std::vector<std::string>>& parts) {
  std::vector<std::string> seen;
  for (const auto& part : parts)
    for (const auto& l : part) {
      layout.index_of(l);
      if (std::find(seen.begin(), seen.end(), l) != seen.end())
        throw Error(Errc::InvalidArgument, "overlapping partition at label '" + l + "'");
      seen.push_back(l);
    }
  if (seen.size() != layout.size())
    throw Error(Errc::InvalidArgument, "partition does not cover the layout");
}

inline std::vector<std::string> join(const std::vector<std::string>& a,
                                     const std::vector<std::string>& b) {
  std::vector<std::string> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace detail

// I(1:2) = S(ρ_1) + S(ρ_2) - S(ρ_12), in bits.
inline double mutual_information(const DensityMatrix& rho, const std::vector<std::string>& part1,
                                 const std::vector<std::string>& part2) {
  detail::require_partition(rho.layout, {part1, part2});
  return von_neumann_entropy(marginal(rho, part1)) + von_neumann_entropy(marginal(rho, part2)) -
         von_neumann_entropy(rho);
}

// I(a:e|b) = S(ρ_ab) + S(ρ_be) - S(ρ_b) - S(ρ_abe), in bits.
inline double conditional_mutual_information(const DensityMatrix& rho,
                                             const std::vector<std::string>& a,
                                             const std::vector<std::string>& e,
                                             const std::vector<std::string>& b) {
  detail::require_partition(rho.layout, {a, e, b});
  return von_neumann_entropy(marginal(rho, detail::join(a, b))) +
         von_neumann_entropy(marginal(rho, detail::join(b, e))) -
         von_neumann_entropy(marginal(rho, b)) - von_neumann_entropy(rho);
}

struct EntropyReport {
  std::map<std::string, double> entropies;  // keyed by '+'-joined label sets
  double mutual_information = 0.0;
  std::optional<double> conditional_mutual_information;
};

namespace detail {
inline std::string set_key(const std::vector<std::string>& labels) {
  std::string k;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) k += "+";
    k += labels[i];
  }
  return k;
}
}  // namespace detail

// Entropies of the parts and their unions, I(part1:part2) when b is empty,
// otherwise I(part1:part2|b).
inline EntropyReport entropy_report(const DensityMatrix& rho,
                                    const std::vector<std::string>& part1,
                                    const std::vector<std::string>& part2,
                                    const std::vector<std::string>& b = {}) {
  EntropyReport rep;
  rep.entropies[detail::set_key(part1)] = von_neumann_entropy(marginal(rho, part1));
  rep.entropies[detail::set_key(part2)] = von_neumann_entropy(marginal(rho, part2));
  if (b.empty()) {
    rep.entropies[detail::set_key(rho.layout.labels())] = von_neumann_entropy(rho);
    rep.mutual_information = mutual_information(rho, part1, part2);
  } else {
    rep.entropies[detail::set_key(b)] = von_neumann_entropy(marginal(rho, b));
    rep.entropies[detail::set_key(rho.layout.labels())] = von_neumann_entropy(rho);
    rep.mutual_information =
        mutual_information(regroup(rho, {part1, detail::join(part2, b)}, {"p1", "p2b"}), {"p1"},
                           {"p2b"});
    rep.conditional_mutual_information = conditional_mutual_information(rho, part1, part2, b);
  }
  return rep;
}

}  // namespace qmarkov
