#include <catch2/catch_amalgamated.hpp>

#include "qmarkov/markov.hpp"

using namespace qmarkov;

namespace {

DensityMatrix example4_state(Rng& rng) {
  DensityMatrix rho_b = random_density(single_factor("B", 2), 2, rng);
  return permuted(tensor_states(rho_b, max_entangled("A", "E", 2)), {"A", "B", "E"});
}

}  // namespace

TEST_CASE("xi_embed") {
  DensityMatrix bell = max_entangled("A", "B", 2);
  AssignmentMap am = xi_embed(bell, 2, 0);

  ComplexMatrix e0 = zeros(2, 2);
  e0(0, 0) = 1.0;
  REQUIRE(max_abs(am.target.mat - tensor(bell.mat, e0)) < 1e-14);
  REQUIRE(am.channel.kraus.size() == 1);
  REQUIRE(max_abs(am.channel.kraus[0].adjoint() * am.channel.kraus[0] - identity(4)) == 0.0);
  REQUIRE(trace_distance(marginal(am.target, {"A", "B"}), bell) < 1e-12);

  REQUIRE_THROWS_AS(xi_embed(bell, 2, 2), Error);
}

TEST_CASE("petz_assignment reproduces its defining state") {
  Rng rng(61);
  SpaceLayout be({{"B", 2}, {"E", 2}});
  for (int t = 0; t < 100; ++t) {
    std::uniform_int_distribution<std::size_t> rank(1, 4);
    DensityMatrix rho_be = random_density(be, rank(rng), rng);
    AssignmentMap petz = petz_assignment(rho_be);
    REQUIRE(trace_distance(apply_assignment(petz, petz.source), rho_be) <= 1e-9);
  }
}

TEST_CASE("petz_assignment of a product state is the constant-attach map") {
  Rng rng(62);
  DensityMatrix rho_b = random_density(single_factor("B", 3), 3, rng);  // full rank
  DensityMatrix omega = random_density(single_factor("E", 2), 2, rng);
  AssignmentMap petz = petz_assignment(tensor_states(rho_b, omega));

  DensityMatrix other = random_density(single_factor("B", 3), 3, rng);
  DensityMatrix out = apply_assignment(petz, other);
  REQUIRE(trace_distance(out.mat, tensor(other.mat, omega.mat)) <= 1e-10);
}

TEST_CASE("petz_assignment on a pure product state and support reporting") {
  SpaceLayout be({{"B", 2}, {"E", 2}});
  DensityMatrix zz = basis_state(be, 0);  // |00><00|
  AssignmentMap petz = petz_assignment(zz);
  REQUIRE(trace_distance(apply_assignment(petz, petz.source), zz) <= 1e-12);

  // weight outside supp ρ_B is reported, not silently projected
  DensityMatrix mixed = maximally_mixed(single_factor("B", 2));
  REQUIRE_THROWS_MATCHES(apply_assignment(petz, mixed), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("SupportMismatch")));

  // the completed channel is CPTP on the whole space regardless
  ComplexMatrix sum = zeros(2, 2);
  for (const auto& k : petz.channel.kraus) sum += k.adjoint() * k;
  REQUIRE(max_abs(sum - identity(2)) <= 1e-9);
}

TEST_CASE("state_preparation_assignment") {
  Rng rng(63);
  DensityMatrix target = random_density(SpaceLayout({{"A", 2}, {"B", 2}, {"E", 2}}), 8, rng);
  AssignmentMap am = state_preparation_assignment(target, {"A", "B"});
  REQUIRE(trace_distance(apply(am.channel, am.source), target) <= 1e-10);

  // it prepares the target from anything
  DensityMatrix other = random_density(SpaceLayout({{"A", 2}, {"B", 2}}), 4, rng);
  REQUIRE(trace_distance(apply(am.channel, other), target) <= 1e-10);
}

TEST_CASE("direct_reduction accepts markov assignments") {
  Rng rng(64);
  for (int t = 0; t < 30; ++t) {
    MarkovDecomposition d = random_markov_decomposition(2, 2, rng);
    AssignmentMap am = localized_assignment_from_markov(d);
    const SpaceLayout abe = am.target.layout;
    const SpaceLayout be = abe.sublayout({"B", "E"});
    for (int c = 0; c < 5; ++c) {
      KrausChannel ch = random_cptp(be, be, 3, rng);
      DirectReductionReport rep = direct_reduction(am, lift_localized(ch, abe), 2);
      REQUIRE(rep.verdict);
      REQUIRE(rep.max_residual <= 1e-8);
      REQUIRE(rep.off_identity_mass <= 1e-8);
      REQUIRE(rep.x_completeness_residual <= 1e-9);
      REQUIRE(rep.extracted_kraus.has_value());
    }
  }
}

TEST_CASE("direct_reduction basis reconstruction") {
  Rng rng(65);
  MarkovDecomposition d = random_markov_decomposition(2, 2, rng);
  AssignmentMap am = localized_assignment_from_markov(d);
  const SpaceLayout abe = am.target.layout;
  const SpaceLayout be = abe.sublayout({"B", "E"});
  DirectReductionReport rep =
      direct_reduction(am, lift_localized(identity_channel(be), abe), 2);

  OperatorBasis basis = weyl_basis(2);
  for (std::size_t l = 0; l < am.channel.kraus.size(); ++l) {
    ComplexMatrix rebuilt = zeros(am.channel.kraus[l].rows(), am.channel.kraus[l].cols());
    for (std::size_t m = 0; m < basis.elements.size(); ++m)
      rebuilt += tensor(basis.elements[m], rep.basis_coefficients[l][m]);
    REQUIRE(max_abs(rebuilt - am.channel.kraus[l]) < 1e-10);
  }
}

TEST_CASE("direct_reduction rejects the entangled-environment assignment") {
  Rng rng(66);
  DensityMatrix rho_abe = example4_state(rng);
  AssignmentMap am = state_preparation_assignment(rho_abe, {"A", "B"});
  const SpaceLayout be = rho_abe.layout.sublayout({"B", "E"});

  DirectReductionReport rep =
      direct_reduction(am, lift_localized(swap_channel(be), rho_abe.layout), 2);
  REQUIRE(!rep.verdict);
  REQUIRE(rep.off_identity_mass > 1e-3);
  REQUIRE(rep.x_completeness_residual <= 1e-9);
}

TEST_CASE("xi_embed assignments reduce directly for any channel") {
  Rng rng(67);
  DensityMatrix ra = random_density(single_factor("A", 2), 2, rng);
  DensityMatrix rb = random_density(single_factor("B", 2), 2, rng);
  AssignmentMap am = xi_embed(tensor_states(ra, rb), 2, 0);
  const SpaceLayout abe = am.target.layout;
  const SpaceLayout be = abe.sublayout({"B", "E"});
  for (int c = 0; c < 10; ++c) {
    KrausChannel ch = random_cptp(be, be, 4, rng);
    DirectReductionReport rep = direct_reduction(am, lift_localized(ch, abe), 2);
    REQUIRE(rep.verdict);
  }
}

TEST_CASE("probe channel family is tomographically conclusive") {
  Rng rng(68);
  SpaceLayout be({{"B", 2}, {"E", 2}});
  std::vector<KrausChannel> family = probe_channel_family(be);
  REQUIRE(family.size() == 5);  // identity + 4 Weyl conjugations

  // Markov assignment: every family member returns a true verdict and the
  // off-identity mass vanishes
  MarkovDecomposition d;
  do {
    d = random_markov_decomposition(2, 2, rng);
  } while (d.d_b() != 2);
  AssignmentMap markov_am = localized_assignment_from_markov(d);
  bool all_true = true;
  for (const auto& ch : family) {
    DirectReductionReport rep =
        direct_reduction(markov_am, lift_localized(ch, markov_am.target.layout), 2);
    all_true = all_true && rep.verdict;
    REQUIRE(rep.off_identity_mass <= 1e-6);
  }
  REQUIRE(all_true);

  // non-markov assignment: some family member must refuse
  DensityMatrix rho_abe = example4_state(rng);
  AssignmentMap bad = state_preparation_assignment(rho_abe, {"A", "B"});
  bool any_false = false;
  double mass = 0.0;
  for (const auto& ch : family) {
    DirectReductionReport rep =
        direct_reduction(bad, lift_localized(ch, rho_abe.layout), 2);
    any_false = any_false || !rep.verdict;
    mass = std::max(mass, rep.off_identity_mass);
  }
  REQUIRE(any_false);
  REQUIRE(mass > 1e-6);
}

TEST_CASE("theorem 2 contrapositive via random channel sweep") {
  Rng rng(69);
  DensityMatrix rho_abe = example4_state(rng);
  AssignmentMap bad = state_preparation_assignment(rho_abe, {"A", "B"});
  const SpaceLayout be = rho_abe.layout.sublayout({"B", "E"});
  REQUIRE(bad.channel.kraus.size() > 0);

  DirectReductionReport probe =
      direct_reduction(bad, lift_localized(identity_channel(be), rho_abe.layout), 2);
  REQUIRE(probe.off_identity_mass > 1e-6);

  bool any_false = false;
  for (int c = 0; c < 50 && !any_false; ++c) {
    KrausChannel ch = random_cptp(be, be, 3, rng);
    DirectReductionReport rep = direct_reduction(bad, lift_localized(ch, rho_abe.layout), 2);
    any_false = !rep.verdict;
  }
  REQUIRE(any_false);
}
