#include <catch2/catch_amalgamated.hpp>

#include "qmarkov/scenarios.hpp"

using namespace qmarkov;

namespace {

std::vector<ComplexMatrix> bell_basis() {
  const double s = 1.0 / std::sqrt(2.0);
  ComplexMatrix phi_p = zeros(4, 1), phi_m = zeros(4, 1), psi_p = zeros(4, 1),
                psi_m = zeros(4, 1);
  phi_p(0, 0) = phi_p(3, 0) = s;
  phi_m(0, 0) = s;
  phi_m(3, 0) = -s;
  psi_p(1, 0) = psi_p(2, 0) = s;
  psi_m(1, 0) = s;
  psi_m(2, 0) = -s;
  return {phi_p, phi_m, psi_p, psi_m};
}

}  // namespace

TEST_CASE("example 1: factorized states always reduce") {
  Rng rng(91);
  DensityMatrix bell = max_entangled("A", "B", 2);
  DensityMatrix omega = basis_state(single_factor("E", 2), 0);
  SpaceLayout be({{"B", 2}, {"E", 2}});
  KrausChannel u = unitary_channel(random_haar_unitary(4, rng), be);

  ScenarioReport rep = example1_factorized(bell, omega, u, 1234);
  REQUIRE(rep.verdicts.at("markov"));
  REQUIRE(rep.quantities.at("cmi") <= 1e-9);
  REQUIRE(rep.quantities.at("maxReductionCheck") <= 1e-8);

  // product input with the identity channel: everything collapses to zero
  DensityMatrix prod = tensor_states(random_density(single_factor("A", 2), 2, rng),
                                     random_density(single_factor("B", 2), 2, rng));
  ScenarioReport rep2 =
      example1_factorized(prod, random_density(single_factor("E", 2), 2, rng),
                          identity_channel(be), 77);
  REQUIRE(rep2.verdicts.at("markov"));
  REQUIRE(rep2.quantities.at("cmi") <= 1e-9);
}

TEST_CASE("example 2: classical flags vs entangled branches") {
  SpaceLayout ab({{"A", 2}, {"B", 2}});

  // |00>, |11> with orthogonal flags: the B value determines the branch
  ComplexMatrix v00 = basis_column(4, 0), v11 = basis_column(4, 3);
  std::vector<DensityMatrix> flags2 = {basis_state(single_factor("E", 2), 0),
                                       basis_state(single_factor("E", 2), 1)};
  ScenarioReport classical = example2_cq({0.5, 0.5}, {v00, v11}, ab, flags2);
  REQUIRE(classical.verdicts.at("markov"));
  REQUIRE(!classical.verdicts.at("anyEntangledBranch"));

  // Bell basis with four orthogonal pure flags: entangled branches, not Markov
  std::vector<DensityMatrix> flags4;
  for (std::size_t i = 0; i < 4; ++i)
    flags4.push_back(basis_state(single_factor("E", 4), i));
  ScenarioReport bell = example2_cq({0.25, 0.25, 0.25, 0.25}, bell_basis(), ab, flags4);
  REQUIRE(!bell.verdicts.at("markov"));
  REQUIRE(bell.verdicts.at("anyEntangledBranch"));
  REQUIRE(bell.quantities.at("cmi") > 0.9);

  // single branch reduces to the factorized case
  ScenarioReport single = example2_cq({1.0}, {bell_basis()[0]}, ab,
                                      {basis_state(single_factor("E", 2), 0)});
  REQUIRE(single.verdicts.at("markov"));

  REQUIRE_THROWS_AS(example2_cq({0.5, 0.5}, {v00, v00}, ab, flags2), Error);
}

TEST_CASE("example 3 variants") {
  ScenarioReport eq28 = example3_build(make_example3_input(Example3Variant::eq28, 11));
  REQUIRE(eq28.verdicts.at("markov"));
  REQUIRE(eq28.quantities.at("cmi") <= 1e-9);

  ScenarioReport fac =
      example3_build(make_example3_input(Example3Variant::eq29_factorized, 12));
  REQUIRE(fac.verdicts.at("markov"));

  ScenarioReport unfac =
      example3_build(make_example3_input(Example3Variant::eq29_unfactorized, 13));
  REQUIRE(!unfac.verdicts.at("markov"));
  REQUIRE(unfac.quantities.at("cmi") > 1e-3);
}

TEST_CASE("example 4: swap moves the AE state onto AB") {
  Rng rng(92);

  // ρ_AE = ρ_A ⊗ ω: Markov, localized reduction
  DensityMatrix ra = random_density(single_factor("A", 2), 2, rng);
  DensityMatrix omega = random_density(single_factor("E", 2), 2, rng);
  DensityMatrix rb = random_density(single_factor("B", 2), 2, rng);
  ScenarioReport rep = example4_swap(rb, tensor_states(ra, omega));
  REQUIRE(rep.verdicts.at("markov"));
  REQUIRE(rep.verdicts.at("localizedReduction"));
  REQUIRE(rep.verdicts.at("internal_invariants_ok"));

  // ρ_AE = Φ+: the textbook witness
  ScenarioReport bell = example4_swap(maximally_mixed(single_factor("B", 2)),
                                      max_entangled("A", "E", 2));
  REQUIRE(bell.quantities.at("miBefore") == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(bell.quantities.at("miAfter") == Catch::Approx(2.0).margin(1e-9));
  REQUIRE(bell.quantities.at("deltaMi") == Catch::Approx(2.0).margin(1e-9));
  REQUIRE(bell.quantities.at("cmi") == Catch::Approx(2.0).margin(1e-9));
  REQUIRE(!bell.verdicts.at("localizedReduction"));
  REQUIRE(!bell.verdicts.at("markov"));
  REQUIRE(bell.verdicts.at("internal_invariants_ok"));

  // classically correlated ρ_AE: one bit of gained mutual information
  ComplexMatrix cc = zeros(4, 4);
  cc(0, 0) = cc(3, 3) = 0.5;
  DensityMatrix classical = validate_density(cc, SpaceLayout({{"A", 2}, {"E", 2}}));
  ScenarioReport ccrep = example4_swap(rb, classical);
  REQUIRE(ccrep.quantities.at("deltaMi") == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(!ccrep.verdicts.at("localizedReduction"));

  REQUIRE_THROWS_AS(example4_swap(maximally_mixed(single_factor("B", 3)),
                                  max_entangled("A", "E", 2)),
                    Error);
}

TEST_CASE("witness search") {
  Rng rng(93);

  // assembled Markov state: no witness in the sweep
  MarkovDecomposition d = random_markov_decomposition(2, 2, rng);
  ScenarioReport none = witness_search(assemble(d), 20, 555);
  REQUIRE(!none.verdicts.at("witnessFound"));
  REQUIRE(none.quantities.at("maxDeltaMi") <= 1e-9);
  REQUIRE(none.verdicts.at("inconclusiveIfNoWitness"));

  // the Bell scenario: swap in the sweep attains two bits
  DensityMatrix rho_b = random_density(single_factor("B", 2), 2, rng);
  DensityMatrix nonmarkov =
      permuted(tensor_states(rho_b, max_entangled("A", "E", 2)), {"A", "B", "E"});
  ScenarioReport found = witness_search(nonmarkov, 10, 556);
  REQUIRE(found.verdicts.at("witnessFound"));
  REQUIRE(found.quantities.at("maxDeltaMi") >= 2.0 - 1e-9);

  // fully product state: A carries no information at all
  DensityMatrix prod = tensor_states(
      tensor_states(random_density(single_factor("A", 2), 2, rng), rho_b),
      random_density(single_factor("E", 2), 2, rng));
  ScenarioReport quiet = witness_search(prod, 10, 557);
  REQUIRE(!quiet.verdicts.at("witnessFound"));
}

TEST_CASE("scenario reports are deterministic") {
  Rng rng(94);
  MarkovDecomposition d = random_markov_decomposition(2, 2, rng);
  DensityMatrix rho = assemble(d);
  ScenarioReport r1 = witness_search(rho, 15, 999);
  ScenarioReport r2 = witness_search(rho, 15, 999);
  REQUIRE(r1.quantities == r2.quantities);
  REQUIRE(r1.verdicts == r2.verdicts);
  REQUIRE(r1.inputs == r2.inputs);
}
