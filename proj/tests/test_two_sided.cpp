#include <catch2/catch_amalgamated.hpp>

#include "qmarkov/two_sided.hpp"

using namespace qmarkov;

TEST_CASE("factorized product state is the one-block special case") {
  Rng rng(71);
  DensityMatrix rho_ab = random_density(SpaceLayout({{"A", 2}, {"B", 2}}), 4, rng);
  DensityMatrix rho_e = random_density(single_factor("E", 2), 2, rng);
  DensityMatrix rho = tensor_states(rho_ab, rho_e);

  TwoSidedDecomposition ts = check_two_sided(rho);
  REQUIRE(ts.fully_factorized);
  REQUIRE(ts.reassembly_primal <= 1e-8);
  REQUIRE(ts.reassembly_dual <= 1e-8);
}

TEST_CASE("two-block state with distinct environments") {
  Rng rng(72);
  // disconnected overlap pattern: A_1 pairs with B_1, A_2 with B_2, each
  // component carrying its own environment state
  TwoSidedBlock b1, b2;
  DensityMatrix j11 = random_density(SpaceLayout({{"a", 2}, {"B", 2}}), 4, rng);
  DensityMatrix j22 = random_density(SpaceLayout({{"a", 2}, {"B", 2}}), 4, rng);
  ComplexMatrix pad = zeros(4, 4);

  // B = B_1 ⊕ B_2 (two one-dim'l... use 2+2): block states supported on the
  // matching B half only
  ComplexMatrix inj1 = block_injection({2, 2}, 0);
  ComplexMatrix inj2 = block_injection({2, 2}, 1);
  ComplexMatrix e1 = tensor(identity(2), inj1);
  ComplexMatrix e2 = tensor(identity(2), inj2);
  b1.p = 0.6;
  b1.rho_ajb = validate_density(e1 * j11.mat * e1.adjoint(),
                                SpaceLayout({{"Aj", 2}, {"B", 4}}));
  b1.rho_e = random_density(single_factor("E", 2), 2, rng);
  b2.p = 0.4;
  b2.rho_ajb = validate_density(e2 * j22.mat * e2.adjoint(),
                                SpaceLayout({{"Aj", 2}, {"B", 4}}));
  b2.rho_e = random_density(single_factor("E", 2), 2, rng);

  DensityMatrix rho = build_two_sided({b1, b2}, identity(4));
  TwoSidedDecomposition ts = check_two_sided(rho);
  REQUIRE(ts.reassembly_primal <= 1e-8);
  REQUIRE(ts.reassembly_dual <= 1e-8);
  REQUIRE(!ts.fully_factorized);
}

TEST_CASE("random two-sided instances round trip in both forms") {
  Rng rng(73);
  int factorized_seen = 0;
  for (int t = 0; t < 25; ++t) {
    TwoSidedInstance inst = random_two_sided_instance(rng);
    DensityMatrix rho = build_two_sided(inst.blocks, inst.a_embedding);
    TwoSidedDecomposition ts = check_two_sided(rho);
    REQUIRE(ts.reassembly_primal <= 1e-8);
    REQUIRE(ts.reassembly_dual <= 1e-8);
    if (inst.fully_factorized) {
      REQUIRE(ts.fully_factorized);
      ++factorized_seen;
    }
  }
  REQUIRE(factorized_seen > 0);
}

TEST_CASE("one-sided Markov states are rejected") {
  // classical B flag read out by both A and E: Markov for the B-side role,
  // not for the A-side role
  ComplexMatrix a0 = matrix_from_rows({{1, 0}, {0, 0}});
  ComplexMatrix aplus = matrix_from_rows({{0.5, 0.5}, {0.5, 0.5}});
  ComplexMatrix e0 = matrix_from_rows({{1, 0}, {0, 0}});
  ComplexMatrix e1 = matrix_from_rows({{0, 0}, {0, 1}});

  ComplexMatrix acc = zeros(8, 8);
  // 0.5 |a0>(A) ⊗ |0><0|(B) ⊗ e0 + 0.5 |a+>(A) ⊗ |1><1|(B) ⊗ e1
  ComplexMatrix b0 = matrix_from_rows({{1, 0}, {0, 0}});
  ComplexMatrix b1 = matrix_from_rows({{0, 0}, {0, 1}});
  acc += 0.5 * tensor(tensor(a0, b0), e0);
  acc += 0.5 * tensor(tensor(aplus, b1), e1);
  DensityMatrix rho = validate_density(acc, SpaceLayout({{"A", 2}, {"B", 2}, {"E", 2}}));

  REQUIRE(is_markov(rho, {"A"}, {"B"}, {"E"}).markov);
  REQUIRE(!is_markov(permuted(rho, {"B", "A", "E"}), {"B"}, {"A"}, {"E"}).markov);
  REQUIRE_THROWS_MATCHES(check_two_sided(rho), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("NotTwoSidedMarkov")));
}

TEST_CASE("primal and dual forms assemble to the same state") {
  Rng rng(74);
  for (int t = 0; t < 10; ++t) {
    TwoSidedInstance inst = random_two_sided_instance(rng);
    DensityMatrix rho = build_two_sided(inst.blocks, inst.a_embedding);
    TwoSidedDecomposition ts = check_two_sided(rho);
    // both reassemble to the input within tolerance, so to each other too
    REQUIRE(ts.reassembly_primal + ts.reassembly_dual <= 2e-8);
  }
}

TEST_CASE("build_two_sided validates its inputs") {
  Rng rng(75);
  TwoSidedInstance inst = random_two_sided_instance(rng);
  inst.blocks.front().p += 0.1;
  REQUIRE_THROWS_AS(build_two_sided(inst.blocks, inst.a_embedding), Error);
}
