#include <catch2/catch_amalgamated.hpp>

#include "qmarkov/channel.hpp"
#include "qmarkov/entropy.hpp"
#include "qmarkov/random.hpp"

using namespace qmarkov;

TEST_CASE("validate_channel") {
  SpaceLayout b({{"B", 2}});
  KrausChannel id = validate_channel({identity(2)}, b, b);
  REQUIRE(id.completeness_residual < 1e-15);

  const double s = 1.0 / std::sqrt(2.0);
  KrausChannel mix = validate_channel({s * pauli::x(), s * pauli::z()}, b, b);
  REQUIRE(mix.kraus.size() == 2);

  REQUIRE_THROWS_MATCHES(validate_channel({pauli::x(), pauli::x()}, b, b), Error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("NotTracePreserving")));
  REQUIRE_THROWS_AS(validate_channel({identity(3)}, b, b), Error);
}

TEST_CASE("apply") {
  Rng rng(41);
  SpaceLayout b({{"B", 2}});
  DensityMatrix rho = random_density(b, 2, rng);
  DensityMatrix out = apply(identity_channel(b), rho);
  REQUIRE(max_abs(out.mat - rho.mat) < 1e-14);

  SpaceLayout be({{"B", 2}, {"E", 2}});
  DensityMatrix rb = random_density(single_factor("B", 2), 2, rng);
  DensityMatrix re = random_density(single_factor("E", 2), 2, rng);
  DensityMatrix swapped = apply(swap_channel(be), tensor_states(rb, re));
  REQUIRE(max_abs(swapped.mat - tensor(re.mat, rb.mat)) < 1e-14);

  // full dephasing of |+><+| is maximally mixed
  ComplexMatrix p0 = matrix_from_rows({{1, 0}, {0, 0}});
  ComplexMatrix p1 = matrix_from_rows({{0, 0}, {0, 1}});
  KrausChannel dephase = validate_channel({p0, p1}, b, b);
  ComplexMatrix plus = matrix_from_rows({{0.5, 0.5}, {0.5, 0.5}});
  DensityMatrix deph = apply(dephase, validate_density(plus, b));
  REQUIRE(max_abs(deph.mat - 0.5 * identity(2)) < 1e-14);

  REQUIRE_THROWS_AS(apply(dephase, tensor_states(rb, re)), Error);
}

TEST_CASE("apply preserves trace and positivity") {
  Rng rng(42);
  SpaceLayout in({{"B", 2}, {"E", 2}});
  SpaceLayout out({{"B", 3}, {"E", 2}});
  for (int t = 0; t < 40; ++t) {
    KrausChannel ch = random_cptp(in, out, 3, rng);
    DensityMatrix rho = random_density(in, 4, rng);
    DensityMatrix res = apply(ch, rho);
    REQUIRE(std::abs(res.mat.real().trace() - 1.0) < 1e-10);
    REQUIRE(eigh(res.mat).eigenvalues.minCoeff() >= -1e-9);
  }
}

TEST_CASE("lift_localized") {
  SpaceLayout abe({{"A", 2}, {"B", 2}, {"E", 2}});
  SpaceLayout be({{"B", 2}, {"E", 2}});
  Rng rng(43);

  KrausChannel lifted_id = lift_localized(identity_channel(be), abe);
  DensityMatrix rho = random_density(abe, 8, rng);
  REQUIRE(max_abs(apply(lifted_id, rho).mat - rho.mat) < 1e-13);

  DensityMatrix ra = random_density(single_factor("A", 2), 2, rng);
  DensityMatrix rb = random_density(single_factor("B", 2), 2, rng);
  DensityMatrix re = random_density(single_factor("E", 2), 2, rng);
  DensityMatrix prod = tensor_states(tensor_states(ra, rb), re);
  DensityMatrix swapped = apply(lift_localized(swap_channel(be), abe), prod);
  REQUIRE(max_abs(swapped.mat - tensor(tensor(ra.mat, re.mat), rb.mat)) < 1e-13);

  // dimension-changing lift: Kraus shape law
  SpaceLayout be_out({{"B", 3}, {"E", 2}});
  KrausChannel grow = random_cptp(be, be_out, 2, rng);
  KrausChannel lifted = lift_localized(grow, abe);
  REQUIRE(lifted.kraus[0].rows() == 2 * 3 * 2);
  REQUIRE(lifted.kraus[0].cols() == 2 * 2 * 2);
  REQUIRE(lifted.out_layout == SpaceLayout({{"A", 2}, {"B", 3}, {"E", 2}}));

  SpaceLayout xy({{"X", 2}, {"Y", 2}});
  REQUIRE_THROWS_AS(lift_localized(random_cptp(xy, xy, 2, rng), abe), Error);
}

TEST_CASE("lift then trace spectators commutes with local action on products") {
  Rng rng(44);
  SpaceLayout abe({{"A", 2}, {"B", 2}, {"E", 2}});
  SpaceLayout be({{"B", 2}, {"E", 2}});
  for (int t = 0; t < 20; ++t) {
    KrausChannel ch = random_cptp(be, be, 3, rng);
    DensityMatrix ra = random_density(single_factor("A", 2), 2, rng);
    DensityMatrix rbe = random_density(be, 4, rng);
    DensityMatrix big = apply(lift_localized(ch, abe), tensor_states(ra, rbe));
    DensityMatrix via_big = marginal(big, {"B", "E"});
    DensityMatrix direct = apply(ch, rbe);
    REQUIRE(trace_distance(via_big, direct) < 1e-10);
  }
}

TEST_CASE("compose") {
  Rng rng(45);
  SpaceLayout b({{"B", 2}});
  SpaceLayout be({{"B", 2}, {"E", 2}});

  KrausChannel ch = random_cptp(b, b, 3, rng);
  KrausChannel comp = compose(identity_channel(b), ch);
  for (std::size_t i = 0; i < 2; ++i) {
    DensityMatrix basis = basis_state(b, i);
    REQUIRE(trace_distance(apply(comp, basis), apply(ch, basis)) < 1e-12);
  }

  // embed into a fresh environment, then trace it out: identity on states
  ComplexMatrix embed_op = tensor(identity(2), basis_column(2, 0));
  KrausChannel embed = validate_channel({embed_op}, b, be);
  KrausChannel out_trace = trace_out_channel(be, {"E"});
  KrausChannel roundtrip = compose(out_trace, embed);
  for (int t = 0; t < 10; ++t) {
    DensityMatrix rho = random_density(b, 2, rng);
    REQUIRE(trace_distance(apply(roundtrip, rho), rho) < 1e-12);
  }

  KrausChannel c1 = random_cptp(b, be, 3, rng);
  KrausChannel c2 = random_cptp(be, b, 2, rng);
  KrausChannel c21 = compose(c2, c1);
  REQUIRE(c21.completeness_residual <= 1e-9);

  REQUIRE_THROWS_AS(compose(c1, c1), Error);
}

TEST_CASE("factor_out_identity") {
  FactorOutResult r1 = factor_out_identity(tensor(identity(2), pauli::x()), 2);
  REQUIRE(r1.residual < 1e-15);
  REQUIRE(max_abs(r1.candidate - pauli::x()) < 1e-15);

  FactorOutResult r2 = factor_out_identity(tensor(pauli::z(), identity(2)), 2);
  REQUIRE(max_abs(r2.candidate) < 1e-15);
  REQUIRE(r2.residual == Catch::Approx(2.0));

  Rng rng(46);
  ComplexMatrix m = ginibre(3, 2, rng);
  ComplexMatrix x = tensor(identity(2), m);
  x(0, 0) += 1e-12;
  FactorOutResult r3 = factor_out_identity(x, 2);
  REQUIRE(r3.residual <= 1e-11);
  REQUIRE(max_abs(r3.candidate - m) < 1e-11);

  REQUIRE_THROWS_AS(factor_out_identity(ginibre(3, 3, rng), 2), Error);
}

TEST_CASE("factor_out_identity residual vanishes for exact lifts") {
  Rng rng(47);
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<Index> dim(1, 4);
    ComplexMatrix m = ginibre(dim(rng), dim(rng), rng);
    FactorOutResult r = factor_out_identity(tensor(identity(3), m), 3);
    REQUIRE(r.residual <= 1e-12);
  }
}

TEST_CASE("mutual information monotone under local channels") {
  Rng rng(48);
  SpaceLayout ab({{"A", 2}, {"B", 2}});
  SpaceLayout b({{"B", 2}});
  for (int t = 0; t < 100; ++t) {
    DensityMatrix rho = random_density(ab, 4, rng);
    const bool grow = t % 5 == 0;
    SpaceLayout b_out({{"B", grow ? 4u : 2u}});
    KrausChannel ch = random_cptp(b, b_out, 3, rng);
    DensityMatrix rho_out = apply(lift_localized(ch, ab), rho);
    const double before = mutual_information(rho, {"A"}, {"B"});
    const double after = mutual_information(rho_out, {"A"}, {"B"});
    REQUIRE(after <= before + 1e-9);
  }
}
