#include <catch2/catch_amalgamated.hpp>

#include "qmarkov/linalg.hpp"
#include "qmarkov/random.hpp"
#include "qmarkov/tensor.hpp"
#include "qmarkov/weyl.hpp"

using namespace qmarkov;

namespace {

ComplexMatrix dyadic_matrix(Index rows, Index cols, Rng& rng) {
  std::uniform_int_distribution<int> num(-15, 15);
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j)
      m(i, j) = cplx(num(rng) / 16.0, num(rng) / 16.0);
  return m;
}

ComplexMatrix random_hermitian(Index d, Rng& rng) {
  ComplexMatrix g = ginibre(d, d, rng);
  return hermitian_part(g);
}

}  // namespace

TEST_CASE("tensor product basics") {
  REQUIRE(max_abs(tensor(identity(2), identity(2)) - identity(4)) == 0.0);

  // sigma_x ⊗ |0><0|, expanded by hand
  ComplexMatrix proj0 = matrix_from_rows({{1, 0}, {0, 0}});
  ComplexMatrix t = tensor(pauli::x(), proj0);
  ComplexMatrix expected = zeros(4, 4);
  expected(0, 2) = 1.0;
  expected(2, 0) = 1.0;
  REQUIRE(max_abs(t - expected) == 0.0);

  Rng rng(11);
  ComplexMatrix a = ginibre(2, 3, rng), b = ginibre(4, 5, rng);
  ComplexMatrix ab = tensor(a, b);
  REQUIRE(ab.rows() == 8);
  REQUIRE(ab.cols() == 15);
}

TEST_CASE("tensor associativity") {
  Rng rng(12);
  // dyadic entries make all products exactly representable
  ComplexMatrix a = dyadic_matrix(2, 2, rng);
  ComplexMatrix b = dyadic_matrix(3, 2, rng);
  ComplexMatrix c = dyadic_matrix(2, 3, rng);
  REQUIRE(max_abs(tensor(tensor(a, b), c) - tensor(a, tensor(b, c))) == 0.0);

  ComplexMatrix x = ginibre(2, 2, rng), y = ginibre(2, 2, rng), z = ginibre(3, 3, rng);
  REQUIRE(max_abs(tensor(tensor(x, y), z) - tensor(x, tensor(y, z))) < 1e-14);
}

TEST_CASE("direct sum") {
  REQUIRE(max_abs(direct_sum({identity(2), identity(3)}) - identity(5)) == 0.0);
  REQUIRE(max_abs(direct_sum({pauli::z()}) - pauli::z()) == 0.0);

  ComplexMatrix two = 2.0 * identity(1), three = 3.0 * identity(1);
  ComplexMatrix d = direct_sum({two, three});
  REQUIRE(d(0, 0) == cplx(2, 0));
  REQUIRE(d(1, 1) == cplx(3, 0));
  REQUIRE(d(0, 1) == cplx(0, 0));

  Rng rng(13);
  REQUIRE_THROWS_AS(direct_sum({ginibre(2, 3, rng)}), Error);
}

TEST_CASE("partial trace") {
  SpaceLayout ab({{"A", 2}, {"B", 3}});
  Rng rng(21);
  ComplexMatrix ra = random_hermitian(2, rng), rb = random_hermitian(3, rng);
  ComplexMatrix prod = tensor(ra, rb);

  ComplexMatrix onto_a = partial_trace(prod, ab, {"A"});
  REQUIRE(max_abs(onto_a - rb.trace() * ra) < 1e-13);

  // Bell state: Tr_B |Φ+><Φ+| = I/2, direct 4x4 computation
  ComplexMatrix bell = zeros(4, 1);
  bell(0, 0) = bell(3, 0) = 1.0 / std::sqrt(2.0);
  ComplexMatrix bell_rho = bell * bell.adjoint();
  SpaceLayout ab2({{"A", 2}, {"B", 2}});
  REQUIRE(max_abs(partial_trace(bell_rho, ab2, {"A"}) - 0.5 * identity(2)) < 1e-15);

  // keep-all is the identity operation
  REQUIRE(max_abs(partial_trace(prod, ab, {"A", "B"}) - prod) == 0.0);

  REQUIRE_THROWS_AS(partial_trace(prod, ab, {"C"}), Error);
  REQUIRE_THROWS_AS(partial_trace(ginibre(5, 5, rng), ab, {"A"}), Error);
}

TEST_CASE("partial trace properties") {
  SpaceLayout abe({{"A", 2}, {"B", 2}, {"E", 3}});
  Rng rng(22);
  for (int trial = 0; trial < 20; ++trial) {
    ComplexMatrix m = ginibre(12, 12, rng);
    ComplexMatrix kept = partial_trace(m, abe, {"B"});
    REQUIRE(std::abs(kept.trace() - m.trace()) < 1e-12);

    // tracing A then E equals tracing {A,E} in one step
    ComplexMatrix step1 = partial_trace(m, abe, {"B", "E"});
    ComplexMatrix step2 = partial_trace(step1, SpaceLayout({{"B", 2}, {"E", 3}}), {"B"});
    REQUIRE(max_abs(step2 - kept) < 1e-12);
  }
}

TEST_CASE("permute subsystems") {
  Rng rng(23);
  ComplexMatrix ra = random_hermitian(2, rng), rb = random_hermitian(3, rng);
  SpaceLayout ab({{"A", 2}, {"B", 3}});

  auto [ba, ba_layout] = permute_subsystems(tensor(ra, rb), ab, {"B", "A"});
  REQUIRE(max_abs(ba - tensor(rb, ra)) == 0.0);
  REQUIRE(ba_layout == SpaceLayout({{"B", 3}, {"A", 2}}));

  // round trip through a permutation and its inverse
  SpaceLayout abc({{"A", 2}, {"B", 2}, {"C", 2}});
  ComplexMatrix m = ginibre(8, 8, rng);
  auto [p1, l1] = permute_subsystems(m, abc, {"C", "A", "B"});
  auto [p2, l2] = permute_subsystems(p1, l1, {"A", "B", "C"});
  REQUIRE(max_abs(p2 - m) == 0.0);

  // Bell state is swap symmetric
  ComplexMatrix bell = zeros(4, 1);
  bell(0, 0) = bell(3, 0) = 1.0 / std::sqrt(2.0);
  ComplexMatrix bell_rho = bell * bell.adjoint();
  SpaceLayout ab2({{"A", 2}, {"B", 2}});
  auto [swapped, _] = permute_subsystems(bell_rho, ab2, {"B", "A"});
  REQUIRE(max_abs(swapped - bell_rho) == 0.0);

  REQUIRE_THROWS_AS(permute_subsystems(m, abc, {"A", "B", "B"}), Error);
}

TEST_CASE("permute preserves spectrum and trace") {
  SpaceLayout abc({{"A", 2}, {"B", 3}, {"C", 2}});
  Rng rng(24);
  ComplexMatrix h = random_hermitian(12, rng);
  auto [p, pl] = permute_subsystems(h, abc, {"C", "B", "A"});
  REQUIRE(std::abs(p.trace() - h.trace()) < 1e-12);
  REQUIRE(hermiticity_defect(p) < 1e-12);
  RealVector ev_before = eigh(h).eigenvalues;
  RealVector ev_after = eigh(p).eigenvalues;
  REQUIRE((ev_before - ev_after).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("eigh") {
  EighResult e = eigh(identity(2));
  REQUIRE(e.eigenvalues(0) == Catch::Approx(1.0));
  REQUIRE(e.eigenvalues(1) == Catch::Approx(1.0));

  EighResult z = eigh(pauli::z());
  REQUIRE(z.eigenvalues(0) == Catch::Approx(1.0));   // descending
  REQUIRE(z.eigenvalues(1) == Catch::Approx(-1.0));

  Rng rng(25);
  ComplexMatrix h = random_hermitian(6, rng);
  EighResult eh = eigh(h);
  ComplexMatrix rebuilt =
      eh.eigenvectors * eh.eigenvalues.cast<cplx>().asDiagonal() * eh.eigenvectors.adjoint();
  REQUIRE(max_abs(rebuilt - h) < 1e-10);
  REQUIRE(max_abs(eh.eigenvectors.adjoint() * eh.eigenvectors - identity(6)) < 1e-10);

  ComplexMatrix skew = ginibre(3, 3, rng);
  skew(0, 1) += cplx(0.0, 1.0);  // guarantee a large defect
  REQUIRE_THROWS_AS(eigh(skew), Error);
}

TEST_CASE("psd sqrt and pseudo-inverse sqrt") {
  REQUIRE(max_abs(psd_sqrt(identity(3)) - identity(3)) < 1e-12);

  ComplexMatrix d40 = matrix_from_rows({{4, 0}, {0, 0}});
  REQUIRE(max_abs(psd_sqrt(d40) - matrix_from_rows({{2, 0}, {0, 0}})) < 1e-12);
  REQUIRE(max_abs(psd_pinv_sqrt(d40) - matrix_from_rows({{0.5, 0}, {0, 0}})) < 1e-12);

  Rng rng(26);
  for (int trial = 0; trial < 10; ++trial) {
    ComplexMatrix g = ginibre(5, 3, rng);  // rank 3 of 5
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.real().trace();
    ComplexMatrix s = psd_sqrt(rho);
    REQUIRE(max_abs(s * s - rho) < 1e-9);
    ComplexMatrix pis = psd_pinv_sqrt(rho);
    REQUIRE(max_abs(pis * rho * pis - support_projector(rho)) < 1e-9);
  }

  REQUIRE_THROWS_AS(psd_sqrt(matrix_from_rows({{1, 0}, {0, -0.5}})), Error);
}

TEST_CASE("trace distance") {
  Rng rng(27);
  ComplexMatrix g = ginibre(3, 3, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.real().trace();
  REQUIRE(trace_distance(rho, rho) == 0.0);

  ComplexMatrix p0 = matrix_from_rows({{1, 0}, {0, 0}});
  ComplexMatrix p1 = matrix_from_rows({{0, 0}, {0, 1}});
  REQUIRE(trace_distance(p0, p1) == Catch::Approx(1.0));
  REQUIRE(trace_distance(0.5 * identity(2), p0) == Catch::Approx(0.5));

  REQUIRE_THROWS_AS(trace_distance(p0, identity(3)), Error);
}

TEST_CASE("weyl basis") {
  OperatorBasis b1 = weyl_basis(1);
  REQUIRE(b1.elements.size() == 1);
  REQUIRE(b1.elements[0](0, 0) == cplx(1, 0));

  REQUIRE_THROWS_AS(weyl_basis(0), Error);

  // d = 2: exactly {I, Z, X, XZ}, each a Pauli up to global phase
  OperatorBasis b2 = weyl_basis(2);
  REQUIRE(b2.elements.size() == 4);
  REQUIRE(max_abs(b2.elements[0] - identity(2)) == 0.0);
  std::vector<ComplexMatrix> paulis = {identity(2), pauli::x(), pauli::y(), pauli::z()};
  std::vector<bool> matched(4, false);
  for (const auto& u : b2.elements) {
    for (std::size_t p = 0; p < paulis.size(); ++p) {
      const cplx overlap = (paulis[p].adjoint() * u).trace() / 2.0;
      if (std::abs(std::abs(overlap) - 1.0) < 1e-12) {
        REQUIRE(!matched[p]);
        matched[p] = true;
      }
    }
  }
  for (bool m : matched) REQUIRE(m);

  for (std::size_t d : {2u, 3u, 4u, 5u}) {
    OperatorBasis b = weyl_basis(d);
    REQUIRE(b.elements.size() == d * d);
    REQUIRE(max_abs(b.elements[0] - identity(d)) == 0.0);
    for (std::size_t m = 0; m < b.elements.size(); ++m) {
      REQUIRE(max_abs(b.elements[m].adjoint() * b.elements[m] - identity(d)) < 1e-12);
      for (std::size_t n = 0; n < b.elements.size(); ++n) {
        const cplx tr = (b.elements[m].adjoint() * b.elements[n]).trace();
        const cplx want = m == n ? cplx(static_cast<double>(d), 0) : cplx(0, 0);
        REQUIRE(std::abs(tr - want) < 1e-12);
      }
    }
  }
}

TEST_CASE("weyl reconstruction identity") {
  Rng rng(28);
  for (std::size_t d : {2u, 3u, 4u}) {
    OperatorBasis b = weyl_basis(d);
    ComplexMatrix m = ginibre(d, d, rng);
    auto coeffs = operator_basis_coefficients(b, m);
    ComplexMatrix rebuilt = zeros(d, d);
    for (std::size_t i = 0; i < coeffs.size(); ++i) rebuilt += coeffs[i] * b.elements[i];
    REQUIRE(max_abs(rebuilt - m) < 1e-10);
  }
}
