#include "doctest.h"
#include "s3q/magic.hpp"

using namespace s3q;
using namespace s3q::magic;

namespace {
const double r3 = std::sqrt(3.0);
}

TEST_CASE("six-level Fourier matrix equals H2 x H3^dagger in the chosen order") {
  CHECK((build_H6() - hadamard_product()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((build_H6() * build_H6().adjoint() - Mat6::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("composite gate") {
  Mat6 c = composite();
  CHECK((c - expected_composite()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((c * c.adjoint() - Mat6::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  // involution, since CC6 is
  CHECK((c * c - Mat6::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("output state") {
  // (3|1> + (1 - i sqrt3)|ba> + |b> + (1 + i sqrt3)|ba^2>) / (3 sqrt2)
  Vec6 want = Vec6::Zero();
  want(0) = 3;
  want(1) = cplx(1, -r3);
  want(3) = 1;
  want(5) = cplx(1, r3);
  want /= 3 * std::sqrt(2.0);
  CHECK((output_state() - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("measuring the qutrit layer") {
  auto br = run_magic(Layer::qutrit);
  REQUIRE(br.size() == 3);
  CHECK(br[0].probability == doctest::Approx(5.0 / 9).epsilon(1e-14));
  CHECK(br[0].exact == "5/9");
  CHECK(br[1].exact == "2/9");
  CHECK(br[2].exact == "2/9");
  // psi1 = (3|0> + |1>) / sqrt10
  CHECK(std::abs(br[0].state[0] - 3 / std::sqrt(10.0)) < 1e-12);
  CHECK(std::abs(br[0].state[1] - 1 / std::sqrt(10.0)) < 1e-12);
  CHECK(stabilizer_distance(br[0].state) >= 0.1);
}

TEST_CASE("measuring the qubit layer") {
  auto br = run_magic(Layer::qubit);
  REQUIRE(br.size() == 2);
  CHECK(br[1].exact == "1/2");
  // psi2 = 1/3 |0> + (1/3 - i/sqrt3)|1> + (1/3 + i/sqrt3)|2>
  const auto& s = br[1].state;
  CHECK(std::abs(s[0] - cplx(1.0 / 3, 0)) < 1e-12);
  CHECK(std::abs(s[1] - cplx(1.0 / 3, -1 / r3)) < 1e-12);
  CHECK(std::abs(s[2] - cplx(1.0 / 3, 1 / r3)) < 1e-12);
  CHECK(max_qutrit_stabilizer_overlap(s) < 1 - 1e-6);
  // the plus branch is a basis state, hence a stabilizer state
  CHECK(max_qutrit_stabilizer_overlap(br[0].state) == doctest::Approx(1));
}

TEST_CASE("rational rendering") {
  CHECK(rational(5.0 / 9) == "5/9");
  CHECK(rational(0.5) == "1/2");
  CHECK(rational(1.0) == "1");
  CHECK(rational(0.1234).empty());
}

TEST_CASE("lattice relabeling is a bijection") {
  for (int k = 0; k < kLevels; ++k) {
    auto [a, d] = lattice_label(k);
    CHECK(six_from_lattice(a, d) == k);
  }
}

TEST_CASE("lattice cross-check on a few shots") {
  ProtocolConfig pc;
  pc.seed = 3;
  auto cc = lattice_cross_check(pc, 200, 2);
  CHECK(cc.min_gate_fidelity >= 1 - 1e-9);
  CHECK(cc.exact[0] == doctest::Approx(5.0 / 9).epsilon(1e-9));
  CHECK(cc.sequence.size() == 200);
  CHECK(cc.counts[0] + cc.counts[1] + cc.counts[2] == 200);
}
