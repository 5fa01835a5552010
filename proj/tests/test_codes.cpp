#include "doctest.h"
#include "s3q/decoder.hpp"
#include "s3q/protocol.hpp"

using namespace s3q;

TEST_CASE("geometry counts") {
  Geometry g{2};
  Window w{1, 2};
  CHECK(g.vertices(w).size() == 4);
  CHECK(g.edges(w).size() == 8);  // 3 horizontal per row, 1 vertical per column
  CHECK(g.plaquettes(w).size() == 3);
  CHECK(g.star(w, {1, 0}).size() == 3);
  CHECK(g.plaquette(w, {1, 0}).size() == 4);
  CHECK(g.plaquette(w, {0, 0}).size() == 3);  // left vertical edge is outside
  CHECK_THROWS_AS(build_layout(2, 4, {2, 4}, {1, 1}), std::invalid_argument);
}

TEST_CASE("disjoint codes: logical basis states") {
  ProtocolConfig pc;
  auto L = initial_layout(pc);
  auto B = BaseSpec::from(pc.group);
  std::vector<State> basis;
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 3; ++k) basis.push_back(encode(L, B, basis_input(a, {k})));
  // orthonormal
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j)
      CHECK(std::abs(overlap(basis[i], basis[j])) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
  // stabilized by every plain stabilizer of both layers
  for (const auto& s : basis) {
    for (bool q : {true, false})
      for (const auto& st : stabilizer_set(L, q)) CHECK(s.outcome_probabilities(abelian_observable(st, B))[0] == doctest::Approx(1));
  }
  // logical Z eigenvalues: +-1 on the qubit, distinct cube roots on the qutrit
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 3; ++k) {
      const State& s = basis[3 * a + k];
      CHECK(s.expectation(qubit_zbar(L)).real() == doctest::Approx(a ? -1.0 : 1.0));
      cplx z = s.expectation(base_logical(L, B, 0, false));
      CHECK(std::abs(z) == doctest::Approx(1));
      CHECK(std::abs(z - root_of_unity(3, k)) < 1e-9);
    }
}

TEST_CASE("encoding respects the dimension budget") {
  ProtocolConfig pc;
  auto L = initial_layout(pc);
  auto B = BaseSpec::from(pc.group);
  CHECK_THROWS_AS(encode(L, B, basis_input(0, {0}), 1000), BudgetError);
}

TEST_CASE("static gauged patch sits in the joint +1 space") {
  auto B = BaseSpec::from(GroupSpec::s3());
  auto P = static_patch(2, 3, {0, 1}, {1, 1}, B, 3);
  CHECK(P.ground.dim() == 62208);
  auto suite = projector_suite(P.L, B, false);
  CHECK(suite.entries.size() > 0);
  for (const auto& e : suite.entries) CHECK(prob_of(P.ground, e.obs, 0) == doctest::Approx(1).epsilon(1e-9));
}

TEST_CASE("gauging outcome records feedforward") {
  auto B = BaseSpec::from(GroupSpec::s3());
  auto L = build_layout(2, 3, {0, -1}, {1, 1});
  State s = encode(L, B, basis_input(0, {1}));
  Rng rng(9);
  auto steps = gauge_window(s, L, B, {0, 1}, rng);
  REQUIRE(steps.size() == 2);
  for (const auto& st : steps) {
    CHECK(st.kind == "extend");
    CHECK(st.x_outcomes.size() == 2);
    int ones = 0;
    for (int x : st.x_outcomes) ones += x;
    CHECK(static_cast<int>(st.feedforward.size()) == ones);
  }
  CHECK(L.qubit == Window{0, 1});
}
