#include "doctest.h"
#include "s3q/protocol.hpp"

using namespace s3q;

TEST_CASE("controlled charge conjugation on the minimal S3 patch") {
  ProtocolConfig pc;
  pc.seed = 21;
  auto rep = verify_logical_action(pc, 2);
  CHECK(rep.fidelities.size() == 8);
  CHECK(rep.min_fidelity() >= 1 - 1e-9);
  CHECK(rep.heisenberg.size() == 8);
  CHECK(rep.max_heisenberg_error() < 1e-9);
  CHECK(rep.peak_dim <= (std::size_t{1} << 26));
  for (const auto& f : rep.fidelities) {
    CHECK(f.trace.loops_ok);
    CHECK_FALSE(f.trace.steps.empty());
  }
}

TEST_CASE("controlled swap on the D4 patch") {
  ProtocolConfig pc;
  pc.group = GroupSpec::d4();
  pc.seed = 5;
  auto rep = verify_logical_action(pc);
  CHECK(rep.group == "D4");
  CHECK(rep.fidelities.size() == 9);
  CHECK(rep.min_fidelity() >= 1 - 1e-9);
  CHECK(rep.peak_dim <= (std::size_t{1} << 26));
}

TEST_CASE("ideal output applies the automorphism only on qubit 1") {
  ProtocolConfig pc;
  auto L = final_layout(pc);
  auto B = BaseSpec::from(pc.group);
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 3; ++k) {
      State want = encode(L, B, basis_input(a, {a ? (3 - k) % 3 : k}));
      CHECK(fidelity(want, ideal_output(pc, basis_input(a, {k}))) == doctest::Approx(1));
    }
}

TEST_CASE("outcome-independent: different seeds give the same logical output") {
  ProtocolConfig pc;
  auto in = basis_input(1, {1});
  State ideal = ideal_output(pc, in);
  for (std::uint64_t sd : {1, 2, 3, 4, 5, 6}) {
    Rng rng(sd * 977);
    auto res = run_protocol(pc, in, rng);
    CHECK(fidelity(ideal, res.out) >= 1 - 1e-9);
  }
}

TEST_CASE("invalid protocol configurations are rejected") {
  ProtocolConfig pc;
  pc.qubit = {2, 2};  // no gap before the base code
  CHECK_THROWS_AS(validate(pc), std::invalid_argument);
  pc = {};
  pc.columns = 4;
  CHECK_THROWS_AS(validate(pc), std::invalid_argument);
  pc = {};
  pc.error_model = true;
  CHECK_THROWS_AS(validate(pc), std::invalid_argument);
  pc = {};
  pc.budget = 4096;
  Rng rng(1);
  CHECK_THROWS_AS(run_protocol(pc, basis_input(0, {0}), rng), BudgetError);
}
