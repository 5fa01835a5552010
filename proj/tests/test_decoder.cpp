#include "doctest.h"
#include "s3q/decoder.hpp"

#include <bit>

using namespace s3q;

namespace {

// Minimum total cost over perfect matchings with optional boundary partners,
// by dynamic programming over subsets.
double matching_oracle(int n, const std::function<std::optional<double>(int, int)>& pc,
                       const std::function<std::optional<double>(int)>& bc) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(1u << n, inf);
  best[0] = 0;
  for (unsigned m = 1; m < (1u << n); ++m) {
    int i = std::countr_zero(m);
    unsigned rest = m & ~(1u << i);
    if (auto b = bc(i)) best[m] = std::min(best[m], best[rest] + *b);
    for (int j = i + 1; j < n; ++j)
      if (rest & (1u << j))
        if (auto c = pc(i, j)) best[m] = std::min(best[m], best[rest & ~(1u << j)] + *c);
  }
  return best[(1u << n) - 1];
}

}  // namespace

TEST_CASE("exhaustive matching agrees with a subset DP") {
  Rng rng(12);
  std::uniform_real_distribution<double> u(0, 5);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 1 + trial % 7;
    std::vector<std::vector<double>> c(n, std::vector<double>(n));
    std::vector<double> b(n);
    for (auto& row : c)
      for (auto& x : row) x = std::floor(u(rng));
    for (auto& x : b) x = std::floor(u(rng));
    auto pc = [&](int i, int j) -> std::optional<double> { return c[std::min(i, j)][std::max(i, j)]; };
    auto bcost = [&](int i) -> std::optional<double> { return b[i]; };
    auto m = min_weight_matching(n, pc, bcost);
    double w = 0;
    std::vector<int> seen(n, 0);
    for (auto [i, j] : m) {
      ++seen[i];
      if (j == kBoundary) w += b[i];
      else w += *pc(i, j), ++seen[j];
    }
    for (int s : seen) CHECK(s == 1);
    CHECK(w == doctest::Approx(matching_oracle(n, pc, bcost)));
  }
}

TEST_CASE("matching prefers an internal pair on a tie") {
  auto m = min_weight_matching(
      2, [](int, int) -> std::optional<double> { return 2.0; }, [](int) -> std::optional<double> { return 1.0; });
  REQUIRE(m.size() == 1);
  CHECK(m[0].second == 1);
}

TEST_CASE("per-trial seeds") {
  std::set<std::uint64_t> s;
  for (int i = 0; i < 1000; ++i) s.insert(trial_seed(42, i));
  CHECK(s.size() == 1000);
  CHECK(trial_seed(42, 7) == trial_seed(42, 7));
  CHECK(trial_seed(42, 7) != trial_seed(43, 7));
}

TEST_CASE("Wilson interval") {
  McResult r;
  r.trials.resize(10);
  r.failures = 0;
  fill_rate(r);
  CHECK(r.rate == 0);
  CHECK(r.ci_lo == 0);
  CHECK(r.ci_hi == doctest::Approx(1.96 * 1.96 / (10 + 1.96 * 1.96)));
}

TEST_CASE("error sampling") {
  ErrorModel bad{0.6, 0, 0, 0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  auto L = build_layout(2, 3, {0, 1}, {1, 1});
  Rng a(5), b(5);
  ErrorModel m{0.3, 0.3, 0.3, 0.3};
  auto e1 = sample_errors(L, m, a), e2 = sample_errors(L, m, b);
  REQUIRE(e1.size() == e2.size());
  for (std::size_t i = 0; i < e1.size(); ++i) CHECK(to_string(e1[i]) == to_string(e2[i]));
  Rng c(1);
  CHECK(sample_errors(L, ErrorModel{}, c).empty());
  for (const auto& ev : e1) CHECK(in_region(L, ev));
  CHECK_FALSE(in_region(L, {ErrorKind::Xq, Edge{2, 0, true}, 1}));
}

TEST_CASE("single-error statistics on the small patch") {
  auto B = BaseSpec::from(GroupSpec::s3());
  auto P = static_patch(2, 3, {0, 1}, {1, 1}, B);
  const Edge e{1, 0, false};
  SUBCASE("qutrit clock error") {
    ErrorEvent ev{ErrorKind::Zq, e, 1};
    auto ex = exact_syndromes(P.ground, ev, P.L, B);
    CHECK(max_difference(ex, syndrome_oracle(ev, P.L, B)) < 1e-9);
    auto a = ex.find("A(1,0)");
    REQUIRE(a);
    CHECK(a->prob[1] == doctest::Approx(0.5));
    // one deterministic phase on the unconditioned leg, two even splits
    int split = 0, fixed = 0;
    for (const auto* m : ex.nontrivial()) {
      double top = *std::ranges::max_element(m->prob);
      if (std::abs(top - 0.5) < 1e-9) ++split;
      if (std::abs(top - 1) < 1e-9) ++fixed;
    }
    CHECK(split == 2);
    CHECK(fixed == 1);
  }
  SUBCASE("qubit X error") {
    ErrorEvent ev{ErrorKind::X, e, 1};
    auto ex = exact_syndromes(P.ground, ev, P.L, B);
    CHECK(max_difference(ex, syndrome_oracle(ev, P.L, B)) < 1e-9);
    int thirds = 0;
    for (const auto* m : ex.nontrivial())
      if (m->prob.size() == 3 && std::abs(m->prob[0] - 1.0 / 3) < 1e-9) ++thirds;
    CHECK(thirds == 2);
  }
  SUBCASE("qubit Z error") {
    ErrorEvent ev{ErrorKind::Z, e, 1};
    auto ex = exact_syndromes(P.ground, ev, P.L, B);
    auto nt = ex.nontrivial();
    REQUIRE(nt.size() == 2);
    for (const auto* m : nt) {
      CHECK(m->family == Family::A);
      CHECK(m->prob[1] == doctest::Approx(1));
    }
  }
}

TEST_CASE("decoder removes a bulk clock error") {
  auto B = BaseSpec::from(GroupSpec::s3());
  auto P = decoder_patch(B);
  for (int sd = 0; sd < 3; ++sd) {
    State s = P.ground;
    apply_error(s, P.L, B, {ErrorKind::Zq, Edge{1, 0, false}, 2});
    Rng rng(50 + sd);
    auto r = decode_round(s, P.L, B, rng_measurer(rng));
    CHECK(r.success);
    CHECK(fidelity(P.ground, s) == doctest::Approx(1).epsilon(1e-9));
  }
}

TEST_CASE("syndrome backend without noise never fails") {
  McConfig c;
  c.exact = false;
  c.trials = 300;
  auto r = mc_logical_error_rate(c, BaseSpec::from(GroupSpec::s3()));
  CHECK(r.failures == 0);
  CHECK(r.trials.size() == 300);
}

TEST_CASE("Monte Carlo is reproducible per seed") {
  McConfig c;
  c.exact = false;
  c.trials = 100;
  c.model = {0.05, 0.05, 0.05, 0.05};
  auto B = BaseSpec::from(GroupSpec::s3());
  auto a = mc_logical_error_rate(c, B), b = mc_logical_error_rate(c, B);
  CHECK(a.failures == b.failures);
  for (int i = 0; i < 100; ++i) CHECK(a.trials[i].report.failure == b.trials[i].report.failure);
}

TEST_CASE("hidden error log") {
  auto B = BaseSpec::from(GroupSpec::s3());
  auto L = build_layout(1, 3, {0, 1}, {1, 1});
  State s = zero_register(L, B);
  Rng rng(3);
  auto log = inject_errors(s, L, B, ErrorModel{0.5, 0, 0.5, 0}, rng);
  CHECK(log.size() == log.reveal().size());
}
