#include "doctest.h"
#include "s3q/gates.hpp"
#include "s3q/sim.hpp"

using namespace s3q;

namespace {

SiteKey site(int i) { return {Role::qubit_edge, i, 0, true, 0}; }

Mat random_unitary(int d, Rng& rng) {
  std::normal_distribution<double> n;
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = {n(rng), n(rng)};
  Eigen::HouseholderQR<Mat> qr(m);
  return qr.householderQ();
}

// Dense operator of a local matrix on sites (a, b) of a register with dims,
// first site most significant.
Mat embed(const std::vector<int>& dims, int a, int b, const Mat& m) {
  std::size_t n = 1;
  for (int d : dims) n *= d;
  Mat out = Mat::Zero(n, n);
  auto digits = [&](std::size_t idx) {
    std::vector<int> dg(dims.size());
    for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
      dg[i] = static_cast<int>(idx % dims[i]);
      idx /= dims[i];
    }
    return dg;
  };
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      auto dr = digits(r), dc = digits(c);
      bool rest = true;
      for (std::size_t i = 0; i < dims.size(); ++i)
        if (static_cast<int>(i) != a && static_cast<int>(i) != b && dr[i] != dc[i]) rest = false;
      if (!rest) continue;
      out(r, c) = m(dr[a] * dims[b] + dr[b], dc[a] * dims[b] + dc[b]);
    }
  return out;
}

Eigen::VectorXcd vec(const std::vector<cplx>& v) { return Eigen::Map<const Eigen::VectorXcd>(v.data(), v.size()); }

}  // namespace

TEST_CASE("two-site gate on a mixed register matches the dense product") {
  Rng rng(4);
  State s;
  std::vector<int> dims{2, 3, 2, 3};
  for (int i = 0; i < 4; ++i) s.add_plus(site(i), dims[i]);
  auto before = vec(s.amplitudes());
  Mat u = random_unitary(6, rng);
  s.apply(Factor::local({site(1), site(2)}, u));
  CHECK((vec(s.amplitudes()) - embed(dims, 1, 2, u) * before).norm() < 1e-12);
  // non-adjacent, reversed order
  Mat w = random_unitary(9, rng);
  auto mid = vec(s.amplitudes());
  s.apply(Factor::local({site(3), site(1)}, w));
  // reorder w from (3,1) to (1,3)
  Mat w13(9, 9);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 9; ++c) w13((r % 3) * 3 + r / 3, (c % 3) * 3 + c / 3) = w(r, c);
  CHECK((vec(s.amplitudes()) - embed(dims, 1, 3, w13) * mid).norm() < 1e-12);
}

TEST_CASE("conditioned factor picks the branch by Z parity") {
  State s;
  s.add_basis(site(0), 2, 1);
  s.add_basis(site(1), 2, 1);
  s.add_basis(site(2), 3, 1);
  // parity even: plus applies
  s.apply(Factor::conditioned(site(2), gates::shift(3, 1), gates::shift(3, 2), {site(0), site(1)}));
  CHECK(s.level_probabilities(site(2))[2] == doctest::Approx(1));
  State t;
  t.add_basis(site(0), 2, 1);
  t.add_basis(site(2), 3, 1);
  t.apply(Factor::conditioned(site(2), gates::shift(3, 1), gates::shift(3, 2), {site(0)}));
  CHECK(t.level_probabilities(site(2))[0] == doctest::Approx(1));
}

TEST_CASE("observable probabilities and measurement") {
  State s;
  s.add_plus(site(0), 3);
  Observable z{Op{{Factor::local({site(0)}, gates::clock(3))}, "Z3"}, 3, "Z3"};
  auto p = s.outcome_probabilities(z);
  for (double x : p) CHECK(x == doctest::Approx(1.0 / 3));
  Rng rng(1);
  int o = s.measure(z, rng);
  CHECK(s.level_probabilities(site(0))[o] == doctest::Approx(1));
  CHECK(s.outcome_probabilities(z)[o] == doctest::Approx(1));
  CHECK_THROWS(s.measure(z, rng, (o + 1) % 3));
}

TEST_CASE("measured site can be removed") {
  State s;
  s.add_basis(site(0), 2, 1);
  s.add_plus(site(1), 3);
  Rng rng(2);
  CHECK(s.measure_level(site(0), rng, -1, true) == 1);
  CHECK(s.dim() == 3);
  CHECK_FALSE(s.has(site(0)));
}

TEST_CASE("dimension budget is enforced with the offending dimension") {
  State s(64);
  for (int i = 0; i < 6; ++i) s.add_plus(site(i), 2);
  try {
    s.add_plus(site(6), 2);
    FAIL("expected a budget error");
  } catch (const BudgetError& e) {
    CHECK(std::string(e.what()).find("128") != std::string::npos);
  }
}

TEST_CASE("gate library") {
  CHECK(gates::is_unitary(gates::CC()));
  CHECK((gates::power(gates::Xq(), 3) - gates::eye(3)).norm() < 1e-12);
  // clock-shift commutation ZX = w XZ
  Mat lhs = gates::Zq() * gates::Xq();
  Mat rhs = root_of_unity(3, 1) * gates::Xq() * gates::Zq();
  CHECK((lhs - rhs).norm() < 1e-12);
  // charge conjugation inverts both
  CHECK((gates::Cq() * gates::Xq() * gates::Cq() - gates::Xq(2)).norm() < 1e-12);
  CHECK((gates::Cq() * gates::Zq() * gates::Cq() - gates::Zq(2)).norm() < 1e-12);
}
