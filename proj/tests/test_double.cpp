#include "doctest.h"
#include "s3q/verify.hpp"

using namespace s3q;

TEST_CASE("group-basis shifts written as qubit and qutrit gates") {
  using namespace gates;
  // index 3q + n for s^q r^n: left by s flips q; right by r^-1 lowers n
  auto close = [](const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff() < 1e-12; };
  CHECK(close(shift_matrix(ShiftKind::Lp, kS), kron(X(), eye(3))));
  CHECK(close(shift_matrix(ShiftKind::Lm, kR), kron(eye(2), Xq(2))));
  Mat lr = Mat::Zero(6, 6);
  lr.block(0, 0, 3, 3) = Xq(1);
  lr.block(3, 3, 3, 3) = Xq(2);
  CHECK(close(shift_matrix(ShiftKind::Lp, kR), lr));
  CHECK(close(shift_matrix(ShiftKind::Lm, kS), kron(X(), Cq())));
}

TEST_CASE("dictionary and Kitaev factorization rows pass") {
  for (const auto& r : dictionary_checks()) CHECK_MESSAGE(r.pass, r.name);
  for (const auto& r : kitaev_rows()) CHECK_MESSAGE(r.pass, r.name);
}

TEST_CASE("Hamiltonian terms commute on a small gauged patch") {
  auto B = BaseSpec::from(GroupSpec::s3());
  auto L = build_layout(2, 3, {0, 1}, {1, 1});
  L.left_pinned = true;
  auto r = suite_checks(L, B, 4);
  CHECK(r.pairs > 0);
  CHECK(r.max_commutator < 1e-10);
  CHECK(r.vertex_conjugation < 1e-10);
  CHECK(r.plaquette_conjugation < 1e-10);
}

TEST_CASE("anyon identification from site syndromes") {
  CHECK(identify_anyon({0, 0, 0, 0, {}, {}}).label == 'A');
  CHECK(identify_anyon({1, 0, 0, 0, {}, {}}).label == 'B');
  CHECK(identify_anyon({{}, 1, 0, 0, {}, {}}).label == 'C');
  CHECK(identify_anyon({{}, 0, 0, 1, {}, {}}).label == 'F');
  CHECK(identify_anyon({{}, 2, 0, 1, {}, {}}).label == 'G');
  CHECK(identify_anyon({{}, 1, 0, 1, {}, {}}).label == 'H');
  CHECK(identify_anyon({{}, {}, 1, {}, 0, 0}).label == 'D');
  CHECK(identify_anyon({{}, {}, 1, {}, 2, 1}).label == 'E');
  CHECK_THROWS_AS(identify_anyon({{}, {}, 1, 0, {}, {}}), InconsistentRecord);
}

TEST_CASE("flux offsets of the two conventions") {
  CHECK(commutator_plaquette({2, 1}) == Plaq{1, 0});
  CHECK(conjugation_plaquette({2, 1}) == Plaq{2, 1});
}
