#include "doctest.h"
#include "s3q/group.hpp"

#include <array>
#include <set>

using namespace s3q;

namespace {

// S3 as permutations of {0,1,2}; composition applies the right factor first.
using P = std::array<int, 3>;
P after(const P& a, const P& b) { return {a[b[0]], a[b[1]], a[b[2]]}; }
P identity() { return {0, 1, 2}; }
P rot() { return {1, 2, 0}; }
P refl() { return {0, 2, 1}; }

P perm(GroupElement g) {
  P out = identity();
  for (int i = 0; i < g.n; ++i) out = after(rot(), out);
  if (g.q) out = after(refl(), out);
  return out;
}

}  // namespace

TEST_CASE("multiplication matches the permutation representation") {
  int agree = 0;
  for (auto a : all_elements())
    for (auto b : all_elements()) agree += perm(multiply(a, b)) == after(perm(a), perm(b));
  CHECK(agree == 36);
  std::set<P> images;
  for (auto a : all_elements()) images.insert(perm(a));
  CHECK(images.size() == 6);
}

TEST_CASE("inverses and presentation") {
  for (auto a : all_elements()) CHECK(multiply(a, inverse(a)) == kIdentity);
  CHECK(multiply(multiply(kS, kR), inverse(kS)) == multiply(kR, kR));
  CHECK(multiply(kS, kS) == kIdentity);
  CHECK(multiply(kR, multiply(kR, kR)) == kIdentity);
}

TEST_CASE("conjugacy classes have sizes 1, 2, 3") {
  std::multiset<std::size_t> sizes;
  std::set<int> seen;
  for (auto a : all_elements()) {
    if (seen.contains(a.index())) continue;
    auto cls = conjugacy_class_of(a);
    for (auto m : cls.members) seen.insert(m.index());
    sizes.insert(cls.members.size());
  }
  CHECK(sizes == std::multiset<std::size_t>{1, 2, 3});
}

TEST_CASE("anyon quantum dimensions square-sum to the group order squared") {
  int total = 0;
  for (const auto& a : anyon_table()) total += a.quantum_dim * a.quantum_dim;
  CHECK(anyon_table().size() == 8);
  CHECK(total == 36);
}

TEST_CASE("two-dimensional irrep is a homomorphism") {
  for (auto a : all_elements())
    for (auto b : all_elements()) CHECK((irrep2(multiply(a, b)) - irrep2(a) * irrep2(b)).norm() < 1e-12);
}

TEST_CASE("left and right shifts act on group basis states") {
  for (auto g : all_elements())
    for (auto h : all_elements()) {
      auto lp = shift_matrix(ShiftKind::Lp, g);
      CHECK(std::abs(lp(multiply(g, h).index(), h.index()) - 1.0) < 1e-12);
      auto lm = shift_matrix(ShiftKind::Lm, g);
      CHECK(std::abs(lm(multiply(h, inverse(g)).index(), h.index()) - 1.0) < 1e-12);
    }
}

TEST_CASE("group specs") {
  CHECK(GroupSpec::s3().valid());
  CHECK(GroupSpec::s3().name() == "S3");
  CHECK(GroupSpec::d4().valid());
  CHECK_FALSE(GroupSpec{GroupSpec::Kind::cyclic, 3, 2, 3}.valid());
  // charge conjugation on Z3, bit swap on Z2 x Z2
  CHECK(automorphism_apply(GroupSpec::s3(), 1, 1) == 2);
  CHECK(automorphism_apply(GroupSpec::s3(), 2, 1) == 1);
  CHECK(automorphism_apply(GroupSpec::d4(), 1, 0b01) == 0b10);
  CHECK(automorphism_apply(GroupSpec::d4(), 1, 0b11) == 0b11);
  CHECK(BaseSpec::from(GroupSpec::d4()).local_dim() == 4);
  CHECK_THROWS_AS(BaseSpec::from(GroupSpec{GroupSpec::Kind::cyclic, 7, 3, 2}), std::invalid_argument);
}
