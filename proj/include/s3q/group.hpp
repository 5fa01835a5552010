// S3 = Z3 x| Z2 group algebra, shift operators on C2 x C3, and D(S3) anyon data.
#pragma once

#include "s3q/gates.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace s3q {

// s^q r^n
struct GroupElement {
  int q = 0;
  int n = 0;
  bool operator==(const GroupElement&) const = default;
  int index() const { return 3 * q + n; }
  static GroupElement from_index(int i) { return {i / 3, i % 3}; }
};

inline constexpr GroupElement kIdentity{0, 0};
inline constexpr GroupElement kR{0, 1};
inline constexpr GroupElement kS{1, 0};

inline GroupElement multiply(GroupElement a, GroupElement b) {
  int sign = (b.q == 0) ? 1 : -1;
  return {(a.q + b.q) % 2, (((sign * a.n + b.n) % 3) + 3) % 3};
}

inline GroupElement inverse(GroupElement a) {
  if (a.q == 1) return a;
  return {0, (3 - a.n) % 3};
}

inline std::vector<GroupElement> all_elements() {
  std::vector<GroupElement> v;
  for (int i = 0; i < 6; ++i) v.push_back(GroupElement::from_index(i));
  return v;
}

inline std::string name(GroupElement g) {
  std::string s;
  if (g.q) s += "s";
  if (g.n == 1) s += "r";
  if (g.n == 2) s += "r2";
  return s.empty() ? "e" : s;
}

struct ConjugacyClass {
  std::string label;
  std::vector<GroupElement> members;
};

inline ConjugacyClass conjugacy_class_of(GroupElement a) {
  std::vector<GroupElement> m;
  for (auto g : all_elements()) {
    auto c = multiply(multiply(g, a), inverse(g));
    if (std::find(m.begin(), m.end(), c) == m.end()) m.push_back(c);
  }
  std::sort(m.begin(), m.end(), [](auto x, auto y) { return x.index() < y.index(); });
  std::string label = m.size() == 1 ? "[1]" : (m.size() == 2 ? "[r]" : "[s]");
  return {label, m};
}

enum class ShiftKind { Lp, Lm, Tp, Tm };

// Matrix on C2 x C3 with basis index 3q + n.
inline Mat shift_matrix(ShiftKind kind, GroupElement g) {
  Mat m = Mat::Zero(6, 6);
  for (auto h : all_elements()) {
    switch (kind) {
      case ShiftKind::Lp: m(multiply(g, h).index(), h.index()) = 1; break;
      case ShiftKind::Lm: m(multiply(h, inverse(g)).index(), h.index()) = 1; break;
      case ShiftKind::Tp: m(h.index(), h.index()) = (g == h) ? 1 : 0; break;
      case ShiftKind::Tm: m(h.index(), h.index()) = (inverse(g) == h) ? 1 : 0; break;
    }
  }
  return m;
}

// Two-dimensional irrep, stored only as data.
inline Mat irrep2(GroupElement g) {
  Mat r(2, 2), s(2, 2);
  r << 0, -1, 1, -1;
  s << -1, 1, 0, 1;
  Mat out = Mat::Identity(2, 2);
  if (g.q) out = s;
  for (int i = 0; i < g.n; ++i) out = out * r;
  return out;
}

// Split extension base x| symmetry with a -> a^t. The d4 kind encodes the
// base Z2 x Z2 as two bits with the automorphism swapping them.
struct GroupSpec {
  enum class Kind { cyclic, d4 };
  Kind kind = Kind::cyclic;
  int p = 3;
  int q = 2;
  int t = 2;

  static GroupSpec s3() { return {Kind::cyclic, 3, 2, 2}; }
  static GroupSpec d4() { return {Kind::d4, 4, 2, 0}; }

  bool valid() const {
    if (kind == Kind::d4) return q == 2;
    long tk = 1;
    for (int i = 0; i < q; ++i) tk = (tk * t) % p;
    return std::gcd(t, p) == 1 && tk == 1 % p;
  }
  std::string name() const { return kind == Kind::d4 ? "D4" : (p == 3 && q == 2 && t == 2 ? "S3" : "Z" + std::to_string(p) + "xZ" + std::to_string(q)); }
};

inline int automorphism_apply(const GroupSpec& spec, int k, int a) {
  if (spec.kind == GroupSpec::Kind::d4) {
    if (k % 2 == 0) return a;
    int x = (a >> 1) & 1, y = a & 1;
    return (y << 1) | x;
  }
  long r = a;
  for (int i = 0; i < k; ++i) r = (r * spec.t) % spec.p;
  return static_cast<int>(r);
}

// Base code seen by the lattice: K layers of Z_n sites per edge and the
// automorphism as a unitary on those K sites.
struct BaseSpec {
  int layers = 1;
  int order = 3;
  Mat automorphism;
  std::string name;

  static BaseSpec from(const GroupSpec& g) {
    if (g.kind == GroupSpec::Kind::d4) return {2, 2, gates::swap2(), "D4"};
    if (g.p == 3 && g.q == 2 && g.t == 2) return {1, 3, gates::Cq(), "S3"};
    throw std::invalid_argument("lattice protocol supports S3 and D4 only");
  }
  int local_dim() const {
    int d = 1;
    for (int i = 0; i < layers; ++i) d *= order;
    return d;
  }
};

struct AnyonLabel {
  char name;
  std::string conjugacy_class;
  std::string centralizer_irrep;
  int quantum_dim;
  std::string set_label;
};

inline std::vector<AnyonLabel> anyon_table() {
  return {
      {'A', "[1]", "1", 1, "1"},       {'B', "[1]", "sign", 1, "phi"},
      {'C', "[1]", "2", 2, "[e~]"},    {'D', "[s]", "1", 3, "sigma"},
      {'E', "[s]", "sign", 3, "phi.sigma"}, {'F', "[r]", "1", 2, "[m~]"},
      {'G', "[r]", "w", 2, "[e~m~]"},  {'H', "[r]", "w2", 2, "[e~m~2]"},
  };
}

inline const AnyonLabel& anyon(char n) {
  static const auto table = anyon_table();
  for (const auto& a : table) {
    if (a.name == n) return a;
  }
  throw std::out_of_range("unknown anyon");
}

}  // namespace s3q
