// Suite measurement in stage order, syndrome records, anyon identification,
// the X-bar membrane, and comparison with Kitaev's D(S3) operators.
#pragma once

#include "s3q/codes.hpp"

#include <functional>
#include <optional>

namespace s3q {

// Plaquette offsets (relative to vertex v) for the non-commuting pairs.
// B̃_p Ã_v = w^(-Z1 Z4 + Z2 Z3) Ã_v B̃_p with p up-left of v.
inline constexpr int kCommutatorOffsetC = -1;
inline constexpr int kCommutatorOffsetY = -1;
// A_v B̃_p A_v = B̃_p^2 with v the top-left corner of p.
inline constexpr int kConjugationOffsetC = 0;
inline constexpr int kConjugationOffsetY = 0;

inline Plaq commutator_plaquette(const Vertex& v) { return {v.c + kCommutatorOffsetC, v.y + kCommutatorOffsetY}; }
inline Plaq conjugation_plaquette(const Vertex& v) { return {v.c + kConjugationOffsetC, v.y + kConjugationOffsetY}; }

struct SyndromeEntry {
  Family family;
  Vertex v;
  Plaq p;
  int layer = 0;
  int exponent = 0;
};

struct SyndromeRecord {
  std::vector<SyndromeEntry> entries;

  std::optional<int> get(Family f, const Vertex& v) const {
    for (const auto& e : entries)
      if (e.family == f && e.v == v) return e.exponent;
    return std::nullopt;
  }
  std::optional<int> get(Family f, const Plaq& p) const {
    for (const auto& e : entries)
      if (e.family == f && e.p == p) return e.exponent;
    return std::nullopt;
  }
  std::vector<SyndromeEntry> nontrivial(Family f) const {
    std::vector<SyndromeEntry> r;
    for (const auto& e : entries)
      if (e.family == f && e.exponent != 0) r.push_back(e);
    return r;
  }
};

class StageOrderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline bool is_plaquette_family(Family f) {
  return f == Family::B || f == Family::Bt || f == Family::BtPlus || f == Family::BtMinus;
}

// Measures the suite group by group. Accepted orderings: B (optionally with
// Ã heralds), then Ã/B̃, then A. B̃ is refused while any B_p = -1 stands.
inline SyndromeRecord measure_suite(State& s, const ProjectorSuite& suite, const std::vector<std::vector<Family>>& ordering,
                                    Rng& rng) {
  auto rank = [](Family f) {
    switch (f) {
      case Family::B: return 0;
      case Family::At:
      case Family::Bt:
      case Family::BtPlus:
      case Family::BtMinus: return 1;
      case Family::A: return 2;
    }
    return 3;
  };
  int last = -1;
  for (const auto& group : ordering) {
    bool has_b = std::find(group.begin(), group.end(), Family::B) != group.end();
    int r = -1;
    for (auto f : group) {
      if (has_b && f == Family::At) continue;  // heralds ride along with B
      if (r >= 0 && rank(f) != r) throw StageOrderError("mixed stages in one group");
      r = rank(f);
    }
    if (r < last) throw StageOrderError("suite ordering violated");
    last = r;
  }
  SyndromeRecord rec;
  for (const auto& group : ordering) {
    for (auto f : group) {
      if (f == Family::Bt && !rec.nontrivial(Family::B).empty())
        throw StageOrderError("flux measured with B_p = -1 present");
      for (const auto* e : suite.of(f)) {
        if (f == Family::BtPlus || f == Family::BtMinus) {
          auto b = rec.get(Family::B, e->p);
          if (!b) throw StageOrderError("flux resolution needs B_p first");
          if ((f == Family::BtPlus) == (*b == 1)) continue;
        }
        int x = s.measure(e->obs, rng);
        rec.entries.push_back({f, e->v, e->p, e->layer, x});
      }
    }
  }
  return rec;
}

inline const std::vector<std::vector<Family>>& standard_ordering() {
  static const std::vector<std::vector<Family>> o{{Family::B}, {Family::At, Family::Bt}, {Family::A}};
  return o;
}

// ---- identification --------------------------------------------------------

struct SiteSyndrome {
  std::optional<int> A, At, B, BtPlus, BtMinus, Dyon;  // Dyon: exponent of Ã_v^j A_v
};

struct AnyonAssignment {
  char label = 'A';
  int internal = 1;
};

class InconsistentRecord : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline AnyonAssignment identify_anyon(const SiteSyndrome& s) {
  if (!s.B) throw InconsistentRecord("qubit flux missing");
  if (*s.B == 0) {
    if (s.BtMinus) throw InconsistentRecord("B_p = +1 with B~- data");
    if (!s.BtPlus) throw InconsistentRecord("flux resolution missing");
    int j = *s.BtPlus % 3;
    if (!s.At) throw InconsistentRecord("Ã_v missing");
    int a = *s.At % 3;
    if (j == 0) {
      if (a != 0) return {'C', a};
      if (!s.A) throw InconsistentRecord("A_v missing");
      return {*s.A ? 'B' : 'A', 1};
    }
    if (a == 0) return {'F', j};
    if (a == (3 - j) % 3) return {'G', j};
    return {'H', j};
  }
  if (s.BtPlus) throw InconsistentRecord("B_p = -1 with B~+ data");
  if (!s.BtMinus || !s.Dyon) throw InconsistentRecord("reflection sector needs B~- and the dyon sign");
  return {*s.Dyon ? 'E' : 'D', *s.BtMinus % 3 + 1};
}

// Ã_v^j A_v for the reflection-sector charge.
inline Observable dyon_observable(const ProjectorSuite& s, const Vertex& v, int j) {
  Observable o;
  o.order = 2;
  o.name = "At^" + std::to_string(j) + "A" + to_string(v);
  o.op = s.at(Family::A, v)->obs.op;
  for (int i = 0; i < j; ++i) o.op = o.op.then(s.at(Family::At, v)->obs.op);
  return o;
}

// ---- logical membrane -------------------------------------------------------

inline void apply_X_membrane(State& s, const LayeredLayout& L, const BaseSpec& B, int column) {
  s.apply(qubit_xbar(L, B, column));
}

// ---- Kitaev comparison ------------------------------------------------------

// Register of n edges, each a (qubit, base qutrit) pair in 3q+n order.
struct EdgePatch {
  std::vector<Edge> edges;
  State reg() const {
    State s;
    for (const auto& e : edges) {
      s.add_basis(qkey(e), 2, 0);
      s.add_basis(bkey(e), 3, 0);
    }
    return s;
  }
  int dim() const {
    int d = 1;
    for (std::size_t i = 0; i < edges.size(); ++i) d *= 6;
    return d;
  }
};

// Dense matrix of a linear map on the patch, built column by column.
inline Mat dense_map(const EdgePatch& p, const std::function<std::vector<cplx>(const State&, const std::vector<cplx>&)>& f) {
  int d = p.dim();
  Mat m(d, d);
  State s = p.reg();
  for (int j = 0; j < d; ++j) {
    std::vector<cplx> v(d, cplx{});
    v[j] = 1;
    auto w = f(s, v);
    for (int i = 0; i < d; ++i) m(i, j) = w[i];
  }
  return m;
}

// Sites outside the patch must not be touched by op.
inline Mat dense(const EdgePatch& p, const Op& op) {
  return dense_map(p, [&](const State& s, const std::vector<cplx>& v) { return s.applied(op, v); });
}

// Product of +1 projectors, rightmost applied first.
inline Mat projector_product(const EdgePatch& p, const std::vector<const Observable*>& obs) {
  return dense_map(p, [&](const State& s, const std::vector<cplx>& v) {
    auto w = v;
    for (auto it = obs.rbegin(); it != obs.rend(); ++it) w = s.project(**it, 0, w);
    return w;
  });
}

inline Op edge_shift(const Edge& e, ShiftKind k, GroupElement g) {
  Op o;
  o.factors.push_back(Factor::local({qkey(e), bkey(e)}, shift_matrix(k, g)));
  return o;
}

// Kitaev vertex operator: L_+ on left/up legs, L_- on right/down legs.
inline Op kitaev_vertex(const std::vector<LegEdge>& star, GroupElement g) {
  Op o;
  for (const auto& le : star) {
    bool plus = le.leg == Leg::left || le.leg == Leg::up;
    o = o.then(edge_shift(le.e, plus ? ShiftKind::Lp : ShiftKind::Lm, g));
  }
  return o;
}

// Kitaev flux projector onto trivial holonomy g1 g2^-1 g3^-1 g4
// (left, top, right, bottom), as a diagonal matrix on the patch.
inline Mat kitaev_plaquette_identity(const EdgePatch& p) {
  int d = p.dim();
  Mat m = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    int r = i;
    std::vector<GroupElement> g(4);
    for (int k = 3; k >= 0; --k) {
      g[k] = GroupElement::from_index(r % 6);
      r /= 6;
    }
    auto h = multiply(multiply(multiply(g[0], inverse(g[1])), inverse(g[2])), g[3]);
    if (h == kIdentity) m(i, i) = 1;
  }
  return m;
}

struct KitaevReport {
  double vertex_r = 0;  // |A^r - Ã_v|
  double vertex_s = 0;  // |A^s - A_v|
  double vertex_projector = 0;
  double plaquette = 0;  // |B^e - P_B P_B~|
  bool ok(double tol = 1e-10) const {
    return vertex_r < tol && vertex_s < tol && vertex_projector < tol && plaquette < tol;
  }
};

inline KitaevReport kitaev_check() {
  KitaevReport r;
  auto B = BaseSpec::from(GroupSpec::s3());
  {
    // bulk star at (1,1) with its left and upper neighbours live
    auto L = build_layout(3, 3, {0, 1}, {1, 1});
    Vertex v{1, 1};
    auto star = L.geo().star(L.base, v);
    EdgePatch p;
    for (auto& le : star) p.edges.push_back(le.e);
    auto suite = projector_suite(L, B, false);
    Mat at = dense(p, suite.at(Family::At, v)->obs.op);
    // qubit star restricted to the patch: X legs plus automorphism on right/down
    Mat a = dense(p, suite.at(Family::A, v)->obs.op);
    r.vertex_r = (dense(p, kitaev_vertex(star, kR)) - at).cwiseAbs().maxCoeff();
    r.vertex_s = (dense(p, kitaev_vertex(star, kS)) - a).cwiseAbs().maxCoeff();
    Mat kit = dense_map(p, [&](const State& s, const std::vector<cplx>& x) {
      std::vector<cplx> acc(x.size(), cplx{});
      for (auto g : all_elements()) {
        auto y = s.applied(kitaev_vertex(star, g), x);
        for (std::size_t i = 0; i < y.size(); ++i) acc[i] += y[i] / 6.0;
      }
      return acc;
    });
    Mat fact = projector_product(p, {&suite.at(Family::At, v)->obs, &suite.at(Family::A, v)->obs});
    r.vertex_projector = (kit - fact).cwiseAbs().maxCoeff();
  }
  {
    auto L = build_layout(2, 3, {0, 1}, {0, 1});
    Plaq q{0, 0};
    auto suite = projector_suite(L, B, false);
    EdgePatch p;
    for (auto& le : L.geo().plaquette(L.base, q)) p.edges.push_back(le.e);
    Mat fact = projector_product(p, {&suite.at(Family::B, q)->obs, &suite.at(Family::Bt, q)->obs});
    r.plaquette = (kitaev_plaquette_identity(p) - fact).cwiseAbs().maxCoeff();
  }
  return r;
}

}  // namespace s3q
