// Gauged-code operator suite: qubit stars dressed by the automorphism, qubit
// plaquettes, and base stabilizers conditioned on qubit Z strings.
#pragma once

#include "s3q/lattice.hpp"

#include <optional>

namespace s3q {

// Where the twist exponent of a base edge comes from: a live qubit vertex,
// the ejected region (carries the logical), or nothing.
struct Source {
  enum class Kind { vertex, left, none };
  Kind kind = Kind::none;
  Vertex v;
  bool operator==(const Source& o) const { return kind == o.kind && (kind != Kind::vertex || v == o.v); }
};

inline Source vertex_source(const LayeredLayout& L, const Vertex& u) {
  if (L.qubit.contains(u.c)) return {Source::Kind::vertex, u};
  if (u.c < L.qubit.lo && (L.ejected_left || L.left_pinned)) return {Source::Kind::left, {}};
  return {Source::Kind::none, {}};
}

// base edges are driven by their left (horizontal) or top (vertical) endpoint
inline Vertex coupler(const Edge& e) { return {e.c, e.y}; }

inline Source edge_source(const LayeredLayout& L, const Edge& e) {
  Source s = vertex_source(L, coupler(e));
  if (s.kind == Source::Kind::vertex && !L.geo().has_edge(L.base, e)) return {Source::Kind::none, {}};
  return s;
}

inline void toggle(std::vector<Edge>& set, const Edge& e) {
  auto it = std::find(set.begin(), set.end(), e);
  if (it == set.end()) {
    set.push_back(e);
  } else {
    set.erase(it);
  }
}

// Qubit edges whose Z product equals s_a * s_b with s = (-1)^x.
inline std::vector<Edge> qubit_path(const LayeredLayout& L, const Source& a, const Source& b) {
  using K = Source::Kind;
  std::vector<Edge> out;
  if (a == b) return out;
  if (a.kind != K::vertex && b.kind != K::vertex) {
    if (a.kind == b.kind) return out;
    if (L.qubit.empty()) throw std::logic_error("logical condition without a qubit code");
    for (int c = L.qubit.lo - 1; c <= L.qubit.hi; ++c) toggle(out, {c, 0, true});
    return out;
  }
  if (a.kind != K::vertex) return qubit_path(L, b, a);
  Vertex u = a.v;
  if (b.kind == K::left) {
    for (int c = u.c; c >= L.qubit.lo; --c) toggle(out, {c - 1, u.y, true});
    return out;
  }
  if (b.kind == K::none) {
    for (int c = u.c; c <= L.qubit.hi; ++c) toggle(out, {c, u.y, true});
    return out;
  }
  Vertex w = b.v;
  for (int c = std::min(u.c, w.c); c < std::max(u.c, w.c); ++c) toggle(out, {c, u.y, true});
  for (int y = std::min(u.y, w.y); y < std::max(u.y, w.y); ++y) toggle(out, {w.c, y, false});
  return out;
}

inline std::vector<SiteKey> qkeys(const std::vector<Edge>& es) {
  std::vector<SiteKey> k;
  for (const auto& e : es) k.push_back(qkey(e));
  return k;
}

// Base factor m on one layer of edge e, swapped for its automorphism image
// on odd parity of the condition string.
inline Factor twisted_factor(const BaseSpec& B, int layer, const Edge& e, const Mat& m, const std::vector<Edge>& cond) {
  Mat plus = embed_layer(B, layer, m);
  Factor f;
  f.targets = base_sites(B, e);
  f.plus = plus;
  f.minus = B.automorphism * plus * B.automorphism.adjoint();
  f.cond = qkeys(cond);
  return f;
}

enum class Family { A, At, B, Bt, BtPlus, BtMinus };

inline std::string family_name(Family f) {
  switch (f) {
    case Family::A: return "A";
    case Family::At: return "At";
    case Family::B: return "B";
    case Family::Bt: return "Bt";
    case Family::BtPlus: return "Bt+";
    case Family::BtMinus: return "Bt-";
  }
  return "?";
}

struct SuiteEntry {
  Family family;
  Vertex v;
  Plaq p;
  int layer = 0;
  bool truncated = false;
  bool local = true;  // false when a condition runs to a boundary
  Observable obs;
};

struct ProjectorSuite {
  std::vector<SuiteEntry> entries;

  std::vector<const SuiteEntry*> of(Family f) const {
    std::vector<const SuiteEntry*> r;
    for (const auto& e : entries)
      if (e.family == f) r.push_back(&e);
    return r;
  }
  const SuiteEntry* at(Family f, Vertex v, int layer = 0) const {
    for (const auto& e : entries)
      if (e.family == f && e.v == v && e.layer == layer) return &e;
    return nullptr;
  }
  const SuiteEntry* at(Family f, Plaq p, int layer = 0) const {
    for (const auto& e : entries)
      if (e.family == f && e.p == p && e.layer == layer) return &e;
    return nullptr;
  }
};

inline Observable qubit_star(const LayeredLayout& L, const BaseSpec& B, const Vertex& v) {
  Observable o;
  o.order = 2;
  o.name = "A" + to_string(v);
  auto g = L.geo();
  for (auto le : g.star(L.qubit, v)) o.op.factors.push_back(Factor::local({qkey(le.e)}, gates::X()));
  if (L.qubit.contains(v.c)) {
    for (auto e : L.coupled_edges(v)) o.op.factors.push_back(Factor::local(base_sites(B, e), B.automorphism));
  }
  o.op.label = o.name;
  return o;
}

inline Observable qubit_plaquette(const LayeredLayout& L, const Plaq& p) {
  Observable o;
  o.order = 2;
  o.name = "B" + to_string(p);
  for (auto le : L.geo().plaquette(L.qubit, p)) o.op.factors.push_back(Factor::local({qkey(le.e)}, gates::Z()));
  o.op.label = o.name;
  return o;
}

// Twisted base stabilizer. Conditions are taken relative to a reference
// vertex so that bulk terms only involve neighbouring qubits.
inline std::pair<Observable, bool> twisted_stabilizer(const LayeredLayout& L, const BaseSpec& B,
                                                      const std::vector<std::pair<Edge, int>>& terms, bool vertex_type,
                                                      Source preferred, int layer, const std::string& name) {
  std::vector<Source> src;
  for (auto& t : terms) src.push_back(edge_source(L, t.first));
  Source ref = preferred;
  if (ref.kind != Source::Kind::vertex) {
    for (auto& s : src) {
      if (s.kind == Source::Kind::vertex) {
        ref = s;
        break;
      }
    }
  }
  Observable o;
  o.order = B.order;
  o.name = name;
  bool local = true;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    auto [e, pw] = terms[i];
    auto cond = qubit_path(L, src[i], ref);
    if ((src[i].kind != Source::Kind::vertex) != (ref.kind != Source::Kind::vertex) ||
        (src[i].kind != Source::Kind::vertex && !(src[i] == ref))) {
      local = false;
    }
    Mat m = vertex_type ? gates::shift(B.order, pw) : gates::clock(B.order, pw);
    o.op.factors.push_back(twisted_factor(B, layer, e, m, cond));
  }
  o.op.label = name;
  return {o, local};
}

inline ProjectorSuite projector_suite(const LayeredLayout& L, const BaseSpec& B, bool flux_variants = true) {
  ProjectorSuite s;
  auto g = L.geo();
  for (auto v : g.vertices(L.qubit)) {
    SuiteEntry e{Family::A, v, {}, 0, g.star(L.qubit, v).size() < 4, true, qubit_star(L, B, v)};
    s.entries.push_back(e);
  }
  for (auto p : g.plaquettes(L.qubit)) {
    SuiteEntry e{Family::B, {}, p, 0, g.plaquette(L.qubit, p).size() < 4, true, qubit_plaquette(L, p)};
    s.entries.push_back(e);
  }
  for (int k = 0; k < B.layers; ++k) {
    std::string tag = B.layers > 1 ? "[" + std::to_string(k) + "]" : "";
    for (auto v : g.vertices(L.base)) {
      std::vector<std::pair<Edge, int>> terms;
      for (auto le : g.star(L.base, v)) terms.push_back({le.e, L.signs.star.at(le.leg)});
      auto [obs, local] = twisted_stabilizer(L, B, terms, true, vertex_source(L, v), k, "At" + tag + to_string(v));
      s.entries.push_back({Family::At, v, {}, k, terms.size() < 4, local, obs});
    }
    for (auto p : g.plaquettes(L.base)) {
      std::vector<std::pair<Edge, int>> terms;
      for (auto le : g.plaquette(L.base, p)) terms.push_back({le.e, L.signs.plaq.at(le.leg)});
      auto [obs, local] =
          twisted_stabilizer(L, B, terms, false, vertex_source(L, {p.c, p.y}), k, "Bt" + tag + to_string(p));
      s.entries.push_back({Family::Bt, {}, p, k, terms.size() < 4, local, obs});
    }
  }
  if (flux_variants && B.layers == 1 && B.order == 3) {
    // flux-resolved plaquettes, defined on full plaquettes of the coupled region
    for (auto p : g.plaquettes(L.base)) {
      auto legs = g.plaquette(L.base, p);
      auto qlegs = g.plaquette(L.qubit, p);
      if (legs.size() != 4 || qlegs.size() != 4) continue;
      bool all_live = true;
      for (auto le : legs) all_live = all_live && edge_source(L, le.e).kind == Source::Kind::vertex;
      if (!all_live) continue;
      Edge left{p.c, p.y, false}, top{p.c, p.y, true}, right{p.c + 1, p.y, false}, bottom{p.c, p.y + 1, true};
      for (int sgn : {1, -1}) {
        Observable o;
        o.order = 3;
        o.name = std::string(sgn > 0 ? "Bt+" : "Bt-") + to_string(p);
        auto cz = [&](const Edge& e, int pw, std::vector<Edge> cond) {
          Factor f;
          f.targets = {bkey(e)};
          f.plus = gates::Zq(pw);
          f.minus = gates::Zq(-pw);
          f.cond = qkeys(cond);
          o.op.factors.push_back(f);
        };
        cz(left, -sgn, {left});
        cz(top, sgn, {left});
        cz(right, sgn, {left, top});
        cz(bottom, -1, {});
        o.op.label = o.name;
        s.entries.push_back({sgn > 0 ? Family::BtPlus : Family::BtMinus, {}, p, 0, false, true, o});
      }
    }
  }
  return s;
}

// Boundary-truncated members of the suite.
inline std::vector<SuiteEntry> boundary_suite(const LayeredLayout& L, const BaseSpec& B) {
  std::vector<SuiteEntry> out;
  for (const auto& e : projector_suite(L, B, false).entries)
    if (e.truncated) out.push_back(e);
  return out;
}

// Projector weight for exponent j.
inline double prob_of(const State& s, const Observable& o, int j) { return s.outcome_probabilities(o).at(j); }

// Exponent of the ground eigenvalue of an entry, or -1 if not definite.
inline int definite_outcome(const State& s, const Observable& o, double tol = 1e-9) {
  auto pr = s.outcome_probabilities(o);
  for (int j = 0; j < static_cast<int>(pr.size()); ++j)
    if (pr[j] > 1 - tol) return j;
  return -1;
}

}  // namespace s3q
