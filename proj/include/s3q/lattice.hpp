// Square-lattice geometry with rough left/right and smooth top/bottom
// boundaries, Abelian Z_n surface-code stabilizers and logical strings.
#pragma once

#include "s3q/group.hpp"
#include "s3q/sim.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace s3q {

struct Vertex {
  int c = 0;
  int y = 0;
  auto operator<=>(const Vertex&) const = default;
};

// h: edge (c,c+1) on row y. !h: edge on column c between rows y and y+1.
struct Edge {
  int c = 0;
  int y = 0;
  bool h = true;
  auto operator<=>(const Edge&) const = default;
};

// columns c..c+1, rows y..y+1
struct Plaq {
  int c = 0;
  int y = 0;
  auto operator<=>(const Plaq&) const = default;
};

inline std::string to_string(const Vertex& v) { return "(" + std::to_string(v.c) + "," + std::to_string(v.y) + ")"; }
inline std::string to_string(const Edge& e) {
  return std::string(e.h ? "h" : "v") + "(" + std::to_string(e.c) + "," + std::to_string(e.y) + ")";
}
inline std::string to_string(const Plaq& p) { return "p(" + std::to_string(p.c) + "," + std::to_string(p.y) + ")"; }

// inclusive range of vertex columns
struct Window {
  int lo = 0;
  int hi = -1;
  bool empty() const { return hi < lo; }
  bool contains(int c) const { return c >= lo && c <= hi; }
  int width() const { return empty() ? 0 : hi - lo + 1; }
  bool operator==(const Window&) const = default;
};

inline SiteKey qkey(const Edge& e) { return {Role::qubit_edge, e.c, e.y, e.h, 0}; }
inline SiteKey bkey(const Edge& e, int k = 0) { return {Role::base_edge, e.c, e.y, e.h, k}; }
inline SiteKey vkey(const Vertex& v) { return {Role::vertex, v.c, v.y, false, 0}; }

enum class Leg { left, up, right, down, top, bottom };

struct LegEdge {
  Leg leg;
  Edge e;
};

// Per-window geometry.
struct Geometry {
  int rows = 2;

  std::vector<Vertex> vertices(Window w) const {
    std::vector<Vertex> v;
    for (int c = w.lo; c <= w.hi; ++c)
      for (int y = 0; y < rows; ++y) v.push_back({c, y});
    return v;
  }
  std::vector<Edge> edges(Window w) const {
    std::vector<Edge> out;
    if (w.empty()) return out;
    for (int c = w.lo - 1; c <= w.hi; ++c)
      for (int y = 0; y < rows; ++y) out.push_back({c, y, true});
    for (int c = w.lo; c <= w.hi; ++c)
      for (int y = 0; y + 1 < rows; ++y) out.push_back({c, y, false});
    return out;
  }
  bool has_edge(Window w, const Edge& e) const {
    if (w.empty() || e.y < 0) return false;
    if (e.h) return e.y < rows && e.c >= w.lo - 1 && e.c <= w.hi;
    return e.y + 1 < rows && w.contains(e.c);
  }
  std::vector<Plaq> plaquettes(Window w) const {
    std::vector<Plaq> p;
    if (w.empty()) return p;
    for (int c = w.lo - 1; c <= w.hi; ++c)
      for (int y = 0; y + 1 < rows; ++y) p.push_back({c, y});
    return p;
  }
  std::vector<LegEdge> star(Window w, const Vertex& v) const {
    std::vector<LegEdge> l;
    auto add = [&](Leg g, Edge e) {
      if (has_edge(w, e)) l.push_back({g, e});
    };
    add(Leg::left, {v.c - 1, v.y, true});
    add(Leg::up, {v.c, v.y - 1, false});
    add(Leg::right, {v.c, v.y, true});
    add(Leg::down, {v.c, v.y, false});
    return l;
  }
  std::vector<LegEdge> plaquette(Window w, const Plaq& p) const {
    std::vector<LegEdge> l;
    auto add = [&](Leg g, Edge e) {
      if (has_edge(w, e)) l.push_back({g, e});
    };
    add(Leg::left, {p.c, p.y, false});
    add(Leg::top, {p.c, p.y, true});
    add(Leg::right, {p.c + 1, p.y, false});
    add(Leg::bottom, {p.c, p.y + 1, true});
    return l;
  }
  // the two endpoints of an edge
  std::pair<Vertex, Vertex> ends(const Edge& e) const {
    if (e.h) return {{e.c, e.y}, {e.c + 1, e.y}};
    return {{e.c, e.y}, {e.c, e.y + 1}};
  }
};

// Exponent pattern of the Z_n stabilizers. Stars carry (+,+,-,-) on
// (left, up, right, down); plaquettes carry (-,+,+,-) on (left, top, right, bottom).
struct SignConvention {
  std::map<Leg, int> star{{Leg::left, 1}, {Leg::up, 1}, {Leg::right, -1}, {Leg::down, -1}};
  std::map<Leg, int> plaq{{Leg::left, -1}, {Leg::top, 1}, {Leg::right, 1}, {Leg::bottom, -1}};
};

enum class StabKind { qubit_vertex, qubit_plaquette, base_vertex, base_plaquette };

struct StabilizerSpec {
  StabKind kind;
  int layer = 0;
  Vertex v;
  Plaq p;
  std::vector<std::pair<Edge, int>> terms;  // edge, power
  bool truncated = false;
  std::string name;
};

// The Z2 layer and the base layers with their active column windows.
struct LayeredLayout {
  int rows = 2;
  int columns = 0;
  Window qubit;
  Window base;
  bool ejected_left = false;  // base couplers left of the qubit window carry the logical twist
  // static patches gauged from a |0> left boundary: uncoupled base edges left
  // of the qubit window take their twist reference from that boundary
  bool left_pinned = false;
  SignConvention signs;

  Geometry geo() const { return Geometry{rows}; }
  // vertex columns whose vertices couple to base edges
  Window coupling() const {
    if (base.empty() || qubit.empty()) return {0, -1};
    return {std::max(qubit.lo, base.lo - 1), std::min(qubit.hi, base.hi)};
  }
  bool overlap() const { return !coupling().empty(); }
  std::vector<Edge> coupled_edges(const Vertex& v) const {
    std::vector<Edge> out;
    auto g = geo();
    for (Edge e : {Edge{v.c, v.y, true}, Edge{v.c, v.y, false}}) {
      if (g.has_edge(base, e)) out.push_back(e);
    }
    return out;
  }
};

inline LayeredLayout build_layout(int rows, int columns, Window qubit, Window base) {
  if (rows < 1) throw std::invalid_argument("rows must be positive");
  if (qubit.empty() && base.empty()) throw std::invalid_argument("empty layout");
  auto inside = [&](Window w) { return w.empty() || (w.lo >= 0 && w.hi < columns); };
  if (!inside(qubit) || !inside(base)) throw std::invalid_argument("window outside columns");
  LayeredLayout l;
  l.rows = rows;
  l.columns = columns;
  l.qubit = qubit;
  l.base = base;
  return l;
}

inline std::vector<StabilizerSpec> stabilizer_set(const LayeredLayout& L, bool qubit_layer, int layer = 0) {
  std::vector<StabilizerSpec> out;
  auto g = L.geo();
  Window w = qubit_layer ? L.qubit : L.base;
  if (w.empty()) return out;
  for (auto v : g.vertices(w)) {
    StabilizerSpec s;
    s.kind = qubit_layer ? StabKind::qubit_vertex : StabKind::base_vertex;
    s.layer = layer;
    s.v = v;
    for (auto le : g.star(w, v)) s.terms.push_back({le.e, L.signs.star.at(le.leg)});
    s.truncated = s.terms.size() < 4;
    s.name = (qubit_layer ? "A" : "At") + to_string(v);
    out.push_back(s);
  }
  for (auto p : g.plaquettes(w)) {
    StabilizerSpec s;
    s.kind = qubit_layer ? StabKind::qubit_plaquette : StabKind::base_plaquette;
    s.layer = layer;
    s.p = p;
    for (auto le : g.plaquette(w, p)) s.terms.push_back({le.e, L.signs.plaq.at(le.leg)});
    s.truncated = s.terms.size() < 4;
    s.name = (qubit_layer ? "B" : "Bt") + to_string(p);
    out.push_back(s);
  }
  return out;
}

// Embed a single-layer matrix into the K base sites of an edge.
inline Mat embed_layer(const BaseSpec& b, int layer, const Mat& m) {
  Mat r = Mat::Identity(1, 1);
  for (int k = 0; k < b.layers; ++k) r = gates::kron(r, k == layer ? m : gates::eye(b.order));
  return r;
}

inline std::vector<SiteKey> base_sites(const BaseSpec& b, const Edge& e) {
  std::vector<SiteKey> s;
  for (int k = 0; k < b.layers; ++k) s.push_back(bkey(e, k));
  return s;
}

// Plain (untwisted) stabilizer as an operator; vertex type uses shifts, plaquette type clocks.
inline Observable abelian_observable(const StabilizerSpec& s, const BaseSpec& b) {
  Observable o;
  o.name = s.name;
  bool q = s.kind == StabKind::qubit_vertex || s.kind == StabKind::qubit_plaquette;
  bool vert = s.kind == StabKind::qubit_vertex || s.kind == StabKind::base_vertex;
  int d = q ? 2 : b.order;
  o.order = d;
  for (auto [e, pw] : s.terms) {
    Mat m = vert ? gates::shift(d, pw) : gates::clock(d, pw);
    if (q) {
      o.op.factors.push_back(Factor::local({qkey(e)}, m));
    } else {
      o.op.factors.push_back(Factor::local({bkey(e, s.layer)}, m));
    }
  }
  o.op.label = s.name;
  return o;
}

// Logical strings of a single layer. Z-type runs along row 0 between the rough
// boundaries, X-type runs down horizontal-edge column k between smooth boundaries.
struct LogicalOperatorSpec {
  std::vector<Edge> path;
  std::vector<int> powers;
  bool x_type = false;
  std::vector<Edge> condition;  // optional qubit Z string
};

inline LogicalOperatorSpec logical_z_path(const LayeredLayout& L, Window w, int row = 0) {
  LogicalOperatorSpec s;
  for (int c = w.lo - 1; c <= w.hi; ++c) {
    s.path.push_back({c, row, true});
    s.powers.push_back(1);
  }
  return s;
}

inline LogicalOperatorSpec logical_x_path(const LayeredLayout& L, Window w, int k) {
  LogicalOperatorSpec s;
  s.x_type = true;
  if (k < w.lo - 1 || k > w.hi) throw std::invalid_argument("logical column outside window");
  for (int y = 0; y < L.rows; ++y) {
    s.path.push_back({k, y, true});
    s.powers.push_back(1);
  }
  return s;
}

inline Op qubit_string(const std::vector<Edge>& path, const Mat& m) {
  Op o;
  for (const auto& e : path) o.factors.push_back(Factor::local({qkey(e)}, m));
  return o;
}

inline Op base_string(const std::vector<Edge>& path, int layer, const Mat& m) {
  Op o;
  for (const auto& e : path) o.factors.push_back(Factor::local({bkey(e, layer)}, m));
  return o;
}

}  // namespace s3q
