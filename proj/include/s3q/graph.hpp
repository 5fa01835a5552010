// Matching graphs on the lattice, path enumeration, exhaustive minimum-weight
// matching, and the Abelian Z_n surface-code decoder built on them.
#pragma once

#include "s3q/lattice.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>

namespace s3q {

inline constexpr int kBoundary = -1;

struct GraphEdge {
  Edge e;
  int a = kBoundary;  // node index or kBoundary
  int b = kBoundary;
  int sa = 1;  // exponent of this edge in the stabilizer at a
  int sb = 1;
};

// Primal graph: nodes are vertices, dangling edges end on the rough boundary.
// Dual graph: nodes are plaquettes, top/bottom rows end on the smooth boundary.
struct MatchGraph {
  bool dual = false;
  std::vector<Vertex> vnodes;
  std::vector<Plaq> pnodes;
  std::vector<GraphEdge> edges;
  std::vector<std::vector<int>> adj;

  int nodes() const { return dual ? static_cast<int>(pnodes.size()) : static_cast<int>(vnodes.size()); }
  int node_of(const Vertex& v) const {
    for (std::size_t i = 0; i < vnodes.size(); ++i)
      if (vnodes[i] == v) return static_cast<int>(i);
    return kBoundary;
  }
  int node_of(const Plaq& p) const {
    for (std::size_t i = 0; i < pnodes.size(); ++i)
      if (pnodes[i] == p) return static_cast<int>(i);
    return kBoundary;
  }
  int edge_index(const Edge& e) const {
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (edges[i].e == e) return static_cast<int>(i);
    return -1;
  }
  int other(int ei, int n) const { return edges[ei].a == n ? edges[ei].b : edges[ei].a; }
  int sign_at(int ei, int n) const { return edges[ei].a == n ? edges[ei].sa : edges[ei].sb; }
};

inline MatchGraph primal_graph(const LayeredLayout& L, Window w) {
  MatchGraph g;
  auto geo = L.geo();
  g.vnodes = geo.vertices(w);
  for (auto e : geo.edges(w)) {
    auto [u, x] = geo.ends(e);
    GraphEdge ge{e};
    int iu = g.node_of(u), ix = g.node_of(x);
    Leg lu = e.h ? Leg::right : Leg::down;
    Leg lx = e.h ? Leg::left : Leg::up;
    if (iu == kBoundary) {
      ge.a = ix;
      ge.sa = L.signs.star.at(lx);
    } else {
      ge.a = iu;
      ge.sa = L.signs.star.at(lu);
      ge.b = ix;
      ge.sb = L.signs.star.at(lx);
    }
    g.edges.push_back(ge);
  }
  g.adj.assign(g.nodes(), {});
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (g.edges[i].a != kBoundary) g.adj[g.edges[i].a].push_back(static_cast<int>(i));
    if (g.edges[i].b != kBoundary) g.adj[g.edges[i].b].push_back(static_cast<int>(i));
  }
  return g;
}

inline MatchGraph dual_graph(const LayeredLayout& L, Window w) {
  MatchGraph g;
  g.dual = true;
  auto geo = L.geo();
  g.pnodes = geo.plaquettes(w);
  for (auto e : geo.edges(w)) {
    GraphEdge ge{e};
    std::vector<std::pair<int, int>> inc;
    if (e.h) {
      int above = g.node_of(Plaq{e.c, e.y - 1});
      int below = g.node_of(Plaq{e.c, e.y});
      if (above != kBoundary) inc.push_back({above, L.signs.plaq.at(Leg::bottom)});
      if (below != kBoundary) inc.push_back({below, L.signs.plaq.at(Leg::top)});
    } else {
      int left = g.node_of(Plaq{e.c - 1, e.y});
      int right = g.node_of(Plaq{e.c, e.y});
      if (left != kBoundary) inc.push_back({left, L.signs.plaq.at(Leg::right)});
      if (right != kBoundary) inc.push_back({right, L.signs.plaq.at(Leg::left)});
    }
    if (inc.empty()) continue;
    ge.a = inc[0].first;
    ge.sa = inc[0].second;
    if (inc.size() > 1) {
      ge.b = inc[1].first;
      ge.sb = inc[1].second;
    }
    g.edges.push_back(ge);
  }
  g.adj.assign(g.nodes(), {});
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    if (g.edges[i].a != kBoundary) g.adj[g.edges[i].a].push_back(static_cast<int>(i));
    if (g.edges[i].b != kBoundary) g.adj[g.edges[i].b].push_back(static_cast<int>(i));
  }
  return g;
}

// A walk from a node to a node or the boundary: node sequence and edges.
struct GraphPath {
  std::vector<int> nodes;  // last entry kBoundary for boundary paths
  std::vector<int> edges;
  double weight = 0;
};

// Hop distances to target (node or kBoundary).
inline std::vector<int> hop_distances(const MatchGraph& g, int target) {
  const int inf = std::numeric_limits<int>::max() / 2;
  std::vector<int> d(g.nodes(), inf);
  std::queue<int> q;
  if (target == kBoundary) {
    for (const auto& e : g.edges) {
      if (e.b == kBoundary && e.a != kBoundary && d[e.a] > 1) {
        d[e.a] = 1;
        q.push(e.a);
      }
    }
  } else {
    d[target] = 0;
    q.push(target);
  }
  while (!q.empty()) {
    int n = q.front();
    q.pop();
    for (int ei : g.adj[n]) {
      int m = g.other(ei, n);
      if (m != kBoundary && d[m] > d[n] + 1) {
        d[m] = d[n] + 1;
        q.push(m);
      }
    }
  }
  return d;
}

// Simple paths from a to b (b may be kBoundary) with at most shortest + extra edges.
inline std::vector<GraphPath> enumerate_paths(const MatchGraph& g, int a, int b, int extra = 2) {
  auto dist = hop_distances(g, b);
  std::vector<GraphPath> out;
  if (dist[a] >= std::numeric_limits<int>::max() / 2) return out;
  int cap = dist[a] + extra;
  GraphPath cur;
  cur.nodes.push_back(a);
  std::vector<char> seen(g.nodes(), 0);
  seen[a] = 1;
  std::function<void(int)> rec = [&](int n) {
    int len = static_cast<int>(cur.edges.size());
    for (int ei : g.adj[n]) {
      int m = g.other(ei, n);
      if (m == kBoundary) {
        if (b == kBoundary && len + 1 <= cap) {
          GraphPath p = cur;
          p.edges.push_back(ei);
          p.nodes.push_back(kBoundary);
          out.push_back(p);
        }
        continue;
      }
      if (seen[m]) continue;
      if (m == b) {
        if (len + 1 <= cap) {
          GraphPath p = cur;
          p.edges.push_back(ei);
          p.nodes.push_back(m);
          out.push_back(p);
        }
        continue;
      }
      if (len + 1 + dist[m] > cap) continue;
      seen[m] = 1;
      cur.edges.push_back(ei);
      cur.nodes.push_back(m);
      rec(m);
      cur.edges.pop_back();
      cur.nodes.pop_back();
      seen[m] = 0;
    }
  };
  rec(a);
  return out;
}

// Cheapest path under a weight; ties broken by fewer edges then enumeration order.
inline std::optional<GraphPath> best_path(const MatchGraph& g, int a, int b,
                                          const std::function<double(const GraphPath&)>& weight, int extra = 2) {
  std::optional<GraphPath> best;
  for (auto& p : enumerate_paths(g, a, b, extra)) {
    p.weight = weight(p);
    if (!best || p.weight < best->weight - 1e-12 ||
        (std::abs(p.weight - best->weight) <= 1e-12 && p.edges.size() < best->edges.size())) {
      best = p;
    }
  }
  return best;
}

// Exhaustive minimum-weight matching with optional boundary partners.
// Returns pairs (i, j) of item indices, j = kBoundary for boundary matches.
inline std::vector<std::pair<int, int>> min_weight_matching(
    int n, const std::function<std::optional<double>(int, int)>& pair_cost,
    const std::function<std::optional<double>(int)>& boundary_cost) {
  std::vector<std::pair<int, int>> best, cur;
  double best_w = std::numeric_limits<double>::infinity();
  std::vector<char> used(n, 0);
  std::function<void(double)> rec = [&](double w) {
    if (w >= best_w - 1e-12) return;
    int i = 0;
    while (i < n && used[i]) ++i;
    if (i == n) {
      best_w = w;
      best = cur;
      return;
    }
    used[i] = 1;
    // pairs first: on equal weight an internal pairing wins over the boundary
    for (int j = i + 1; j < n; ++j) {
      if (used[j]) continue;
      auto pc = pair_cost(i, j);
      if (!pc) continue;
      used[j] = 1;
      cur.push_back({i, j});
      rec(w + *pc);
      cur.pop_back();
      used[j] = 0;
    }
    if (auto bc = boundary_cost(i)) {
      cur.push_back({i, kBoundary});
      rec(w + *bc);
      cur.pop_back();
    }
    used[i] = 0;
  };
  rec(0.0);
  if (n > 0 && best.empty()) throw std::runtime_error("no admissible matching");
  return best;
}

// Powers along a path moving charge q from its first node: the shift a
// power c on edge e causes at node n is kappa * sign * c.
inline std::vector<int> transport_powers(const MatchGraph& g, const GraphPath& p, int q, int order, int kappa) {
  std::vector<int> pw;
  int need = q;  // remaining charge at the current node
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    int n = p.nodes[i];
    int s = kappa * g.sign_at(p.edges[i], n);
    int c = ((-need * s) % order + order) % order;  // s = +-1 is its own inverse
    pw.push_back(c);
    int m = p.nodes[i + 1];
    if (m == kBoundary) break;
    need = ((kappa * g.sign_at(p.edges[i], m) * c) % order + order) % order;
  }
  return pw;
}

// ---- Abelian decoder --------------------------------------------------------

struct AbelianCorrection {
  Op op;
  std::vector<std::pair<Edge, int>> terms;  // edge, power
  std::vector<std::pair<int, int>> matching;
};

class SyndromeParityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// charges: node -> exponent (nonzero). Plaquette syndromes are fixed by
// shift-type strings on the dual graph, vertex syndromes by clock-type strings.
inline AbelianCorrection abelian_decode(const LayeredLayout& L, const std::map<int, int>& charges, bool qubit_layer,
                                        bool plaquette_type, int order = 2, int layer = 0, int layers = 1) {
  Window w = qubit_layer ? L.qubit : L.base;
  MatchGraph g = plaquette_type ? dual_graph(L, w) : primal_graph(L, w);
  std::vector<std::pair<int, int>> items(charges.begin(), charges.end());
  for (auto& it : items) it.second = ((it.second % order) + order) % order;
  std::erase_if(items, [](auto& it) { return it.second == 0; });
  int kappa = plaquette_type ? 1 : -1;
  auto hops = [&](const GraphPath& p) { return static_cast<double>(p.edges.size()); };
  int n = static_cast<int>(items.size());
  auto pc = [&](int i, int j) -> std::optional<double> {
    if ((items[i].second + items[j].second) % order != 0) return std::nullopt;
    auto p = best_path(g, items[i].first, items[j].first, hops, 0);
    if (!p) return std::nullopt;
    return p->weight;
  };
  auto bc = [&](int i) -> std::optional<double> {
    auto p = best_path(g, items[i].first, kBoundary, hops, 0);
    if (!p) return std::nullopt;
    return p->weight;
  };
  AbelianCorrection out;
  try {
    out.matching = min_weight_matching(n, pc, bc);
  } catch (const std::runtime_error&) {
    throw SyndromeParityError("unmatched syndrome charge");
  }
  std::map<Edge, int> acc;
  for (auto [i, j] : out.matching) {
    auto p = best_path(g, items[i].first, j == kBoundary ? kBoundary : items[j].first, hops, 0);
    auto pw = transport_powers(g, *p, items[i].second, order, kappa);
    for (std::size_t k = 0; k < pw.size(); ++k) acc[g.edges[p->edges[k]].e] += pw[k];
  }
  for (auto& [e, c] : acc) {
    c = ((c % order) + order) % order;
    if (!c) continue;
    out.terms.push_back({e, c});
    Mat m = plaquette_type ? gates::shift(order, c) : gates::clock(order, c);
    if (qubit_layer) {
      out.op.factors.push_back(Factor::local({qkey(e)}, m));
    } else {
      (void)layers;
      out.op.factors.push_back(Factor::local({bkey(e, layer)}, m));
    }
  }
  out.op.label = "abelian-correction";
  return out;
}

}  // namespace s3q
