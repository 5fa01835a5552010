// Code-state preparation, logical representatives, and the column moves of
// the qubit layer: extension by gauging and ejection by Z measurement.
#pragma once

#include "s3q/suite.hpp"

#include <functional>
#include <map>

namespace s3q {

// Reorder the register of s into the given key order.
inline State permuted(const State& s, const std::vector<SiteKey>& order) {
  if (order.size() != s.keys().size()) throw std::invalid_argument("permutation size mismatch");
  std::vector<int> src;
  for (const auto& k : order) src.push_back(s.pos(k));
  State out(s.budget());
  std::vector<int> nd;
  for (int p : src) nd.push_back(s.dims()[p]);
  for (std::size_t i = 0; i < order.size(); ++i) out.add_basis(order[i], nd[i], 0);
  auto& a = out.amplitudes();
  const auto& b = s.amplitudes();
  std::vector<std::size_t> st;
  for (int p : src) st.push_back(s.stride(p));
  const int n = static_cast<int>(order.size());
  std::vector<int> dig(n, 0);
  std::size_t off = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = b[off];
    for (int q = n - 1; q >= 0; --q) {
      if (++dig[q] < nd[q]) {
        off += st[q];
        break;
      }
      off -= st[q] * static_cast<std::size_t>(nd[q] - 1);
      dig[q] = 0;
    }
  }
  return out;
}

inline cplx overlap(const State& a, const State& b) {
  State bb = permuted(b, a.keys());
  return a.inner(a.amplitudes(), bb.amplitudes());
}

inline double fidelity(const State& a, const State& b) { return std::norm(overlap(a, b)); }

// Canonical register: qubit edges, then base edges layer-major.
inline std::vector<std::pair<SiteKey, int>> layout_sites(const LayeredLayout& L, const BaseSpec& B) {
  std::vector<std::pair<SiteKey, int>> s;
  auto g = L.geo();
  for (auto e : g.edges(L.qubit)) s.push_back({qkey(e), 2});
  for (auto e : g.edges(L.base))
    for (int k = 0; k < B.layers; ++k) s.push_back({bkey(e, k), B.order});
  return s;
}

inline State zero_register(const LayeredLayout& L, const BaseSpec& B, std::size_t budget = kDefaultBudget) {
  State s(budget);
  for (auto [k, d] : layout_sites(L, B)) s.add_basis(k, d, 0);
  return s;
}

inline void project_onto(State& s, const Observable& o, int j = 0) {
  s.amplitudes() = s.project(o, j, s.amplitudes());
}

// Projects a zero register onto the joint code space with all Z-type logicals +1.
inline void project_stars(State& s, const LayeredLayout& L, const BaseSpec& B) {
  for (const auto& st : stabilizer_set(L, true))
    if (st.kind == StabKind::qubit_vertex) project_onto(s, abelian_observable(st, B));
  for (int k = 0; k < B.layers; ++k)
    for (const auto& st : stabilizer_set(L, false, k))
      if (st.kind == StabKind::base_vertex) project_onto(s, abelian_observable(st, B));
  s.normalize();
}

// Qubit X-bar on horizontal column k, dressed with the automorphism on base
// edges that carry the same twist as the qubits left of k.
inline Op qubit_xbar(const LayeredLayout& L, const BaseSpec& B, int k) {
  Op o = qubit_string(logical_x_path(L, L.qubit, k).path, gates::X());
  auto g = L.geo();
  for (auto e : g.edges(L.base)) {
    Source s = edge_source(L, e);
    bool dress = (s.kind == Source::Kind::left) || (s.kind == Source::Kind::vertex && s.v.c <= k);
    if (dress) o.factors.push_back(Factor::local(base_sites(B, e), B.automorphism));
  }
  o.label = "Xbar";
  return o;
}

inline Op qubit_zbar(const LayeredLayout& L, int row = 0) {
  Op o = qubit_string(logical_z_path(L, L.qubit, row).path, gates::Z());
  o.label = "Zbar";
  return o;
}

// Base logicals of one layer, conditioned on the twist of each edge relative
// to the right boundary so they stay logical inside the gauged region.
inline Op base_logical(const LayeredLayout& L, const BaseSpec& B, int layer, bool x_type, int power = 1) {
  auto spec = x_type ? logical_x_path(L, L.base, L.base.lo) : logical_z_path(L, L.base);
  Op o;
  Source right{Source::Kind::none, {}};
  for (const auto& e : spec.path) {
    Mat m = x_type ? gates::shift(B.order, power) : gates::clock(B.order, power);
    std::vector<Edge> cond;
    if (!L.qubit.empty()) cond = qubit_path(L, edge_source(L, e), right);
    o.factors.push_back(twisted_factor(B, layer, e, m, cond));
  }
  o.label = x_type ? "Xbar~" : "Zbar~";
  return o;
}

// Global automorphism on all base edges.
inline Op base_automorphism(const LayeredLayout& L, const BaseSpec& B) {
  Op o;
  for (auto e : L.geo().edges(L.base)) o.factors.push_back(Factor::local(base_sites(B, e), B.automorphism));
  o.label = "psi";
  return o;
}

// Encoded state of disjoint (or qubit-only / base-only) codes. amp(a, ks)
// gives the coefficient of qubit logical a and base logical digits ks.
inline State encode(const LayeredLayout& L, const BaseSpec& B,
                    const std::function<cplx(int, const std::vector<int>&)>& amp, std::size_t budget = kDefaultBudget) {
  State ref = zero_register(L, B, budget);
  project_stars(ref, L, B);
  std::vector<cplx> acc(ref.dim(), cplx{});
  int na = L.qubit.empty() ? 1 : 2;
  int nb = L.base.empty() ? 0 : B.layers;
  int combos = 1;
  for (int i = 0; i < nb; ++i) combos *= B.order;
  for (int a = 0; a < na; ++a) {
    for (int c = 0; c < combos; ++c) {
      std::vector<int> ks(nb);
      int r = c;
      for (int i = nb - 1; i >= 0; --i) {
        ks[i] = r % B.order;
        r /= B.order;
      }
      cplx w = amp(a, ks);
      if (std::abs(w) == 0) continue;
      std::vector<cplx> v = ref.amplitudes();
      if (a) v = ref.applied(qubit_xbar(L, B, L.qubit.lo - 1), v);
      for (int i = 0; i < nb; ++i)
        if (ks[i]) v = ref.applied(base_logical(L, B, i, true, ks[i]), v);
      for (std::size_t j = 0; j < v.size(); ++j) acc[j] += w * v[j];
    }
  }
  ref.amplitudes() = acc;
  ref.normalize();
  return ref;
}

// ---- column moves ----------------------------------------------------------

struct StepRecord {
  std::string kind;  // extend, eject, correct
  int column = 0;
  std::vector<int> x_outcomes;  // per row, 1 means X = -1
  std::vector<int> z_horizontal;
  std::vector<int> z_vertical;
  std::vector<int> offsets;  // boundary parity after the step
  std::vector<std::string> feedforward;
  std::string loop = "none";  // none, contractible, deferred, noncontractible
  std::vector<std::string> logical;
};

// Row offsets of the qubit left boundary relative to the standard form.
struct EjectionRecord {
  std::vector<int> offset;
  std::vector<std::vector<int>> history_h;  // per ejected column
  std::vector<std::vector<int>> history_v;
  int noncontractible = 0;
};

// Forced outcomes for tests: key -> outcome.
using ForcedOutcomes = std::map<SiteKey, int>;

inline int forced_of(const ForcedOutcomes* f, const SiteKey& k) {
  if (!f) return -1;
  auto it = f->find(k);
  return it == f->end() ? -1 : it->second;
}

inline void apply_local(State& s, const SiteKey& k, const Mat& m) { s.apply(Factor::local({k}, m)); }

// Couple vertex v (already in the register) to its base edges.
inline void enrich_vertex(State& s, const LayeredLayout& L, const BaseSpec& B, const Vertex& v) {
  for (auto e : L.coupled_edges(v)) {
    std::vector<SiteKey> t{vkey(v)};
    for (auto k : base_sites(B, e)) t.push_back(k);
    s.apply(Factor::local(t, gates::controlled(B.automorphism)));
  }
}

// Add qubit column c = qubit.hi + 1 one vertex row at a time, coupling to the
// base where the windows overlap. X = -1 is corrected by Z on the new
// right-dangling edge of that row.
inline StepRecord extend_right(State& s, LayeredLayout& L, const BaseSpec& B, int c, Rng& rng,
                               const ForcedOutcomes* forced = nullptr) {
  if (L.qubit.empty()) {
    for (int y = 0; y < L.rows; ++y) s.add_basis(qkey({c - 1, y, true}), 2, 0);
    L.qubit = {c, c - 1};
  }
  if (c != L.qubit.hi + 1) throw std::invalid_argument("extension column not adjacent to the qubit window");
  if (c >= L.columns) throw std::invalid_argument("extension column outside layout");
  StepRecord rec;
  rec.kind = "extend";
  rec.column = c;
  L.qubit.hi = c;
  for (int y = 0; y < L.rows; ++y) {
    Vertex v{c, y};
    s.add_plus(vkey(v), 2);
    s.add_basis(qkey({c, y, true}), 2, 0);
    if (y + 1 < L.rows) s.add_basis(qkey({c, y, false}), 2, 0);
    enrich_vertex(s, L, B, v);
    for (auto le : L.geo().star(L.qubit, v)) s.apply(Factor::local({vkey(v), qkey(le.e)}, gates::CX()));
    apply_local(s, vkey(v), gates::H());
    int x = s.measure_level(vkey(v), rng, forced_of(forced, vkey(v)), true);
    rec.x_outcomes.push_back(x);
    if (x) {
      apply_local(s, qkey({c, y, true}), gates::Z());
      rec.feedforward.push_back("Z" + to_string(Edge{c, y, true}));
    }
  }
  return rec;
}

// Static gauging of every column of the qubit window in order.
inline std::vector<StepRecord> gauge_window(State& s, LayeredLayout& L, const BaseSpec& B, Window target, Rng& rng,
                                            const ForcedOutcomes* forced = nullptr) {
  std::vector<StepRecord> out;
  for (int c = target.lo; c <= target.hi; ++c) out.push_back(extend_right(s, L, B, c, rng, forced));
  return out;
}

// Remove qubit column L.qubit.lo. Boundary m anyons are closed by X strings
// unless the next column still carries base couplings; a full line of them
// is the logical and gets X-bar with the automorphism membrane.
inline StepRecord eject_left(State& s, LayeredLayout& L, const BaseSpec& B, EjectionRecord& er, Rng& rng,
                             const ForcedOutcomes* forced = nullptr) {
  if (L.qubit.width() < 2) throw std::invalid_argument("cannot eject the last qubit column");
  int c = L.qubit.lo;
  if (er.offset.empty()) er.offset.assign(L.rows, 0);
  StepRecord rec;
  rec.kind = "eject";
  rec.column = c;
  std::vector<int> m(L.rows);
  for (int y = 0; y < L.rows; ++y) {
    SiteKey k = qkey({c - 1, y, true});
    int h = s.measure_level(k, rng, forced_of(forced, k), true);
    rec.z_horizontal.push_back(h);
    m[y] = h ^ er.offset[y];
  }
  for (int y = 0; y + 1 < L.rows; ++y) {
    SiteKey k = qkey({c, y, false});
    rec.z_vertical.push_back(s.measure_level(k, rng, forced_of(forced, k), true));
  }
  bool coupled = false;
  for (int y = 0; y < L.rows; ++y) {
    auto ce = L.coupled_edges({c, y});
    if (!ce.empty()) coupled = true;
    if (m[y]) {
      for (auto e : ce) {
        s.apply(Factor::local(base_sites(B, e), B.automorphism));
        rec.feedforward.push_back("psi" + to_string(e));
      }
    }
  }
  er.history_h.push_back(rec.z_horizontal);
  er.history_v.push_back(rec.z_vertical);
  L.qubit.lo = c + 1;
  if (coupled) L.ejected_left = true;
  er.offset = m;
  bool all = std::all_of(m.begin(), m.end(), [](int b) { return b == 1; });
  bool any = std::any_of(m.begin(), m.end(), [](int b) { return b == 1; });
  if (all) {
    // full line: X-bar on the far column with the membrane on live couplings
    for (int y = 0; y < L.rows; ++y) apply_local(s, qkey({L.qubit.hi, y, true}), gates::X());
    for (auto e : L.geo().edges(L.base)) {
      if (edge_source(L, e).kind == Source::Kind::vertex) {
        s.apply(Factor::local(base_sites(B, e), B.automorphism));
      }
    }
    rec.loop = "noncontractible";
    rec.logical.push_back("Xbar" + std::to_string(L.qubit.hi) + "+membrane");
    er.noncontractible++;
    er.offset.assign(L.rows, 0);
  } else if (any) {
    bool next_coupled = false;
    for (int y = 0; y < L.rows; ++y) next_coupled = next_coupled || !L.coupled_edges({c + 1, y}).empty();
    if (!next_coupled) {
      for (int y = 0; y < L.rows; ++y) {
        if (m[y]) {
          apply_local(s, qkey({c, y, true}), gates::X());
          rec.feedforward.push_back("X" + to_string(Edge{c, y, true}));
        }
      }
      rec.loop = "contractible";
      er.offset.assign(L.rows, 0);
    } else {
      rec.loop = "deferred";
    }
  }
  rec.offsets = er.offset;
  return rec;
}

// Z-measurement record check: every plaquette whose edges were all removed has
// even parity of -1 outcomes.
inline bool loops_closed(const EjectionRecord& er, int rows) {
  for (std::size_t i = 0; i < er.history_h.size(); ++i) {
    for (int y = 0; y + 1 < rows; ++y) {
      int par = er.history_h[i][y] ^ er.history_h[i][y + 1] ^ er.history_v[i][y];
      if (i > 0) par ^= er.history_v[i - 1][y];
      if (i == 0) continue;  // left side open on the first column
      if (par) return false;
    }
  }
  return true;
}

}  // namespace s3q
