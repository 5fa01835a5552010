// Noise on static gauged patches: error injection, single-error syndrome
// oracle, adaptive non-Abelian fusion, the staged heralded decoder, and the
// Monte Carlo harness with an exact and a syndrome-level backend.
#pragma once

#include "s3q/anyons.hpp"
#include "s3q/graph.hpp"

#include <array>
#include <deque>
#include <numbers>

namespace s3q {

// ---- static patches ---------------------------------------------------------

struct StaticPatch {
  LayeredLayout L;
  State ground;
};

// Base code encoded, then the qubit window gauged in column by column. With
// probe set the logical state is generic (no logical Pauli eigenstate), so
// fidelity with it detects every logical error; this needs every base edge
// driven by a live qubit vertex.
inline StaticPatch static_patch(int rows, int columns, Window qubit, Window base, const BaseSpec& B,
                                std::uint64_t seed = 1, bool probe = false, std::size_t budget = kDefaultBudget) {
  auto L = build_layout(rows, columns, {0, -1}, base);
  L.left_pinned = true;
  std::function<cplx(int, const std::vector<int>&)> amp = [](int a, const std::vector<int>& ks) {
    return (a == 0 && std::ranges::all_of(ks, [](int k) { return k == 0; })) ? cplx{1} : cplx{};
  };
  if (probe) {
    amp = [](int a, const std::vector<int>& ks) {
      if (a) return cplx{};
      cplx w{1};
      for (int k : ks) w *= std::array<cplx, 3>{cplx{0.8, 0}, cplx{0.3, 0.4}, cplx{-0.2, 0.25}}[k];
      return w;
    };
  }
  State s = encode(L, B, amp, budget);
  Rng rng(seed);
  gauge_window(s, L, B, qubit, rng);
  if (probe) {
    for (auto e : L.geo().edges(L.base))
      if (edge_source(L, e).kind != Source::Kind::vertex)
        throw std::invalid_argument("probe state needs the qubit window to cover every base coupling");
    // cos t + i sin t Xbar
    const double t = 0.4;
    auto x = s.applied(qubit_xbar(L, B, L.qubit.lo - 1), s.amplitudes());
    for (std::size_t i = 0; i < x.size(); ++i) s.amplitudes()[i] = std::cos(t) * s.amplitudes()[i] + cplx{0, std::sin(t)} * x[i];
    s.normalize();
  }
  return {L, std::move(s)};
}

// ---- measurement plumbing ---------------------------------------------------

using Measurer = std::function<int(State&, const Observable&)>;

inline Measurer rng_measurer(Rng& rng) {
  return [&rng](State& s, const Observable& o) { return s.measure(o, rng); };
}

// Replays forced outcomes, then takes the first allowed outcome and records
// the untaken ones so a driver can enumerate every branch.
struct BranchScript {
  std::vector<int> forced;
  std::vector<std::vector<int>> taken_then_open;  // per measurement past the prefix: open outcomes
  std::vector<double> weights;                    // outcome probability per measurement
  std::size_t pos = 0;

  Measurer measurer() {
    return [this](State& s, const Observable& o) {
      auto pr = s.outcome_probabilities(o);
      int out;
      if (pos < forced.size()) {
        out = forced[pos];
        taken_then_open.push_back({});
      } else {
        std::vector<int> ok;
        for (int j = 0; j < static_cast<int>(pr.size()); ++j)
          if (pr[j] > 1e-10) ok.push_back(j);
        if (ok.empty()) throw std::runtime_error("no allowed outcome for " + o.name);
        out = ok[0];
        taken_then_open.push_back(std::vector<int>(ok.begin() + 1, ok.end()));
        forced.push_back(out);
      }
      weights.push_back(pr.at(out));
      Rng dummy(0);
      s.measure(o, dummy, out);
      ++pos;
      return out;
    };
  }
};

// Runs body once per measurement branch with nonzero weight. body receives a
// measurer and returns nothing; branch_done receives the outcome list and the
// branch probability.
inline int for_each_branch(const std::function<void(const Measurer&)>& body,
                           const std::function<void(const std::vector<int>&, double)>& branch_done,
                           int max_branches = 4096) {
  std::deque<std::vector<int>> todo{{}};
  int n = 0;
  while (!todo.empty()) {
    if (++n > max_branches) throw std::runtime_error("branch limit exceeded");
    BranchScript sc;
    sc.forced = todo.front();
    todo.pop_front();
    std::size_t prefix = sc.forced.size();
    body(sc.measurer());
    for (std::size_t i = prefix; i < sc.taken_then_open.size(); ++i) {
      for (int alt : sc.taken_then_open[i]) {
        std::vector<int> f(sc.forced.begin(), sc.forced.begin() + static_cast<long>(i));
        f.push_back(alt);
        todo.push_back(f);
      }
    }
    double w = 1;
    for (double x : sc.weights) w *= x;
    branch_done(sc.forced, w);
  }
  return n;
}

inline Observable z_parity(const std::vector<SiteKey>& keys, const std::string& name = "Zpar") {
  Observable o;
  o.order = 2;
  o.name = name;
  for (const auto& k : keys) o.op.factors.push_back(Factor::local({k}, gates::Z()));
  return o;
}

// ---- errors -----------------------------------------------------------------

struct ErrorModel {
  double px = 0;   // qubit X
  double pz = 0;   // qubit Z
  double pxq = 0;  // qutrit shift, power +-1
  double pzq = 0;  // qutrit clock, power +-1

  void validate() const {
    for (double p : {px, pz, pxq, pzq})
      if (!(p >= 0 && p <= 0.5)) throw std::invalid_argument("error rates must lie in [0, 1/2]");
  }
  bool zero() const { return px == 0 && pz == 0 && pxq == 0 && pzq == 0; }
};

enum class ErrorKind { X, Z, Xq, Zq };

inline std::string kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::X: return "X";
    case ErrorKind::Z: return "Z";
    case ErrorKind::Xq: return "Xq";
    case ErrorKind::Zq: return "Zq";
  }
  return "?";
}

struct ErrorEvent {
  ErrorKind kind = ErrorKind::X;
  Edge e;
  int power = 1;
  bool qubit() const { return kind == ErrorKind::X || kind == ErrorKind::Z; }
};

inline std::string to_string(const ErrorEvent& ev) {
  std::string s = kind_name(ev.kind);
  if (!ev.qubit() && ev.power != 1) s += "^" + std::to_string(ev.power);
  return s + to_string(ev.e);
}

// Record of injected errors. Decoder entry points never take this type.
class HiddenErrorLog {
 public:
  void record(const ErrorEvent& e) { events_.push_back(e); }
  std::size_t size() const { return events_.size(); }
  const std::vector<ErrorEvent>& reveal() const { return events_; }

 private:
  std::vector<ErrorEvent> events_;
};

inline Op error_op(const BaseSpec& B, const ErrorEvent& ev) {
  Op o;
  o.label = to_string(ev);
  switch (ev.kind) {
    case ErrorKind::X: o.factors.push_back(Factor::local({qkey(ev.e)}, gates::X())); break;
    case ErrorKind::Z: o.factors.push_back(Factor::local({qkey(ev.e)}, gates::Z())); break;
    case ErrorKind::Xq:
      o.factors.push_back(Factor::local(base_sites(B, ev.e), embed_layer(B, 0, gates::shift(B.order, ev.power))));
      break;
    case ErrorKind::Zq:
      o.factors.push_back(Factor::local(base_sites(B, ev.e), embed_layer(B, 0, gates::clock(B.order, ev.power))));
      break;
  }
  return o;
}

inline bool in_region(const LayeredLayout& L, const ErrorEvent& ev) {
  auto g = L.geo();
  return ev.qubit() ? g.has_edge(L.qubit, ev.e) : g.has_edge(L.base, ev.e);
}

// Draws iid errors over every edge of the patch, in a fixed site order.
inline std::vector<ErrorEvent> sample_errors(const LayeredLayout& L, const ErrorModel& m, Rng& rng) {
  m.validate();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ErrorEvent> out;
  auto g = L.geo();
  for (auto e : g.edges(L.qubit)) {
    if (u(rng) < m.px) out.push_back({ErrorKind::X, e, 1});
    if (u(rng) < m.pz) out.push_back({ErrorKind::Z, e, 1});
  }
  for (auto e : g.edges(L.base)) {
    if (u(rng) < m.pxq) out.push_back({ErrorKind::Xq, e, u(rng) < 0.5 ? 1 : 2});
    if (u(rng) < m.pzq) out.push_back({ErrorKind::Zq, e, u(rng) < 0.5 ? 1 : 2});
  }
  return out;
}

inline HiddenErrorLog inject_errors(State& s, const LayeredLayout& L, const BaseSpec& B, const ErrorModel& m, Rng& rng) {
  HiddenErrorLog log;
  for (const auto& ev : sample_errors(L, m, rng)) {
    s.apply(error_op(B, ev));
    log.record(ev);
  }
  return log;
}

inline void apply_error(State& s, const LayeredLayout& L, const BaseSpec& B, const ErrorEvent& ev) {
  if (!in_region(L, ev)) throw std::invalid_argument("error location outside region: " + to_string(ev));
  s.apply(error_op(B, ev));
}

// ---- single-error syndrome oracle ------------------------------------------

struct SyndromeMarginal {
  Family family;
  Vertex v;
  Plaq p;
  std::string name;
  std::vector<double> prob;  // over exponents
};

struct SyndromeDistribution {
  ErrorEvent error;
  std::vector<SyndromeMarginal> marginals;  // every A, B, At, Bt entry

  const SyndromeMarginal* find(const std::string& name) const {
    for (const auto& m : marginals)
      if (m.name == name) return &m;
    return nullptr;
  }
  std::vector<const SyndromeMarginal*> nontrivial(double tol = 1e-12) const {
    std::vector<const SyndromeMarginal*> r;
    for (const auto& m : marginals)
      if (m.prob[0] < 1 - tol) r.push_back(&m);
    return r;
  }
};

// Exponent s with m = base^s, or -1.
inline int power_of(const Mat& m, int order, bool shift_type) {
  for (int s = 0; s < order; ++s) {
    Mat r = shift_type ? gates::shift(order, s) : gates::clock(order, s);
    if (r.rows() == m.rows() && (r - m).cwiseAbs().maxCoeff() < 1e-12) return s;
  }
  return -1;
}

inline bool oracle_family(Family f) { return f == Family::A || f == Family::B || f == Family::At || f == Family::Bt; }

inline std::vector<double> delta(int order, int j) {
  std::vector<double> p(order, 0.0);
  p[((j % order) + order) % order] = 1;
  return p;
}

// Operator-algebra derivation: deterministic phases from unconditioned legs,
// a 1/2 split from legs conditioned on a fresh qubit parity, uniform values
// from legs whose condition the error flips, 1/2 for stars conjugating it.
inline SyndromeDistribution syndrome_oracle(const ErrorEvent& ev, const LayeredLayout& L, const BaseSpec& B) {
  if (!in_region(L, ev)) throw std::invalid_argument("error location outside region: " + to_string(ev));
  if (B.layers != 1) throw std::invalid_argument("oracle covers single-layer bases");
  SyndromeDistribution d;
  d.error = ev;
  const int n = B.order;
  const auto suite = projector_suite(L, B, false);
  auto qk = qkey(ev.e);
  auto bk = bkey(ev.e);
  for (const auto& en : suite.entries) {
    if (!oracle_family(en.family)) continue;
    SyndromeMarginal m{en.family, en.v, en.p, en.obs.name, delta(en.obs.order, 0)};
    for (const auto& f : en.obs.op.factors) {
      bool on_target = std::ranges::find(f.targets, ev.qubit() ? qk : bk) != f.targets.end();
      bool on_cond = std::ranges::find(f.cond, qk) != f.cond.end();
      if (ev.kind == ErrorKind::X) {
        if (on_target && en.family == Family::B) m.prob = delta(2, 1);
        if (on_cond) m.prob = std::vector<double>(n, 1.0 / n);
      } else if (ev.kind == ErrorKind::Z) {
        if (on_target && en.family == Family::A) m.prob = delta(2, 1);
      } else if (on_target) {
        if (en.family == Family::A) {
          m.prob = {0.5, 0.5};
          continue;
        }
        bool clock_err = ev.kind == ErrorKind::Zq;
        bool vertex_entry = en.family == Family::At;
        if (clock_err != vertex_entry) continue;  // same type commutes
        int s = power_of(f.plus, n, vertex_entry);
        int shift = vertex_entry ? -ev.power * s : ev.power * s;
        if (f.cond.empty()) {
          m.prob = delta(n, shift);
        } else {
          m.prob.assign(n, 0.0);
          m.prob[((shift % n) + n) % n] += 0.5;
          m.prob[((-shift % n) + n) % n] += 0.5;
        }
      }
    }
    d.marginals.push_back(m);
  }
  return d;
}

// The same marginals read off the state after applying the error.
inline SyndromeDistribution exact_syndromes(const State& ground, const ErrorEvent& ev, const LayeredLayout& L,
                                            const BaseSpec& B) {
  SyndromeDistribution d;
  d.error = ev;
  State s = ground;
  apply_error(s, L, B, ev);
  for (const auto& en : projector_suite(L, B, false).entries) {
    if (!oracle_family(en.family)) continue;
    d.marginals.push_back({en.family, en.v, en.p, en.obs.name, s.outcome_probabilities(en.obs)});
  }
  return d;
}

inline double max_difference(const SyndromeDistribution& a, const SyndromeDistribution& b) {
  double m = 0;
  for (const auto& x : a.marginals) {
    const auto* y = b.find(x.name);
    if (!y) return std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < x.prob.size(); ++j) m = std::max(m, std::abs(x.prob[j] - y->prob.at(j)));
  }
  return m;
}

// Born sampling: every non-deterministic marginal is measured on fresh
// copies of the errored state and compared with its exact weights.
struct SampledMarginal {
  std::string name;
  std::vector<double> exact;
  std::vector<int> counts;
  int shots = 0;
  double max_z = 0;  // worst |freq - p| / sigma over outcomes
  bool within(double nsigma = 3) const { return max_z <= nsigma; }
};

inline std::vector<SampledMarginal> sample_marginals(const State& ground, const ErrorEvent& ev, const LayeredLayout& L,
                                                     const BaseSpec& B, int shots, std::uint64_t seed) {
  State errored = ground;
  apply_error(errored, L, B, ev);
  std::vector<SampledMarginal> out;
  Rng rng(seed);
  for (const auto& en : projector_suite(L, B, false).entries) {
    if (!oracle_family(en.family)) continue;
    auto p = errored.outcome_probabilities(en.obs);
    if (*std::ranges::max_element(p) > 1 - 1e-12) continue;
    SampledMarginal m{en.obs.name, p, std::vector<int>(p.size(), 0), shots, 0};
    for (int t = 0; t < shots; ++t) {
      State s = errored;
      ++m.counts[s.measure(en.obs, rng)];
    }
    for (std::size_t j = 0; j < p.size(); ++j) {
      double f = static_cast<double>(m.counts[j]) / shots;
      double sd = std::sqrt(p[j] * (1 - p[j]) / shots);
      double z = sd > 0 ? std::abs(f - p[j]) / sd : (std::abs(f - p[j]) > 0 ? std::numeric_limits<double>::infinity() : 0);
      m.max_z = std::max(m.max_z, z);
    }
    out.push_back(std::move(m));
  }
  return out;
}

// ---- adaptive fusion ----------------------------------------------------------

enum class FusionKind { C, F };

struct FusionStep {
  int node = 0;
  int measured = 0;
  int condition = -1;  // measured parity of the leg's condition, -1 if none
  int power = 0;       // correction power applied on the step edge
  Edge e;
};

struct FusionResult {
  std::vector<FusionStep> steps;
  bool to_boundary = false;
  int end_exponent = 0;          // at the far endpoint after fusion
  std::vector<Vertex> touched;   // stars that may now hold B anyons
  bool vacuum() const { return to_boundary || end_exponent == 0; }
};

// Walks the path: measure the current node, cancel its charge with a clock
// (C) or shift (F) power on the next edge, reading the leg's condition by a
// Z-parity measurement when it has one.
inline FusionResult fuse_nonabelian_pair(State& s, const LayeredLayout& L, const BaseSpec& B, const ProjectorSuite& suite,
                                         const MatchGraph& g, const GraphPath& path, FusionKind kind,
                                         const Measurer& meas, const SyndromeRecord* record = nullptr) {
  if (B.order != 3 || B.layers != 1) throw std::invalid_argument("adaptive fusion is defined for S3");
  if (record && !record->nontrivial(Family::B).empty())
    throw StageOrderError("fusion with B_p = -1 present");
  Family fam = kind == FusionKind::C ? Family::At : Family::Bt;
  auto entry_of = [&](int node) {
    const SuiteEntry* e = kind == FusionKind::C ? suite.at(fam, g.vnodes.at(node)) : suite.at(fam, g.pnodes.at(node));
    if (!e) throw std::invalid_argument("fusion path leaves the base window");
    return e;
  };
  FusionResult r;
  for (std::size_t i = 0; i < path.edges.size(); ++i) {
    int node = path.nodes[i];
    const auto* en = entry_of(node);
    FusionStep st;
    st.node = node;
    st.e = g.edges[path.edges[i]].e;
    st.measured = meas(s, en->obs);
    if (st.measured) {
      auto sites = base_sites(B, st.e);
      const Factor* f = nullptr;
      for (const auto& x : en->obs.op.factors)
        if (x.targets == sites) f = &x;
      if (!f) throw std::logic_error("path edge is not a leg of " + en->obs.name);
      int sp = power_of(f->plus, 3, kind == FusionKind::C);
      int sigma = 1;
      if (!f->cond.empty()) {
        st.condition = meas(s, z_parity(f->cond));
        sigma = st.condition ? -1 : 1;
        for (const auto& k : f->cond) {
          Edge q{k.c, k.y, k.h};
          auto [a, b] = L.geo().ends(q);
          r.touched.push_back(a);
          r.touched.push_back(b);
        }
      }
      int seff = ((sp * sigma) % 3 + 3) % 3;
      int c = kind == FusionKind::C ? st.measured * seff : -st.measured * seff;
      c = ((c % 3) + 3) % 3;
      st.power = c;
      Mat m = kind == FusionKind::C ? gates::clock(3, c) : gates::shift(3, c);
      s.apply(Factor::local(sites, m));
      r.touched.push_back(coupler(st.e));
    }
    r.steps.push_back(st);
  }
  int last = path.nodes.back();
  if (last == kBoundary) {
    r.to_boundary = true;
  } else {
    r.end_exponent = meas(s, entry_of(last)->obs);
  }
  std::ranges::sort(r.touched);
  r.touched.erase(std::unique(r.touched.begin(), r.touched.end()), r.touched.end());
  return r;
}

// ---- heralded B_p stage -----------------------------------------------------

struct HeraldedCorrection {
  Op op;
  std::vector<Edge> edges;
  std::vector<GraphPath> paths;
  int heralds_used = 0;
};

// Star entries whose condition contains each qubit edge.
inline std::map<Edge, std::vector<Vertex>> herald_map(const ProjectorSuite& suite) {
  std::map<Edge, std::vector<Vertex>> h;
  for (const auto* en : suite.of(Family::At)) {
    for (const auto& f : en->obs.op.factors)
      for (const auto& k : f.cond) {
        auto& v = h[Edge{k.c, k.y, k.h}];
        if (std::ranges::find(v, en->v) == v.end()) v.push_back(en->v);
      }
  }
  return h;
}

inline constexpr double kLog3 = 1.0986122886681098;
inline constexpr double kLog2 = 0.6931471805599453;

// Pairs B_p = -1 plaquettes (or sends them to the smooth boundary) along
// paths weighted by length minus co-located Ã_v heralds.
inline HeraldedCorrection decode_Bp(SyndromeRecord& rec, const LayeredLayout& L, const ProjectorSuite& suite,
                                    int extra = 2) {
  HeraldedCorrection out;
  out.op.label = "Bp-correction";
  auto flux = rec.nontrivial(Family::B);
  if (flux.empty()) return out;
  auto g = dual_graph(L, L.qubit);
  auto hm = herald_map(suite);
  std::set<Vertex> heralds;
  for (const auto& e : rec.nontrivial(Family::At)) heralds.insert(e.v);
  auto weight = [&](const GraphPath& p) {
    std::set<Vertex> hit;
    for (int ei : p.edges) {
      auto it = hm.find(g.edges[ei].e);
      if (it == hm.end()) continue;
      for (const auto& v : it->second)
        if (heralds.count(v)) hit.insert(v);
    }
    return kLog3 * (static_cast<double>(p.edges.size()) - static_cast<double>(hit.size()));
  };
  std::vector<int> nodes;
  for (const auto& e : flux) nodes.push_back(g.node_of(e.p));
  auto path_between = [&](int i, int j) {
    return best_path(g, nodes[i], j == kBoundary ? kBoundary : nodes[j], weight, extra);
  };
  auto pc = [&](int i, int j) -> std::optional<double> {
    auto p = path_between(i, j);
    return p ? std::optional<double>(p->weight) : std::nullopt;
  };
  auto bc = [&](int i) -> std::optional<double> {
    auto p = path_between(i, kBoundary);
    return p ? std::optional<double>(p->weight) : std::nullopt;
  };
  std::vector<std::pair<int, int>> match;
  try {
    match = min_weight_matching(static_cast<int>(nodes.size()), pc, bc);
  } catch (const std::runtime_error&) {
    throw SyndromeParityError("odd unmatched B_p parity off-boundary");
  }
  std::map<Edge, int> par;
  for (auto [i, j] : match) {
    auto p = *path_between(i, j);
    for (int ei : p.edges) par[g.edges[ei].e] ^= 1;
    std::set<Vertex> hit;
    for (int ei : p.edges) {
      auto it = hm.find(g.edges[ei].e);
      if (it == hm.end()) continue;
      for (const auto& v : it->second)
        if (heralds.count(v)) hit.insert(v);
    }
    out.heralds_used += static_cast<int>(hit.size());
    out.paths.push_back(p);
  }
  for (auto [e, b] : par) {
    if (!b) continue;
    out.edges.push_back(e);
    out.op.factors.push_back(Factor::local({qkey(e)}, gates::X()));
  }
  for (auto& e : rec.entries)
    if (e.family == Family::B) e.exponent = 0;
  return out;
}

// ---- decoding round -----------------------------------------------------------

struct StageStats {
  int b_flux = 0;
  int heralds = 0;
  int heralds_used = 0;
  int x_corrections = 0;
  int c_anyons = 0;
  int f_anyons = 0;
  int fusion_rounds = 0;
  int fusions = 0;
  int b_anyons = 0;
  int z_corrections = 0;
};

struct DecoderReport {
  bool success = false;
  bool residual_logical = false;
  std::string failure;
  StageStats stats;
};

inline std::vector<SiteKey> keys_of(const Op& o) {
  std::vector<SiteKey> k;
  for (const auto& f : o.factors) k.insert(k.end(), f.targets.begin(), f.targets.end());
  return k;
}

// Ground-space check: every A, B, At, Bt entry at +1 within tol.
inline bool in_ground_space(const State& s, const ProjectorSuite& suite, double tol = 1e-6) {
  for (const auto& en : suite.entries) {
    if (!oracle_family(en.family)) continue;
    if (prob_of(s, en.obs, 0) < 1 - tol) return false;
  }
  return true;
}

// Stage order: B_p with Ã_v heralds -> Ã_v / B̃_p fusion rounds -> A_v matching.
inline DecoderReport decode_round(State& s, const LayeredLayout& L, const BaseSpec& B, const Measurer& meas,
                                  int max_rounds = 6) {
  DecoderReport rep;
  const auto suite = projector_suite(L, B, false);
  try {
    SyndromeRecord rec;
    for (const auto* e : suite.of(Family::B)) rec.entries.push_back({Family::B, {}, e->p, 0, meas(s, e->obs)});
    for (const auto* e : suite.of(Family::At)) rec.entries.push_back({Family::At, e->v, {}, 0, meas(s, e->obs)});
    rep.stats.b_flux = static_cast<int>(rec.nontrivial(Family::B).size());
    rep.stats.heralds = static_cast<int>(rec.nontrivial(Family::At).size());
    auto hc = decode_Bp(rec, L, suite);
    s.apply(hc.op);
    rep.stats.x_corrections = static_cast<int>(hc.edges.size());
    rep.stats.heralds_used = hc.heralds_used;

    auto pg = primal_graph(L, L.base);
    auto dg = dual_graph(L, L.base);
    auto hops2 = [](const GraphPath& p) { return kLog2 * static_cast<double>(p.edges.size()); };
    bool clean = false;
    for (int round = 0; round < max_rounds && !clean; ++round) {
      SyndromeRecord r2;
      for (const auto* e : suite.of(Family::At)) r2.entries.push_back({Family::At, e->v, {}, 0, meas(s, e->obs)});
      for (const auto* e : suite.of(Family::Bt)) r2.entries.push_back({Family::Bt, {}, e->p, 0, meas(s, e->obs)});
      auto cs = r2.nontrivial(Family::At);
      auto fs = r2.nontrivial(Family::Bt);
      if (round == 0) {
        rep.stats.c_anyons = static_cast<int>(cs.size());
        rep.stats.f_anyons = static_cast<int>(fs.size());
      }
      if (cs.empty() && fs.empty()) {
        clean = true;
        break;
      }
      ++rep.stats.fusion_rounds;
      auto run = [&](const MatchGraph& g, const std::vector<int>& nodes, FusionKind kind) {
        auto pc = [&](int i, int j) -> std::optional<double> {
          auto p = best_path(g, nodes[i], nodes[j], hops2, 0);
          return p ? std::optional<double>(p->weight) : std::nullopt;
        };
        auto bc = [&](int i) -> std::optional<double> {
          auto p = best_path(g, nodes[i], kBoundary, hops2, 0);
          return p ? std::optional<double>(p->weight) : std::nullopt;
        };
        for (auto [i, j] : min_weight_matching(static_cast<int>(nodes.size()), pc, bc)) {
          auto p = best_path(g, nodes[i], j == kBoundary ? kBoundary : nodes[j], hops2, 0);
          fuse_nonabelian_pair(s, L, B, suite, g, *p, kind, meas);
          ++rep.stats.fusions;
        }
      };
      std::vector<int> cn, fn;
      for (const auto& e : cs) cn.push_back(pg.node_of(e.v));
      for (const auto& e : fs) fn.push_back(dg.node_of(e.p));
      run(pg, cn, FusionKind::C);
      run(dg, fn, FusionKind::F);
    }
    if (!clean) {
      rep.failure = "non-Abelian syndromes unresolved";
      return rep;
    }

    std::map<int, int> charges;
    auto qg = primal_graph(L, L.qubit);
    for (const auto* e : suite.of(Family::A)) {
      int x = meas(s, e->obs);
      if (x) charges[qg.node_of(e->v)] = 1;
    }
    rep.stats.b_anyons = static_cast<int>(charges.size());
    auto zc = abelian_decode(L, charges, true, false, 2);
    s.apply(zc.op);
    rep.stats.z_corrections = static_cast<int>(zc.terms.size());
  } catch (const SyndromeParityError& e) {
    rep.failure = e.what();
    return rep;
  }
  rep.success = in_ground_space(s, suite);
  if (!rep.success) rep.failure = "suite not restored";
  return rep;
}

// ---- syndrome-level backend ---------------------------------------------------

// Tracks net error chains instead of amplitudes. Syndromes are drawn from the
// single-error oracle rules: conditioned legs carry a per-leg frame sign
// sampled once, legs whose condition a net X chain flips carry a uniform
// twist charge held while the flip persists, stars whose coupled edges carry
// a net qutrit chain give +-1 with probability 1/2, and a parity readout
// flips the stars at both ends of its path with probability 1/2.
class SyndromeSim {
 public:
  SyndromeSim(const LayeredLayout& L, const BaseSpec& B, std::uint64_t seed)
      : L_(L), B_(B), suite_(projector_suite(L, B, false)), rng_(seed) {}

  const ProjectorSuite& suite() const { return suite_; }
  const LayeredLayout& layout() const { return L_; }

  void apply(const ErrorEvent& ev) {
    switch (ev.kind) {
      case ErrorKind::X: xq_[ev.e] ^= 1; break;
      case ErrorKind::Z: zq_[ev.e] ^= 1; break;
      case ErrorKind::Xq: bx_[ev.e] = mod3(bx_[ev.e] + ev.power); break;
      case ErrorKind::Zq: bz_[ev.e] = mod3(bz_[ev.e] + ev.power); break;
    }
  }

  int outcome(const SuiteEntry& en) {
    std::size_t idx = static_cast<std::size_t>(&en - suite_.entries.data());
    if (en.family == Family::B) {
      int p = 0;
      for (const auto& f : en.obs.op.factors) p ^= xq_[edge_of(f.targets[0])];
      return p;
    }
    if (en.family == Family::A) {
      int p = 0;
      bool stirred = false;
      for (const auto& f : en.obs.op.factors) {
        Edge e = edge_of(f.targets[0]);
        if (f.targets[0].role == Role::qubit_edge) {
          p ^= zq_[e];
        } else if (get(bx_, e) || get(bz_, e)) {
          stirred = true;
        }
      }
      if (stirred) {
        auto it = acoin_.find(en.v);
        if (it == acoin_.end()) it = acoin_.emplace(en.v, coin()).first;
        p ^= it->second;
      }
      auto fl = aflip_.find(en.v);
      if (fl != aflip_.end()) p ^= fl->second;
      return p;
    }
    bool vertex_entry = en.family == Family::At;
    int x = 0;
    for (std::size_t k = 0; k < en.obs.op.factors.size(); ++k) {
      const auto& f = en.obs.op.factors[k];
      Edge e = edge_of(f.targets[0]);
      int s = power_of(f.plus, 3, vertex_entry);
      int flip = 0;
      for (const auto& c : f.cond) flip ^= xq_[edge_of(c)];
      auto key = std::make_pair(idx, k);
      if (flip) {
        auto it = twist_.find(key);
        if (it == twist_.end()) it = twist_.emplace(key, uniform3()).first;
        x += it->second;
      } else {
        twist_.erase(key);
      }
      int sigma = frame(idx, k, f) * (flip ? -1 : 1);
      int c = vertex_entry ? bz_[e] : bx_[e];
      x += vertex_entry ? -s * sigma * c : s * sigma * c;
    }
    return mod3(x);
  }

  // Parity readout of a leg condition: returns the frame, stirs the path ends.
  int condition(std::size_t idx, std::size_t k) {
    const auto& f = suite_.entries[idx].obs.op.factors[k];
    int sigma = frame(idx, k, f);
    int flip = 0;
    for (const auto& c : f.cond) flip ^= xq_[edge_of(c)];
    // the readout flips the stars at the ends of the path together
    if (coin()) {
      std::map<Vertex, int> ends;
      for (const auto& c : f.cond) {
        auto [a, b] = L_.geo().ends(edge_of(c));
        ends[a] ^= 1;
        ends[b] ^= 1;
      }
      for (auto [v, odd] : ends)
        if (odd && L_.qubit.contains(v.c)) aflip_[v] ^= 1;
    }
    return (sigma < 0) ^ flip;
  }

  // Residual logical by chain homology: row-0 cut for X-type chains, the
  // left dangling column for clock-type chains.
  bool residual_logical() const {
    int xp = 0, zp = 0, bxs = 0, bzs = 0;
    for (int c = L_.qubit.lo - 1; c <= L_.qubit.hi; ++c) xp ^= get(xq_, {c, 0, true});
    for (int y = 0; y < L_.rows; ++y) zp ^= get(zq_, {L_.qubit.lo - 1, y, true});
    for (int c = L_.base.lo - 1; c <= L_.base.hi; ++c) bxs += get(bx_, {c, 0, true});
    for (int y = 0; y < L_.rows; ++y) bzs += get(bz_, {L_.base.lo - 1, y, true});
    return xp || zp || mod3(bxs) || mod3(bzs);
  }

  void settle() { acoin_.clear(); }

 private:
  static int mod3(int x) { return ((x % 3) + 3) % 3; }
  static Edge edge_of(const SiteKey& k) { return {k.c, k.y, k.h}; }
  static int get(const std::map<Edge, int>& m, const Edge& e) {
    auto it = m.find(e);
    return it == m.end() ? 0 : it->second;
  }
  int coin() { return std::uniform_int_distribution<int>(0, 1)(rng_); }
  int uniform3() { return std::uniform_int_distribution<int>(0, 2)(rng_); }
  int frame(std::size_t idx, std::size_t k, const Factor& f) {
    if (f.cond.empty()) return 1;
    auto key = std::make_pair(idx, k);
    auto it = frame_.find(key);
    if (it == frame_.end()) it = frame_.emplace(key, coin() ? -1 : 1).first;
    return it->second;
  }

  LayeredLayout L_;
  BaseSpec B_;
  ProjectorSuite suite_;
  Rng rng_;
  std::map<Edge, int> xq_, zq_, bx_, bz_;
  std::map<std::pair<std::size_t, std::size_t>, int> twist_, frame_;
  std::map<Vertex, int> acoin_, aflip_;
};

// Same stage logic as decode_round, driven by sampled syndromes. Fusion is
// modelled as charge cancellation along the path with the frame sign read
// at conditioned legs.
inline DecoderReport decode_round_syndrome(SyndromeSim& sim, int max_rounds = 6) {
  DecoderReport rep;
  const auto& L = sim.layout();
  const auto& suite = sim.suite();
  auto idx_of = [&](const SuiteEntry* e) { return static_cast<std::size_t>(e - suite.entries.data()); };
  try {
    SyndromeRecord rec;
    for (const auto* e : suite.of(Family::B)) rec.entries.push_back({Family::B, {}, e->p, 0, sim.outcome(*e)});
    for (const auto* e : suite.of(Family::At)) rec.entries.push_back({Family::At, e->v, {}, 0, sim.outcome(*e)});
    rep.stats.b_flux = static_cast<int>(rec.nontrivial(Family::B).size());
    rep.stats.heralds = static_cast<int>(rec.nontrivial(Family::At).size());
    auto hc = decode_Bp(rec, L, suite);
    for (auto e : hc.edges) sim.apply({ErrorKind::X, e, 1});
    rep.stats.x_corrections = static_cast<int>(hc.edges.size());
    rep.stats.heralds_used = hc.heralds_used;

    auto pg = primal_graph(L, L.base);
    auto dg = dual_graph(L, L.base);
    auto hops2 = [](const GraphPath& p) { return kLog2 * static_cast<double>(p.edges.size()); };
    bool clean = false;
    for (int round = 0; round < max_rounds && !clean; ++round) {
      std::vector<const SuiteEntry*> cs, fs;
      for (const auto* e : suite.of(Family::At))
        if (sim.outcome(*e)) cs.push_back(e);
      for (const auto* e : suite.of(Family::Bt))
        if (sim.outcome(*e)) fs.push_back(e);
      if (round == 0) {
        rep.stats.c_anyons = static_cast<int>(cs.size());
        rep.stats.f_anyons = static_cast<int>(fs.size());
      }
      if (cs.empty() && fs.empty()) {
        clean = true;
        break;
      }
      ++rep.stats.fusion_rounds;
      auto run = [&](const MatchGraph& g, const std::vector<int>& nodes, FusionKind kind) {
        auto pc = [&](int i, int j) -> std::optional<double> {
          auto p = best_path(g, nodes[i], nodes[j], hops2, 0);
          return p ? std::optional<double>(p->weight) : std::nullopt;
        };
        auto bc = [&](int i) -> std::optional<double> {
          auto p = best_path(g, nodes[i], kBoundary, hops2, 0);
          return p ? std::optional<double>(p->weight) : std::nullopt;
        };
        Family fam = kind == FusionKind::C ? Family::At : Family::Bt;
        for (auto [i, j] : min_weight_matching(static_cast<int>(nodes.size()), pc, bc)) {
          auto p = *best_path(g, nodes[i], j == kBoundary ? kBoundary : nodes[j], hops2, 0);
          for (std::size_t k = 0; k < p.edges.size(); ++k) {
            const SuiteEntry* en = kind == FusionKind::C ? suite.at(fam, g.vnodes[p.nodes[k]])
                                                         : suite.at(fam, g.pnodes[p.nodes[k]]);
            int j0 = sim.outcome(*en);
            if (!j0) continue;
            Edge e = g.edges[p.edges[k]].e;
            std::size_t fk = 0;
            for (; fk < en->obs.op.factors.size(); ++fk)
              if (en->obs.op.factors[fk].targets[0] == bkey(e)) break;
            const auto& f = en->obs.op.factors.at(fk);
            int sp = power_of(f.plus, 3, kind == FusionKind::C);
            int sigma = f.cond.empty() ? 1 : (sim.condition(idx_of(en), fk) ? -1 : 1);
            int seff = ((sp * sigma) % 3 + 3) % 3;
            int c = kind == FusionKind::C ? j0 * seff : -j0 * seff;
            c = ((c % 3) + 3) % 3;
            sim.apply({kind == FusionKind::C ? ErrorKind::Zq : ErrorKind::Xq, e, c});
          }
          ++rep.stats.fusions;
        }
      };
      std::vector<int> cn, fn;
      for (const auto* e : cs) cn.push_back(pg.node_of(e->v));
      for (const auto* e : fs) fn.push_back(dg.node_of(e->p));
      run(pg, cn, FusionKind::C);
      run(dg, fn, FusionKind::F);
    }
    if (!clean) {
      rep.failure = "non-Abelian syndromes unresolved";
      return rep;
    }
    std::map<int, int> charges;
    auto qg = primal_graph(L, L.qubit);
    for (const auto* e : suite.of(Family::A))
      if (sim.outcome(*e)) charges[qg.node_of(e->v)] = 1;
    rep.stats.b_anyons = static_cast<int>(charges.size());
    auto zc = abelian_decode(L, charges, true, false, 2);
    for (auto [e, c] : zc.terms) sim.apply({ErrorKind::Z, e, 1});
    rep.stats.z_corrections = static_cast<int>(zc.terms.size());
    sim.settle();
  } catch (const SyndromeParityError& e) {
    rep.failure = e.what();
    return rep;
  }
  // stars were settled by the Z matching; remaining checks are deterministic
  bool ok = true;
  for (const auto& en : suite.entries) {
    if (!oracle_family(en.family) || en.family == Family::A) continue;
    if (sim.outcome(en)) ok = false;
  }
  rep.success = ok;
  if (!ok) rep.failure = "syndromes not cleared";
  return rep;
}

// ---- Monte Carlo ----------------------------------------------------------------

// Counter-derived per-trial seed.
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t i) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct McConfig {
  int rows = 2;
  int columns = 3;
  Window qubit{0, 1};
  Window base{1, 1};
  ErrorModel model;
  int trials = 100;
  std::uint64_t seed = 1;
  bool exact = true;
  std::size_t budget = kDefaultBudget;
};

struct TrialResult {
  int index = 0;
  std::uint64_t seed = 0;
  int errors = 0;
  DecoderReport report;
  bool failed() const { return !report.success || report.residual_logical; }
};

struct McResult {
  std::vector<TrialResult> trials;
  int failures = 0;
  double rate = 0;
  double ci_lo = 0;
  double ci_hi = 0;
  double stderr_ = 0;
};

// Wilson interval at 95%.
inline void fill_rate(McResult& r) {
  double n = static_cast<double>(r.trials.size());
  if (n == 0) return;
  double k = r.failures;
  r.rate = k / n;
  r.stderr_ = std::sqrt(std::max(r.rate * (1 - r.rate), 0.0) / n);
  const double z = 1.96;
  double den = 1 + z * z / n;
  double mid = (r.rate + z * z / (2 * n)) / den;
  double half = z * std::sqrt(r.rate * (1 - r.rate) / n + z * z / (4 * n * n)) / den;
  r.ci_lo = std::max(0.0, mid - half);
  r.ci_hi = std::min(1.0, mid + half);
}

// Smallest patch whose qubit window covers every base coupling.
inline StaticPatch decoder_patch(const BaseSpec& B, std::uint64_t seed = 1) {
  McConfig c;
  return static_patch(c.rows, c.columns, c.qubit, c.base, B, seed, true);
}

inline McResult mc_logical_error_rate(const McConfig& cfg, const BaseSpec& B,
                                      const std::function<void(const TrialResult&)>& on_trial = {}) {
  if (cfg.trials < 1) throw std::invalid_argument("trials must be positive");
  cfg.model.validate();
  McResult res;
  std::optional<StaticPatch> patch;
  LayeredLayout L;
  if (cfg.exact) {
    patch = static_patch(cfg.rows, cfg.columns, cfg.qubit, cfg.base, B, cfg.seed, true, cfg.budget);
    L = patch->L;
  } else {
    L = build_layout(cfg.rows, cfg.columns, cfg.qubit, cfg.base);
    L.left_pinned = true;
  }
  for (int i = 0; i < cfg.trials; ++i) {
    TrialResult t;
    t.index = i;
    t.seed = trial_seed(cfg.seed, static_cast<std::uint64_t>(i));
    Rng rng(t.seed);
    auto events = sample_errors(L, cfg.model, rng);
    t.errors = static_cast<int>(events.size());
    if (cfg.exact) {
      State s = patch->ground;
      for (const auto& ev : events) s.apply(error_op(B, ev));
      t.report = decode_round(s, L, B, rng_measurer(rng));
      if (t.report.success) t.report.residual_logical = fidelity(patch->ground, s) < 1 - 1e-6;
    } else {
      SyndromeSim sim(L, B, rng());
      for (const auto& ev : events) sim.apply(ev);
      t.report = decode_round_syndrome(sim);
      if (t.report.success) t.report.residual_logical = sim.residual_logical();
    }
    if (t.failed()) ++res.failures;
    if (on_trial) on_trial(t);
    res.trials.push_back(std::move(t));
  }
  fill_rate(res);
  return res;
}

// ---- fusion chains ----------------------------------------------------------------

// One-row chain v0..v5 (columns 1..6); edge e_i joins v_{i} and v_{i+1}.
inline StaticPatch chain_patch(const BaseSpec& B) { return static_patch(1, 8, {1, 6}, {1, 6}, B); }
inline Vertex chain_vertex(int i) { return {i + 1, 0}; }
inline Edge chain_edge(int i) { return {i + 1, 0, true}; }

struct ChainBranch {
  std::vector<int> outcomes;
  double weight = 0;
  int z_parity = 0;  // parity of Z along the fused segment, 1 means product -1
  FusionResult fusion;
  bool interior_clean = false;  // every Ã on the path except the far end at +1
  std::vector<Vertex> b_anyons;  // stars with a nonzero chance of -1
};

inline GraphPath chain_path(const MatchGraph& g, int from, int to) {
  GraphPath p;
  for (int i = from; i <= to; ++i) {
    p.nodes.push_back(g.node_of(chain_vertex(i)));
    if (i < to) p.edges.push_back(g.edge_index(chain_edge(i)));
  }
  return p;
}

// C charges w at v1 and w^2 at v4 with trivial v2, v3, prepared from two
// separate clock errors so that both parities of Z along v1..v4 occur.
// Every measurement branch is fused along v1 -> v4.
inline std::vector<ChainBranch> separated_pair_branches(const BaseSpec& B) {
  auto P = chain_patch(B);
  const auto suite = projector_suite(P.L, B, false);
  auto g = primal_graph(P.L, P.L.base);
  State start = P.ground;
  start.apply(error_op(B, {ErrorKind::Zq, chain_edge(0), 1}));
  start.apply(error_op(B, {ErrorKind::Zq, chain_edge(4), 2}));
  Rng dummy(0);
  start.measure(suite.at(Family::At, chain_vertex(1))->obs, dummy, 1);
  std::vector<SiteKey> seg;
  for (int i = 1; i <= 3; ++i) seg.push_back(qkey(chain_edge(i)));
  std::vector<ChainBranch> out;
  ChainBranch cur;
  for_each_branch(
      [&](const Measurer& meas) {
        State s = start;
        cur = {};
        cur.z_parity = meas(s, z_parity(seg));
        cur.fusion = fuse_nonabelian_pair(s, P.L, B, suite, g, chain_path(g, 1, 4), FusionKind::C, meas);
        cur.interior_clean = true;
        for (int i = 1; i <= 3; ++i)
          cur.interior_clean = cur.interior_clean && prob_of(s, suite.at(Family::At, chain_vertex(i))->obs, 0) > 1 - 1e-9;
      },
      [&](const std::vector<int>& o, double w) {
        cur.outcomes = o;
        cur.weight = w;
        out.push_back(cur);
      });
  return out;
}

// Clock errors of powers a on e1..e3, removed by fusing v1 -> v4.
inline std::vector<ChainBranch> local_chain_branches(const BaseSpec& B, const std::array<int, 3>& a) {
  auto P = chain_patch(B);
  const auto suite = projector_suite(P.L, B, false);
  auto g = primal_graph(P.L, P.L.base);
  State start = P.ground;
  for (int i = 0; i < 3; ++i) start.apply(error_op(B, {ErrorKind::Zq, chain_edge(i + 1), a[i]}));
  std::vector<ChainBranch> out;
  ChainBranch cur;
  for_each_branch(
      [&](const Measurer& meas) {
        State s = start;
        cur = {};
        cur.fusion = fuse_nonabelian_pair(s, P.L, B, suite, g, chain_path(g, 1, 4), FusionKind::C, meas);
        cur.interior_clean = true;
        for (const auto* e : suite.of(Family::At))
          cur.interior_clean = cur.interior_clean && prob_of(s, e->obs, 0) > 1 - 1e-9;
        for (const auto* e : suite.of(Family::A))
          if (prob_of(s, e->obs, 1) > 1e-9) cur.b_anyons.push_back(e->v);
      },
      [&](const std::vector<int>& o, double w) {
        cur.outcomes = o;
        cur.weight = w;
        out.push_back(cur);
      });
  return out;
}

}  // namespace s3q
