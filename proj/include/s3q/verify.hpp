// Invariant checks behind the verify experiment: group algebra against a
// permutation model, the operator dictionary, Kitaev equivalence, projector
// commutation on an overlap patch, and gauging versus projection.
#pragma once

#include "s3q/anyons.hpp"
#include "s3q/protocol.hpp"

#include <set>

namespace s3q {

struct CheckRow {
  std::string name;
  double value = 0;  // error measure, or a count for exact checks
  double tol = 0;
  bool pass = false;
  std::string detail;
};

inline CheckRow tolerance_row(std::string name, double err, double tol, std::string detail = "") {
  return {std::move(name), err, tol, err <= tol, std::move(detail)};
}

// ---- group ------------------------------------------------------------------

// S3 acting on {0,1,2}: r = i -> i+1, s = i -> -i.  s^q r^n = S^q o R^n.
using Perm = std::array<int, 3>;

inline Perm perm_of(GroupElement g) {
  Perm p;
  for (int i = 0; i < 3; ++i) {
    int x = (i + g.n) % 3;
    p[i] = g.q ? (3 - x) % 3 : x;
  }
  return p;
}

inline Perm compose(const Perm& a, const Perm& b) {  // a after b
  Perm c;
  for (int i = 0; i < 3; ++i) c[i] = a[b[i]];
  return c;
}

inline GroupElement element_of(const Perm& p) {
  for (auto g : all_elements())
    if (perm_of(g) == p) return g;
  throw std::logic_error("not a group element");
}

inline std::vector<CheckRow> group_checks() {
  std::vector<CheckRow> rows;
  int ok = 0;
  for (auto a : all_elements())
    for (auto b : all_elements())
      if (multiply(a, b) == element_of(compose(perm_of(a), perm_of(b)))) ++ok;
  rows.push_back({"products match permutation model", static_cast<double>(ok), 36, ok == 36, std::to_string(ok) + "/36"});

  int inv_ok = 0;
  for (auto a : all_elements()) {
    Perm p = perm_of(a), q{};
    for (int i = 0; i < 3; ++i) q[p[i]] = i;
    if (inverse(a) == element_of(q)) ++inv_ok;
  }
  rows.push_back({"inverses match permutation model", static_cast<double>(inv_ok), 6, inv_ok == 6, ""});

  // class sizes from cycle type: fixed points 3 -> 1, 0 -> 2 (3-cycles), 1 -> 3
  std::multiset<int> want, got;
  std::set<std::string> seen;
  for (auto a : all_elements()) {
    auto cls = conjugacy_class_of(a);
    if (seen.insert(cls.label).second) got.insert(static_cast<int>(cls.members.size()));
  }
  std::map<int, int> by_fixed;
  for (auto a : all_elements()) {
    auto p = perm_of(a);
    int fixed = 0;
    for (int i = 0; i < 3; ++i) fixed += p[i] == i;
    ++by_fixed[fixed];
  }
  for (auto [f, n] : by_fixed) want.insert(n);
  std::string sizes;
  for (int s : got) sizes += (sizes.empty() ? "" : ",") + std::to_string(s);
  rows.push_back({"conjugacy class sizes", 0, 0, got == want && got == std::multiset<int>{1, 2, 3}, sizes});

  int sum = 0;
  for (const auto& a : anyon_table()) sum += a.quantum_dim * a.quantum_dim;
  rows.push_back({"sum of squared quantum dimensions", static_cast<double>(sum), 36, sum == 36, std::to_string(sum)});

  bool rel = multiply(multiply(kS, kR), inverse(kS)) == multiply(kR, kR) &&
             multiply(kR, multiply(kR, kR)) == kIdentity && multiply(kS, kS) == kIdentity;
  rows.push_back({"presentation srs^-1 = r^2, r^3 = s^2 = e", 0, 0, rel, ""});
  return rows;
}

// ---- operator dictionary ----------------------------------------------------

inline Mat conditioned_on_qubit(const Mat& on0, const Mat& on1) {
  Mat m = Mat::Zero(6, 6);
  m.block(0, 0, 3, 3) = on0;
  m.block(3, 3, 3, 3) = on1;
  return m;
}

inline std::vector<CheckRow> dictionary_checks() {
  using namespace gates;
  std::vector<CheckRow> rows;
  auto err = [](const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); };
  rows.push_back(tolerance_row("L-^r = I (x) Xq^dag", err(shift_matrix(ShiftKind::Lm, kR), kron(eye(2), Xq(2))), 1e-12));
  rows.push_back(tolerance_row("L+^r = Xq^Z", err(shift_matrix(ShiftKind::Lp, kR), conditioned_on_qubit(Xq(1), Xq(2))), 1e-12));
  rows.push_back(tolerance_row("L+^s = X (x) I", err(shift_matrix(ShiftKind::Lp, kS), kron(X(), eye(3))), 1e-12));
  rows.push_back(tolerance_row("L-^s = X (x) C", err(shift_matrix(ShiftKind::Lm, kS), kron(X(), Cq())), 1e-12));
  double hom = 0, comm = 0, basis = 0;
  for (auto g : all_elements())
    for (auto h : all_elements()) {
      hom = std::max(hom, err(shift_matrix(ShiftKind::Lp, g) * shift_matrix(ShiftKind::Lp, h),
                              shift_matrix(ShiftKind::Lp, multiply(g, h))));
      Mat a = shift_matrix(ShiftKind::Lp, g), b = shift_matrix(ShiftKind::Lm, h);
      comm = std::max(comm, err(a * b, b * a));
      Mat e = Mat::Zero(6, 1);
      e(h.index()) = 1;
      Mat want = Mat::Zero(6, 1);
      want(multiply(g, h).index()) = 1;
      basis = std::max(basis, err(shift_matrix(ShiftKind::Lp, g) * e, want));
    }
  rows.push_back(tolerance_row("L+^g L+^h = L+^gh", hom, 1e-12));
  rows.push_back(tolerance_row("[L+^g, L-^h] = 0", comm, 1e-12));
  rows.push_back(tolerance_row("L+^g |h> = |gh>", basis, 1e-12));
  return rows;
}

inline std::vector<CheckRow> kitaev_rows() {
  auto k = kitaev_check();
  return {tolerance_row("A^r vertex = conditioned At", k.vertex_r, 1e-10),
          tolerance_row("A^s vertex = A_v", k.vertex_s, 1e-10),
          tolerance_row("vertex projector factorizes", k.vertex_projector, 1e-10),
          tolerance_row("B^e = P(B) P(Bt)", k.plaquette, 1e-10)};
}

// ---- projector model on a patch ----------------------------------------------

// Overlap patch: two vertex rows, both codes on columns 1..2.
inline LayeredLayout overlap_patch() {
  auto L = build_layout(2, 4, {1, 2}, {1, 2});
  L.left_pinned = true;
  return L;
}

inline std::vector<cplx> random_vector(std::size_t n, Rng& rng) {
  std::normal_distribution<double> d;
  std::vector<cplx> v(n);
  double s = 0;
  for (auto& x : v) {
    x = {d(rng), d(rng)};
    s += std::norm(x);
  }
  for (auto& x : v) x /= std::sqrt(s);
  return v;
}

inline double distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

// Hamiltonian terms: the vertex projector P(A) P(At) and the plaquette
// projector P(B) P(Bt), with single factors where only one code is present.
struct HamiltonianTerm {
  std::string name;
  std::vector<const Observable*> factors;
};

inline std::vector<HamiltonianTerm> hamiltonian_terms(const ProjectorSuite& s) {
  std::vector<HamiltonianTerm> out;
  std::map<std::pair<int, int>, HamiltonianTerm> verts, plaqs;
  for (const auto& e : s.entries) {
    if (e.family == Family::A || e.family == Family::At) {
      auto& t = verts[{e.v.c, e.v.y}];
      t.name = "vertex" + to_string(e.v);
      t.factors.push_back(&e.obs);
    } else if (e.family == Family::B || e.family == Family::Bt) {
      auto& t = plaqs[{e.p.c, e.p.y}];
      t.name = "plaquette" + to_string(e.p);
      t.factors.insert(e.family == Family::B ? t.factors.begin() : t.factors.end(), &e.obs);
    }
  }
  for (auto& [k, t] : verts) out.push_back(t);
  for (auto& [k, t] : plaqs) out.push_back(t);
  return out;
}

inline std::vector<cplx> apply_term(const State& s, const HamiltonianTerm& t, std::vector<cplx> v) {
  for (auto it = t.factors.rbegin(); it != t.factors.rend(); ++it) v = s.project(**it, 0, v);
  return v;
}

struct SuiteCheckResult {
  double max_commutator = 0;
  std::string worst_pair;
  int pairs = 0;
  double twisted_commutator = 0;   // Bt At - w^(-Z1Z4+Z2Z3) At Bt
  double vertex_conjugation = 0;   // A At A - At^2
  double plaquette_conjugation = 0;  // A Bt A - Bt^2
  int twisted_sites = 0;
  int conjugation_sites = 0;
};

inline SuiteCheckResult suite_checks(const LayeredLayout& L, const BaseSpec& B, std::uint64_t seed) {
  SuiteCheckResult r;
  State s = zero_register(L, B);
  Rng rng(seed);
  auto v = random_vector(s.dim(), rng);
  auto suite = projector_suite(L, B, false);
  auto terms = hamiltonian_terms(suite);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    auto pi = apply_term(s, terms[i], v);
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      auto a = apply_term(s, terms[i], apply_term(s, terms[j], v));
      auto b = apply_term(s, terms[j], pi);
      double d = distance(a, b);
      ++r.pairs;
      if (d > r.max_commutator) {
        r.max_commutator = d;
        r.worst_pair = terms[i].name + "," + terms[j].name;
      }
    }
  }

  // the non-commuting pair: p up-left of v, edges left/top/right/bottom = Z1..Z4
  auto g = L.geo();
  for (auto vert : g.vertices(L.base)) {
    Plaq p = commutator_plaquette(vert);
    auto at = suite.at(Family::At, vert);
    auto bt = suite.at(Family::Bt, p);
    if (!at || !bt) continue;
    if (g.plaquette(L.base, p).size() != 4 || g.plaquette(L.qubit, p).size() != 4) continue;
    Edge e1{p.c, p.y, false}, e2{p.c, p.y, true}, e3{p.c + 1, p.y, false}, e4{p.c, p.y + 1, true};
    auto lhs = s.applied(bt->obs.op, s.applied(at->obs.op, v));
    auto rhs = s.applied(at->obs.op, s.applied(bt->obs.op, v));
    // diagonal phase w^(-Z1 Z4 + Z2 Z3) in the qubit Z basis
    Mat d = Mat::Zero(16, 16);
    for (int b = 0; b < 16; ++b) {
      auto z = [&](int i) { return ((b >> (3 - i)) & 1) ? -1 : 1; };
      d(b, b) = std::polar(1.0, 2 * std::numbers::pi * (-z(0) * z(3) + z(1) * z(2)) / 3);
    }
    Op phase;
    phase.factors.push_back(Factor::local({qkey(e1), qkey(e2), qkey(e3), qkey(e4)}, d));
    rhs = s.applied(phase, rhs);
    r.twisted_commutator = std::max(r.twisted_commutator, distance(lhs, rhs));
    ++r.twisted_sites;
  }
  for (auto vert : g.vertices(L.qubit)) {
    auto at = suite.at(Family::At, vert);
    auto a = suite.at(Family::A, vert);
    if (!at || !a) continue;
    auto at2 = s.applied(at->obs.op, s.applied(at->obs.op, v));
    auto conj = s.applied(a->obs.op, s.applied(at->obs.op, s.applied(a->obs.op, v)));
    r.vertex_conjugation = std::max(r.vertex_conjugation, distance(conj, at2));
  }
  for (auto vert : g.vertices(L.qubit)) {
    Plaq p = conjugation_plaquette(vert);
    auto a = suite.at(Family::A, vert);
    auto bt = suite.at(Family::Bt, p);
    if (!a || !bt) continue;
    if (g.plaquette(L.base, p).size() != 4) continue;
    auto bt2 = s.applied(bt->obs.op, s.applied(bt->obs.op, v));
    auto conj = s.applied(a->obs.op, s.applied(bt->obs.op, s.applied(a->obs.op, v)));
    r.plaquette_conjugation = std::max(r.plaquette_conjugation, distance(conj, bt2));
    ++r.conjugation_sites;
  }
  return r;
}

inline std::vector<CheckRow> suite_rows(const SuiteCheckResult& r) {
  return {tolerance_row("projector terms pairwise commute", r.max_commutator, 1e-10,
                        std::to_string(r.pairs) + " pairs" + (r.worst_pair.empty() ? "" : ", worst " + r.worst_pair)),
          r.twisted_sites ? tolerance_row("Bt At = w^(-Z1Z4+Z2Z3) At Bt", r.twisted_commutator, 1e-10)
                          : CheckRow{"Bt At = w^(-Z1Z4+Z2Z3) At Bt", 0, 1e-10, false, "no bulk site on patch"},
          tolerance_row("A At A = At^2", r.vertex_conjugation, 1e-10),
          tolerance_row("A Bt A = Bt^2", r.plaquette_conjugation, 1e-10)};
}

// ---- gauging versus projection ------------------------------------------------

struct GroundStateCheck {
  double fidelity = 0;
  double suite_min_prob = 0;  // smallest +1 probability over the suite after gauging
  std::size_t dim = 0;
};

// Gauges the qubit layer over the base window starting from the base code
// in |0>, and compares with the +1 projector product on a product state.
inline GroundStateCheck ground_state_check(int rows, int columns, Window base, std::uint64_t seed) {
  auto B = BaseSpec::from(GroupSpec::s3());
  LayeredLayout L = build_layout(rows, columns, {base.lo, base.lo - 1}, base);
  State s = encode(L, B, basis_input(0, {0}));
  Rng rng(seed);
  gauge_window(s, L, B, base, rng);
  GroundStateCheck r;
  r.dim = s.dim();
  auto suite = projector_suite(L, B, false);
  r.suite_min_prob = 1;
  for (const auto& e : suite.entries) r.suite_min_prob = std::min(r.suite_min_prob, prob_of(s, e.obs, 0));

  State ref = zero_register(L, B);
  for (const auto& t : hamiltonian_terms(suite)) ref.amplitudes() = apply_term(ref, t, ref.amplitudes());
  ref.normalize();
  r.fidelity = fidelity(ref, s);
  return r;
}

}  // namespace s3q
