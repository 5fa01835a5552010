// The sliding protocol: the qubit code is extended through the base code
// column by column and ejected behind, leaving a controlled automorphism.
#pragma once

#include "s3q/codes.hpp"

#include <chrono>

namespace s3q {

struct ProtocolConfig {
  int rows = 2;
  int columns = 6;
  Window qubit{1, 1};
  Window base{3, 3};
  GroupSpec group = GroupSpec::s3();
  std::uint64_t seed = 1;
  std::size_t budget = kDefaultBudget;
  bool error_model = false;  // must stay off; see config validation
};

struct ProtocolTrace {
  std::vector<StepRecord> steps;
  int noncontractible = 0;
  int xbar_corrections = 0;
  std::size_t peak_dim = 0;
  bool loops_ok = true;
};

inline LayeredLayout initial_layout(const ProtocolConfig& c) { return build_layout(c.rows, c.columns, c.qubit, c.base); }

inline LayeredLayout final_layout(const ProtocolConfig& c) {
  auto L = build_layout(c.rows, c.columns, {c.base.hi + 1, c.base.hi + 1 + (c.qubit.width() - 1)}, c.base);
  return L;
}

inline void validate(const ProtocolConfig& c) {
  if (c.rows < 2) throw std::invalid_argument("protocol needs at least two vertex rows");
  if (c.qubit.empty() || c.base.empty()) throw std::invalid_argument("both codes must be present");
  if (c.qubit.hi > c.base.lo - 2) throw std::invalid_argument("qubit code must start left of the base code with a gap");
  if (c.base.hi + c.qubit.width() >= c.columns) throw std::invalid_argument("not enough columns to pass the base code");
  if (!c.group.valid()) throw std::invalid_argument("invalid group spec");
  if (c.error_model) throw std::invalid_argument("protocol runs are noiseless");
}

// Runs the schedule in place on s; L is updated to the output layout.
inline ProtocolTrace run_protocol_on(State& s, LayeredLayout& L, const BaseSpec& B, Rng& rng,
                                     const ForcedOutcomes* forced = nullptr) {
  ProtocolTrace tr;
  EjectionRecord er;
  int target_lo = L.base.hi + 1;
  auto note_ec = [&](int col) {
    StepRecord r;
    r.kind = "correct";
    r.column = col;
    tr.steps.push_back(r);
  };
  while (L.qubit.lo < target_lo) {
    int c = L.qubit.hi + 1;
    tr.steps.push_back(extend_right(s, L, B, c, rng, forced));
    tr.peak_dim = std::max(tr.peak_dim, s.dim() * 2);
    note_ec(c);
    tr.steps.push_back(eject_left(s, L, B, er, rng, forced));
    note_ec(tr.steps.back().column);
  }
  tr.noncontractible = er.noncontractible;
  for (const auto& st : tr.steps) tr.xbar_corrections += static_cast<int>(st.logical.size());
  tr.loops_ok = loops_closed(er, L.rows);
  return tr;
}

// Ideal logical action of the controlled automorphism on basis labels.
inline std::vector<int> automorphism_digits(const GroupSpec& g, int a, const std::vector<int>& ks) {
  if (!a) return ks;
  if (g.kind == GroupSpec::Kind::d4) return {ks[1], ks[0]};
  std::vector<int> out;
  for (int k : ks) out.push_back(automorphism_apply(g, 1, k));
  return out;
}

using LogicalVector = std::function<cplx(int, const std::vector<int>&)>;

struct ProtocolResult {
  State out;
  LayeredLayout layout;
  ProtocolTrace trace;
};

inline ProtocolResult run_protocol(const ProtocolConfig& cfg, const LogicalVector& input, Rng& rng,
                                   const ForcedOutcomes* forced = nullptr) {
  validate(cfg);
  auto B = BaseSpec::from(cfg.group);
  auto L = initial_layout(cfg);
  State s = encode(L, B, input, cfg.budget);
  auto tr = run_protocol_on(s, L, B, rng, forced);
  return {std::move(s), L, std::move(tr)};
}

// Expected output under the ideal gate, encoded on the output layout.
inline State ideal_output(const ProtocolConfig& cfg, const LogicalVector& input) {
  auto B = BaseSpec::from(cfg.group);
  auto L = final_layout(cfg);
  LogicalVector mapped = [&](int a, const std::vector<int>& ks) {
    // preimage under the involution equals the image
    return input(a, automorphism_digits(cfg.group, a, ks));
  };
  return encode(L, B, mapped, cfg.budget);
}

struct InputCase {
  std::string name;
  LogicalVector amp;
};

inline LogicalVector basis_input(int a0, std::vector<int> k0) {
  return [a0, k0](int a, const std::vector<int>& ks) { return (a == a0 && ks == k0) ? cplx{1} : cplx{}; };
}

inline std::vector<InputCase> spanning_inputs(const GroupSpec& g) {
  std::vector<InputCase> v;
  if (g.kind == GroupSpec::Kind::d4) {
    for (int a = 0; a < 2; ++a)
      for (int k1 = 0; k1 < 2; ++k1)
        for (int k2 = 0; k2 < 2; ++k2)
          v.push_back({"|" + std::to_string(a) + "," + std::to_string(k1) + std::to_string(k2) + ">",
                       basis_input(a, {k1, k2})});
    v.push_back({"|+,01>", [](int, const std::vector<int>& ks) {
                   return (ks == std::vector<int>{0, 1}) ? cplx{1 / std::sqrt(2.0)} : cplx{};
                 }});
    return v;
  }
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < 3; ++k)
      v.push_back({"|" + std::to_string(a) + "," + std::to_string(k) + ">", basis_input(a, {k})});
  v.push_back({"|1,(1+2)>", [](int a, const std::vector<int>& ks) {
                 return (a == 1 && ks[0] != 0) ? cplx{1 / std::sqrt(2.0)} : cplx{};
               }});
  v.push_back({"|+,1>", [](int, const std::vector<int>& ks) { return ks[0] == 1 ? cplx{1 / std::sqrt(2.0)} : cplx{}; }});
  return v;
}

struct LogicalActionEntry {
  std::string input;
  double fidelity = 0;
  std::uint64_t seed = 0;
  ProtocolTrace trace;
};

struct HeisenbergEntry {
  std::string op;
  cplx before;
  cplx after;
};

struct LogicalActionReport {
  std::string group;
  std::vector<LogicalActionEntry> fidelities;
  std::vector<HeisenbergEntry> heisenberg;
  std::size_t peak_dim = 0;
  double min_fidelity() const {
    double m = 1;
    for (auto& f : fidelities) m = std::min(m, f.fidelity);
    return m;
  }
  double max_heisenberg_error() const {
    double m = 0;
    for (auto& h : heisenberg) m = std::max(m, std::abs(h.before - h.after));
    return m;
  }
};

// Random logical input with amplitudes from rng.
inline LogicalVector random_input(const BaseSpec& B, Rng& rng) {
  std::normal_distribution<double> n;
  int nb = 1;
  for (int i = 0; i < B.layers; ++i) nb *= B.order;
  std::vector<cplx> c(2 * nb);
  for (auto& x : c) x = {n(rng), n(rng)};
  auto order = B.order;
  return [c, order, nb](int a, const std::vector<int>& ks) {
    int idx = 0;
    for (int k : ks) idx = idx * order + k;
    return c[a * nb + idx];
  };
}

// only: restrict to these input names; seeds stay tied to the input position
inline LogicalActionReport verify_logical_action(const ProtocolConfig& cfg, int heisenberg_samples = 2,
                                                 const std::vector<std::string>& only = {}) {
  LogicalActionReport rep;
  rep.group = cfg.group.name();
  auto B = BaseSpec::from(cfg.group);
  std::uint64_t seed = cfg.seed;
  for (const auto& in : spanning_inputs(cfg.group)) {
    if (!only.empty() && std::ranges::find(only, in.name) == only.end()) {
      ++seed;
      continue;
    }
    Rng rng(seed);
    auto res = run_protocol(cfg, in.amp, rng);
    State ideal = ideal_output(cfg, in.amp);
    rep.fidelities.push_back({in.name, fidelity(ideal, res.out), seed, res.trace});
    rep.peak_dim = std::max(rep.peak_dim, res.trace.peak_dim);
    ++seed;
  }
  if (cfg.group.kind != GroupSpec::Kind::cyclic) return rep;
  Rng pick(cfg.seed ^ 0x5eedULL);
  for (int t = 0; t < heisenberg_samples; ++t) {
    auto in = random_input(B, pick);
    auto L0 = initial_layout(cfg);
    State s0 = encode(L0, B, in, cfg.budget);
    Rng rng(seed++);
    auto res = run_protocol(cfg, in, rng);
    auto L1 = final_layout(cfg);
    const State& s1 = res.out;
    Op x0 = qubit_xbar(L0, B, L0.qubit.lo - 1);
    Op z0 = qubit_zbar(L0);
    Op zt0 = base_logical(L0, B, 0, false);
    Op xt0 = base_logical(L0, B, 0, true);
    Op x1 = qubit_xbar(L1, B, L1.qubit.lo - 1).then(base_automorphism(L1, B));
    Op z1 = qubit_zbar(L1);
    // conditioned on the qubit logical: Zbar~ on +, its conjugate on -
    auto conditioned = [&](const Op& o) {
      Op r;
      auto zp = logical_z_path(L1, L1.qubit).path;
      for (auto f : o.factors) {
        f.minus = B.automorphism * f.plus * B.automorphism.adjoint();
        f.cond = qkeys(zp);
        r.factors.push_back(f);
      }
      return r;
    };
    Op zt1 = conditioned(base_logical(L1, B, 0, false));
    Op xt1 = conditioned(base_logical(L1, B, 0, true));
    rep.heisenberg.push_back({"Zbar", s0.expectation(z0), s1.expectation(z1)});
    rep.heisenberg.push_back({"Xbar->Xbar.C", s0.expectation(x0), s1.expectation(x1)});
    rep.heisenberg.push_back({"Zbar~->Zbar~^Zbar", s0.expectation(zt0), s1.expectation(zt1)});
    rep.heisenberg.push_back({"Xbar~->Xbar~^Zbar", s0.expectation(xt0), s1.expectation(xt1)});
  }
  return rep;
}

}  // namespace s3q
