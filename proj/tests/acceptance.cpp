// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "harness.hpp"
#include "s3q/magic.hpp"
#include "s3q/verify.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

using namespace s3q;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("criterion %2d %s  %s: %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), o.detail.c_str(), dt);
  std::fflush(stdout);
}

std::string sci(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.2e", x);
  return b;
}

Outcome rows_outcome(const std::vector<CheckRow>& rows) {
  Outcome o;
  double worst = 0;
  for (const auto& r : rows) {
    if (!r.pass) {
      o.pass = false;
      o.detail += "failed '" + r.name + "' ";
    }
    if (r.tol > 0 && r.tol < 1) worst = std::max(worst, r.value);
  }
  o.detail += std::to_string(rows.size()) + " checks, worst residual " + sci(worst);
  return o;
}

double max_abs(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b.at(i)));
  return m;
}

}  // namespace

int main() {
  const auto S3 = BaseSpec::from(GroupSpec::s3());

  criterion(1, "group algebra", [] {
    auto rows = group_checks();
    auto o = rows_outcome(rows);
    o.detail = rows[0].detail + " products, classes " + rows[2].detail + ", sum d^2 " + rows[3].detail;
    return o;
  });

  criterion(2, "operator dictionary", [] {
    auto rows = dictionary_checks();
    auto k = kitaev_rows();
    rows.insert(rows.end(), k.begin(), k.end());
    return rows_outcome(rows);
  });

  criterion(3, "commuting projectors on the 2x2 overlap", [&] {
    auto r = suite_checks(overlap_patch(), S3, 3);
    auto o = rows_outcome(suite_rows(r));
    o.detail += ", " + std::to_string(r.pairs) + " pairs";
    return o;
  });

  criterion(4, "gauging equals projector ground state", [] {
    auto g = ground_state_check(2, 4, {1, 2}, 5);
    return Outcome{g.fidelity >= 1 - 1e-9,
                   "fidelity 1-" + sci(std::abs(1 - g.fidelity)) + " at dim " + std::to_string(g.dim)};
  });

  criterion(5, "single-error syndrome probabilities", [&] {
    auto P = static_patch(2, 3, {0, 1}, {1, 1}, S3);
    Outcome o;
    // every single error: operator-algebra oracle against the state
    double worst = 0;
    int n = 0;
    auto g = P.L.geo();
    std::vector<ErrorEvent> all;
    for (auto e : g.edges(P.L.qubit))
      for (auto k : {ErrorKind::X, ErrorKind::Z}) all.push_back({k, e, 1});
    for (auto e : g.edges(P.L.base))
      for (auto k : {ErrorKind::Xq, ErrorKind::Zq})
        for (int p : {1, 2}) all.push_back({k, e, p});
    for (const auto& ev : all) {
      worst = std::max(worst, max_difference(exact_syndromes(P.ground, ev, P.L, S3), syndrome_oracle(ev, P.L, S3)));
      ++n;
    }
    if (worst > 1e-9) o.pass = false;

    const Edge e{1, 0, false};
    auto split = [](const SyndromeMarginal* m) { return m && m->prob.size() == 2 && max_abs(m->prob, {0.5, 0.5}) < 1e-9; };
    auto zq = exact_syndromes(P.ground, {ErrorKind::Zq, e, 1}, P.L, S3);
    bool zq_ok = split(zq.find("A(1,0)"));
    int internal = 0;
    for (const auto* m : zq.nontrivial())
      if (m->family == Family::At && std::abs(*std::ranges::max_element(m->prob) - 0.5) < 1e-9) ++internal;
    zq_ok = zq_ok && internal == 1;

    auto x = exact_syndromes(P.ground, {ErrorKind::X, e, 1}, P.L, S3);
    int third_bt = 0, third_at = 0;
    for (const auto* m : x.nontrivial()) {
      if (m->prob.size() != 3 || max_abs(m->prob, {1.0 / 3, 1.0 / 3, 1.0 / 3}) > 1e-9) continue;
      if (m->family == Family::Bt) ++third_bt;
      if (m->family == Family::At) ++third_at;
    }
    bool x_ok = third_bt == 1 && third_at == 1;

    auto z = exact_syndromes(P.ground, {ErrorKind::Z, e, 1}, P.L, S3);
    auto znt = z.nontrivial();
    bool z_ok = znt.size() == 2 && std::ranges::all_of(znt, [](const SyndromeMarginal* m) {
                  return m->family == Family::A && std::abs(m->prob[1] - 1) < 1e-9;
                });
    o.pass = o.pass && zq_ok && x_ok && z_ok;

    // Born sampling of the random marginals
    double zmax = 0;
    int sampled = 0;
    std::uint64_t sd = 101;
    for (ErrorEvent ev : {ErrorEvent{ErrorKind::Zq, e, 1}, ErrorEvent{ErrorKind::X, e, 1}, ErrorEvent{ErrorKind::Z, e, 1}})
      for (const auto& m : sample_marginals(P.ground, ev, P.L, S3, 10000, sd++)) {
        zmax = std::max(zmax, m.max_z);
        ++sampled;
        if (!m.within(3)) o.pass = false;
      }
    o.detail = std::to_string(n) + " errors, oracle-exact " + sci(worst) + "; clock split " + (zq_ok ? "ok" : "bad") +
               ", X thirds " + (x_ok ? "ok" : "bad") + ", Z pair " + (z_ok ? "ok" : "bad") + "; " +
               std::to_string(sampled) + " sampled marginals at 1e4 shots, max " + sci(zmax) + " sigma";
    return o;
  });

  criterion(6, "adaptive fusion over forced branches", [&] {
    Outcome o;
    auto br = separated_pair_branches(S3);
    double total = 0;
    int bad = 0;
    for (const auto& b : br) {
      total += b.weight;
      bool vacuum = b.fusion.end_exponent == 0;
      if (vacuum != (b.z_parity == 0)) ++bad;
      if (!b.interior_clean) ++bad;
    }
    int local_branches = 0, local_bad = 0;
    for (int a1 : {1, 2})
      for (int a2 : {1, 2})
        for (int a3 : {1, 2}) {
          double w = 0;
          for (const auto& b : local_chain_branches(S3, {a1, a2, a3})) {
            ++local_branches;
            w += b.weight;
            if (!b.interior_clean || b.fusion.end_exponent != 0) ++local_bad;
          }
          if (std::abs(w - 1) > 1e-9) ++local_bad;
        }
    o.pass = bad == 0 && std::abs(total - 1) < 1e-9 && local_bad == 0;
    o.detail = std::to_string(br.size()) + " pair branches (weight " + sci(total) + "), " + std::to_string(bad) +
               " mismatches; " + std::to_string(local_branches) + " local-chain branches, " + std::to_string(local_bad) +
               " with residual charge";
    return o;
  });

  criterion(7, "logical controlled-C and Fredkin", [] {
    ProtocolConfig s3;
    s3.seed = 11;
    auto a = verify_logical_action(s3, 2);
    ProtocolConfig d4;
    d4.group = GroupSpec::d4();
    d4.seed = 11;
    auto b = verify_logical_action(d4, 0);
    std::size_t peak = std::max(a.peak_dim, b.peak_dim);
    bool pass = a.fidelities.size() == 8 && a.min_fidelity() >= 1 - 1e-9 && a.max_heisenberg_error() < 1e-9 &&
                b.min_fidelity() >= 1 - 1e-9 && peak <= (std::size_t{1} << 26);
    return Outcome{pass, "S3 8 inputs min fidelity 1-" + sci(std::abs(1 - a.min_fidelity())) + ", D4 " +
                             std::to_string(b.fidelities.size()) + " inputs min 1-" + sci(std::abs(1 - b.min_fidelity())) +
                             ", peak dim " + std::to_string(peak)};
  });

  criterion(8, "decoder soundness", [&] {
    Outcome o;
    auto P = decoder_patch(S3);
    auto g = P.L.geo();
    // bulk: vertical qubit edges, and base edges with both ends inside the base window
    std::vector<ErrorEvent> bulk;
    for (auto e : g.edges(P.L.qubit))
      if (!e.h)
        for (auto k : {ErrorKind::X, ErrorKind::Z}) bulk.push_back({k, e, 1});
    for (auto e : g.edges(P.L.base)) {
      auto [u, v] = g.ends(e);
      if (!P.L.base.contains(u.c) || !P.L.base.contains(v.c)) continue;
      for (auto k : {ErrorKind::Xq, ErrorKind::Zq})
        for (int p : {1, 2}) bulk.push_back({k, e, p});
    }
    int runs = 0, bad = 0;
    for (const auto& ev : bulk)
      for (int sd = 0; sd < 6; ++sd) {
        State s = P.ground;
        apply_error(s, P.L, S3, ev);
        Rng rng(trial_seed(900, runs++));
        auto r = decode_round(s, P.L, S3, rng_measurer(rng));
        if (!r.success || fidelity(P.ground, s) < 1 - 1e-6) ++bad;
      }

    McConfig zero;
    zero.trials = 1000;
    zero.seed = 17;
    auto ze = mc_logical_error_rate(zero, S3);
    zero.exact = false;
    auto zs = mc_logical_error_rate(zero, S3);

    std::ostringstream cmp;
    bool agree = true;
    for (double p : {0.02, 0.05}) {
      McConfig c;
      c.trials = 400;
      c.seed = 23;
      c.model = {p, p, p, p};
      auto ex = mc_logical_error_rate(c, S3);
      c.exact = false;
      c.seed = 24;
      auto sy = mc_logical_error_rate(c, S3);
      double sig = std::sqrt(ex.stderr_ * ex.stderr_ + sy.stderr_ * sy.stderr_);
      double z = sig > 0 ? std::abs(ex.rate - sy.rate) / sig : 0;
      if (z > 3) agree = false;
      cmp << " p=" << p << ": exact " << ex.rate << " syndrome " << sy.rate << " (" << sci(z) << " sigma);";
    }
    o.pass = bad == 0 && ze.failures == 0 && zs.failures == 0 && agree;
    o.detail = std::to_string(bulk.size()) + " bulk errors x 6 seeds, " + std::to_string(bad) + " failures; p=0 rate " +
               std::to_string(ze.rate) + "/" + std::to_string(zs.rate) + " over 1000;" + cmp.str();
    return o;
  });

  criterion(9, "magic states", [] {
    using namespace magic;
    auto q = run_magic(Layer::qutrit);
    auto b = run_magic(Layer::qubit);
    const double r3 = std::sqrt(3.0), r10 = std::sqrt(10.0);
    double e1 = std::max(std::abs(q[0].state[0] - 3 / r10), std::abs(q[0].state[1] - 1 / r10));
    double e2 = std::max({std::abs(b[1].state[0] - cplx(1.0 / 3, 0)), std::abs(b[1].state[1] - cplx(1.0 / 3, -1 / r3)),
                          std::abs(b[1].state[2] - cplx(1.0 / 3, 1 / r3))});
    double ep = std::abs(q[0].probability - 5.0 / 9);
    ProtocolConfig pc;
    pc.seed = 2;
    auto cc = lattice_cross_check(pc, 10000);
    bool pass = ep < 1e-12 && q[0].exact == "5/9" && e1 < 1e-12 && e2 < 1e-12 && cc.within(3) && cc.min_gate_fidelity >= 1 - 1e-9;
    std::ostringstream d;
    d << "P=" << q[0].exact << " (err " << sci(ep) << "), psi1 err " << sci(e1) << ", psi2 err " << sci(e2) << "; lattice "
      << cc.counts[0] << "/" << cc.shots << " = " << cc.z_frequency() << " vs 5/9, " << sci(std::abs(cc.z_frequency() - 5.0 / 9) / cc.sigma())
      << " sigma";
    return Outcome{pass, d.str()};
  });

  criterion(10, "byte-identical JSON-lines per seed", [] {
    using nlohmann::json;
    using namespace harness;
    std::vector<json> docs{
        {{"kind", "verify"}, {"seed", 4}, {"checks", {"group", "dictionary", "kitaev"}}},
        {{"kind", "protocol"}, {"seed", 4}, {"inputs", {"|1,1>", "|+,1>"}}},
        {{"kind", "protocol"}, {"seed", 4}, {"group", "D4"}, {"inputs", {"|1,01>"}}},
        {{"kind", "syndromes"},
         {"seed", 4},
         {"shots", 300},
         {"events", {{{"type", "Zq"}, {"edge", {1, 0, "v"}}}, {{"type", "X"}, {"edge", {1, 0, "v"}}}}},
         {"sample", {{{"type", "X"}, {"edge", {1, 0, "v"}}}}}},
        {{"kind", "decode"}, {"seed", 4}, {"trials", 20}, {"rates", {{"p_x", 0.05}, {"p_zq", 0.05}}}},
        {{"kind", "decode"}, {"seed", 4}, {"trials", 300}, {"backend", "syndrome"}, {"rates", {{"p_x", 0.05}, {"p_zq", 0.05}}}},
        {{"kind", "magic"}, {"seed", 4}, {"shots", 1000}, {"runs", 4}},
    };
    Outcome o;
    int same = 0;
    for (const auto& d : docs) {
      auto cfg = parse_config(d);
      auto a = run_experiment(cfg), b = run_experiment(cfg);
      bool ok = !a.sink.lines.empty() && a.sink.jsonl() == b.sink.jsonl() && a.status == 0;
      if (ok) ++same;
      else o.detail += kind_name(cfg.kind) + " differs; ";
    }
    o.pass = same == static_cast<int>(docs.size());
    o.detail += std::to_string(same) + "/" + std::to_string(docs.size()) + " configs reproduced byte for byte";
    return o;
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
