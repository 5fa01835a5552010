#include "harness.hpp"

#include "s3q/magic.hpp"
#include "s3q/verify.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

namespace s3q::harness {

using ojson = nlohmann::ordered_json;

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::verify: return "verify";
    case Kind::protocol: return "protocol";
    case Kind::syndromes: return "syndromes";
    case Kind::decode: return "decode";
    case Kind::magic: return "magic";
  }
  return "?";
}

std::optional<Kind> kind_from(const std::string& s) {
  for (Kind k : {Kind::verify, Kind::protocol, Kind::syndromes, Kind::decode, Kind::magic})
    if (kind_name(k) == s) return k;
  return std::nullopt;
}

static std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument("config error: " + join(problems, "; ")), problems_(std::move(problems)) {}

ProtocolConfig ExperimentConfig::protocol() const {
  ProtocolConfig p;
  p.rows = rows;
  p.columns = columns;
  p.qubit = qubit;
  p.base = base;
  p.group = group;
  p.seed = seed;
  p.budget = budget;
  return p;
}

McConfig ExperimentConfig::monte_carlo() const {
  McConfig m;
  m.rows = rows;
  m.columns = columns;
  m.qubit = qubit;
  m.base = base;
  m.model = rates;
  m.trials = trials;
  m.seed = seed;
  m.exact = backend == "exact";
  m.budget = budget;
  return m;
}

// ---- parsing ------------------------------------------------------------------

namespace {

const std::vector<std::string> kVerifyChecks{"group", "dictionary", "kitaev", "suite", "ground_state"};

struct LayoutDefaults {
  int rows, columns;
  Window qubit, base;
};

LayoutDefaults layout_defaults(Kind k) {
  switch (k) {
    case Kind::verify: return {2, 4, {1, 2}, {1, 2}};
    case Kind::protocol:
    case Kind::magic: return {2, 6, {1, 1}, {3, 3}};
    case Kind::syndromes:
    case Kind::decode: return {2, 3, {0, 1}, {1, 1}};
  }
  return {2, 4, {1, 2}, {1, 2}};
}

std::optional<ErrorKind> error_kind_from(const std::string& s) {
  for (ErrorKind k : {ErrorKind::X, ErrorKind::Z, ErrorKind::Xq, ErrorKind::Zq})
    if (s3q::kind_name(k) == s) return k;
  return std::nullopt;
}

ojson event_json(const ErrorEvent& ev) {
  return ojson{{"type", s3q::kind_name(ev.kind)},
               {"edge", ojson::array({ev.e.c, ev.e.y, ev.e.h ? "h" : "v"})},
               {"power", ev.power}};
}

// {"type": "Zq", "edge": [c, y, "h"|"v"], "power": 1}
std::optional<ErrorEvent> parse_event(const nlohmann::json& j, const std::string& where, std::vector<std::string>& errs) {
  auto bad = [&](const std::string& m) {
    errs.push_back(where + ": " + m);
    return std::nullopt;
  };
  if (!j.is_object()) return bad("expected an object");
  if (!j.contains("type") || !j["type"].is_string()) return bad("missing type");
  auto k = error_kind_from(j["type"].get<std::string>());
  if (!k) return bad("unknown type '" + j["type"].get<std::string>() + "' (X, Z, Xq, Zq)");
  const auto& e = j.value("edge", nlohmann::json());
  if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() || !e[2].is_string() ||
      (e[2] != "h" && e[2] != "v"))
    return bad("edge must be [column, row, \"h\"|\"v\"]");
  ErrorEvent ev{*k, Edge{e[0].get<int>(), e[1].get<int>(), e[2] == "h"}, j.value("power", 1)};
  if (ev.qubit() ? ev.power != 1 : (ev.power != 1 && ev.power != 2)) return bad("power out of range");
  return ev;
}

std::optional<Window> parse_window(const nlohmann::json& j, const std::string& where, std::vector<std::string>& errs) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    errs.push_back(where + ": expected [lo, hi]");
    return std::nullopt;
  }
  return Window{j[0].get<int>(), j[1].get<int>()};
}

ojson window_json(Window w) { return ojson::array({w.lo, w.hi}); }

std::size_t layout_dimension(const LayeredLayout& L, const BaseSpec& B) {
  std::size_t d = 1;
  for (auto [k, n] : layout_sites(L, B)) {
    if (d > (std::size_t{1} << 62) / static_cast<std::size_t>(n)) return std::numeric_limits<std::size_t>::max();
    d *= static_cast<std::size_t>(n);
  }
  return d;
}

std::size_t doubled(std::size_t d) { return d > std::numeric_limits<std::size_t>::max() / 2 ? d : 2 * d; }

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<Kind> kind, const Overrides& ov) {
  std::vector<std::string> errs;
  if (!doc.is_object()) throw ConfigError({"document must be a JSON object"});
  static const std::set<std::string> known{"kind",   "seed",   "trials", "backend", "group", "layout", "rates",
                                           "budget", "shots",  "runs",   "checks",  "inputs", "events", "sample",
                                           "output"};
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (!known.contains(it.key())) errs.push_back("unknown field '" + it.key() + "'");

  ExperimentConfig c;
  if (doc.contains("kind")) {
    auto k = doc["kind"].is_string() ? kind_from(doc["kind"].get<std::string>()) : std::nullopt;
    if (!k) errs.push_back("unknown kind " + doc["kind"].dump());
    else if (kind && *kind != *k) errs.push_back("kind '" + kind_name(*k) + "' does not match subcommand '" + kind_name(*kind) + "'");
    else kind = k;
  }
  if (!kind) {
    errs.push_back("missing kind");
    throw ConfigError(errs);
  }
  c.kind = *kind;

  if (ov.seed) c.seed = *ov.seed;
  else if (!doc.contains("seed")) errs.push_back("missing seed");
  else if (!doc["seed"].is_number_integer() || (!doc["seed"].is_number_unsigned() && doc["seed"].get<long long>() < 0))
    errs.push_back("seed must be a non-negative integer");
  else c.seed = doc["seed"].get<std::uint64_t>();

  auto positive_int = [&](const char* key, int& dst) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_number_integer() || doc[key].get<long long>() < 0 || doc[key].get<long long>() > (1 << 30))
      errs.push_back(std::string(key) + " must be a non-negative integer");
    else dst = doc[key].get<int>();
  };
  positive_int("trials", c.trials);
  if (ov.trials) c.trials = *ov.trials;
  if (c.trials < 1) errs.push_back("trials must be at least 1");
  positive_int("shots", c.shots);
  positive_int("runs", c.runs);
  if (c.runs < 1) errs.push_back("runs must be at least 1");

  if (doc.contains("backend")) {
    if (doc["backend"].is_string()) c.backend = doc["backend"].get<std::string>();
    else errs.push_back("backend must be a string");
  }
  if (ov.backend) c.backend = *ov.backend;
  if (c.backend != "exact" && c.backend != "syndrome") errs.push_back("backend must be exact or syndrome");
  else if (c.backend == "syndrome" && c.kind != Kind::decode) errs.push_back("the syndrome backend applies to decode only");

  if (doc.contains("group")) {
    std::string g = doc["group"].is_string() ? doc["group"].get<std::string>() : "";
    if (g == "S3") c.group = GroupSpec::s3();
    else if (g == "D4") c.group = GroupSpec::d4();
    else errs.push_back("group must be S3 or D4");
  }
  if (c.group.kind == GroupSpec::Kind::d4 && c.kind != Kind::protocol) errs.push_back("D4 is supported by the protocol kind only");

  auto d = layout_defaults(c.kind);
  c.rows = d.rows, c.columns = d.columns, c.qubit = d.qubit, c.base = d.base;
  if (doc.contains("layout")) {
    const auto& l = doc["layout"];
    if (!l.is_object()) errs.push_back("layout must be an object");
    else {
      for (auto it = l.begin(); it != l.end(); ++it)
        if (it.key() != "rows" && it.key() != "columns" && it.key() != "qubit" && it.key() != "base")
          errs.push_back("unknown layout field '" + it.key() + "'");
      if (l.contains("rows")) {
        if (l["rows"].is_number_integer()) c.rows = l["rows"].get<int>();
        else errs.push_back("layout.rows must be an integer");
      }
      if (l.contains("columns")) {
        if (l["columns"].is_number_integer()) c.columns = l["columns"].get<int>();
        else errs.push_back("layout.columns must be an integer");
      }
      if (l.contains("qubit"))
        if (auto w = parse_window(l["qubit"], "layout.qubit", errs)) c.qubit = *w;
      if (l.contains("base"))
        if (auto w = parse_window(l["base"], "layout.base", errs)) c.base = *w;
    }
  }
  bool layout_ok = true;
  try {
    build_layout(c.rows, c.columns, c.qubit, c.base);
  } catch (const std::invalid_argument& e) {
    errs.push_back(std::string("layout: ") + e.what());
    layout_ok = false;
  }
  if (layout_ok && (c.kind == Kind::protocol || (c.kind == Kind::magic && c.shots > 0))) {
    try {
      validate(c.protocol());
    } catch (const std::invalid_argument& e) {
      errs.push_back(std::string("layout: ") + e.what());
      layout_ok = false;
    }
  }
  if (layout_ok && c.kind == Kind::syndromes && (c.qubit.empty() || c.base.empty()))
    errs.push_back("layout: both windows must be present");
  if (layout_ok && c.kind == Kind::decode) {
    if (c.qubit.empty() || c.base.empty()) errs.push_back("layout: both windows must be present");
    else {
      LayeredLayout L = build_layout(c.rows, c.columns, c.qubit, c.base);
      for (auto e : L.geo().edges(L.base))
        if (!L.qubit.contains(e.c)) {
          errs.push_back("layout: qubit window must cover every base coupling column");
          break;
        }
    }
  }
  if (layout_ok && c.kind == Kind::verify && (c.qubit.empty() || c.base.empty()))
    errs.push_back("layout: verify needs both windows");

  if (doc.contains("rates")) {
    const auto& r = doc["rates"];
    if (!r.is_object()) errs.push_back("rates must be an object");
    else
      for (auto it = r.begin(); it != r.end(); ++it) {
        double* dst = it.key() == "p_x" ? &c.rates.px
                      : it.key() == "p_z" ? &c.rates.pz
                      : it.key() == "p_xq" ? &c.rates.pxq
                      : it.key() == "p_zq" ? &c.rates.pzq
                                          : nullptr;
        if (!dst) errs.push_back("unknown rate '" + it.key() + "'");
        else if (!it.value().is_number()) errs.push_back("rates." + it.key() + " must be a number");
        else {
          *dst = it.value().get<double>();
          if (!(*dst >= 0 && *dst <= 0.5)) errs.push_back("rates." + it.key() + " must lie in [0, 0.5]");
        }
      }
  }

  if (doc.contains("budget")) {
    if (doc["budget"].is_number_integer() && doc["budget"].get<long long>() > 0) c.budget = doc["budget"].get<std::size_t>();
    else errs.push_back("budget must be a positive integer");
  }

  auto string_list = [&](const char* key, std::vector<std::string>& dst) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_array()) {
      errs.push_back(std::string(key) + " must be an array of strings");
      return;
    }
    for (const auto& s : doc[key]) {
      if (s.is_string()) dst.push_back(s.get<std::string>());
      else errs.push_back(std::string(key) + " must be an array of strings");
    }
  };
  string_list("checks", c.checks);
  for (const auto& s : c.checks)
    if (std::ranges::find(kVerifyChecks, s) == kVerifyChecks.end()) errs.push_back("unknown check '" + s + "'");
  if (c.checks.empty()) c.checks = kVerifyChecks;
  string_list("inputs", c.inputs);
  if (c.kind == Kind::protocol)
    for (const auto& s : c.inputs) {
      auto all = spanning_inputs(c.group);
      if (std::ranges::none_of(all, [&](const InputCase& i) { return i.name == s; })) errs.push_back("unknown input '" + s + "'");
    }

  auto event_list = [&](const char* key, std::vector<ErrorEvent>& dst) {
    if (!doc.contains(key)) return;
    if (!doc[key].is_array()) {
      errs.push_back(std::string(key) + " must be an array");
      return;
    }
    for (std::size_t i = 0; i < doc[key].size(); ++i) {
      auto ev = parse_event(doc[key][i], std::string(key) + "[" + std::to_string(i) + "]", errs);
      if (!ev) continue;
      if (layout_ok && !in_region(build_layout(c.rows, c.columns, c.qubit, c.base), *ev))
        errs.push_back(std::string(key) + "[" + std::to_string(i) + "]: edge outside the layout");
      dst.push_back(*ev);
    }
  };
  event_list("events", c.events);
  event_list("sample", c.sample);
  if (!c.sample.empty() && c.shots < 1) errs.push_back("sample needs shots > 0");

  if (doc.contains("output")) {
    const auto& o = doc["output"];
    if (!o.is_object() || (o.contains("dir") && !o["dir"].is_string())) errs.push_back("output must be {\"dir\": string}");
    else c.out_dir = o.value("dir", "");
  }
  if (ov.out) c.out_dir = *ov.out;
  if (c.out_dir.empty()) c.out_dir = "out/" + kind_name(c.kind);

  if (errs.empty()) {
    std::size_t dim = exact_dimension(c);
    if (dim > c.budget)
      errs.push_back("exact backend needs state dimension " + std::to_string(dim) + ", above the budget " +
                     std::to_string(c.budget));
  }
  if (!errs.empty()) throw ConfigError(errs);

  ojson e;
  e["kind"] = kind_name(c.kind);
  e["seed"] = c.seed;
  e["trials"] = c.trials;
  e["backend"] = c.backend;
  e["group"] = c.group.name();
  e["layout"] = {{"rows", c.rows}, {"columns", c.columns}, {"qubit", window_json(c.qubit)}, {"base", window_json(c.base)}};
  e["budget"] = c.budget;
  switch (c.kind) {
    case Kind::verify: e["checks"] = c.checks; break;
    case Kind::protocol: e["inputs"] = c.inputs; break;
    case Kind::syndromes:
      e["shots"] = c.shots;
      e["events"] = ojson::array();
      for (const auto& ev : c.events) e["events"].push_back(event_json(ev));
      e["sample"] = ojson::array();
      for (const auto& ev : c.sample) e["sample"].push_back(event_json(ev));
      break;
    case Kind::decode:
      e["rates"] = {{"p_x", c.rates.px}, {"p_z", c.rates.pz}, {"p_xq", c.rates.pxq}, {"p_zq", c.rates.pzq}};
      break;
    case Kind::magic:
      e["shots"] = c.shots;
      e["runs"] = c.runs;
      break;
  }
  e["output"] = {{"dir", c.out_dir}};
  c.echo = e;
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Kind> kind, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open " + path.string()});
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({std::string("malformed JSON: ") + e.what()});
  }
  return parse_config(doc, kind, ov);
}

std::size_t exact_dimension(const ExperimentConfig& c) {
  auto B = BaseSpec::from(c.group);
  // one vertex qubit is live at a time while a column is gauged
  switch (c.kind) {
    case Kind::verify: {
      bool state_checks = std::ranges::any_of(c.checks, [](const std::string& s) { return s == "suite" || s == "ground_state"; });
      if (!state_checks) return 0;
      auto L = build_layout(c.rows, c.columns, c.qubit, c.base);
      auto G = build_layout(c.rows, c.columns, c.base, c.base);
      return doubled(std::max(layout_dimension(L, B), layout_dimension(G, B)));
    }
    case Kind::syndromes:
      return doubled(layout_dimension(build_layout(c.rows, c.columns, c.qubit, c.base), B));
    case Kind::decode:
      return c.backend == "exact" ? doubled(layout_dimension(build_layout(c.rows, c.columns, c.qubit, c.base), B)) : 0;
    case Kind::magic:
      if (c.shots == 0) return 0;
      [[fallthrough]];
    case Kind::protocol: {
      // widest point of the slide: the qubit window one column wider
      std::size_t peak = 0;
      int w = c.qubit.width();
      for (int lo = c.qubit.lo; lo <= c.base.hi + 1; ++lo) {
        Window q{lo, std::min(lo + w, c.columns - 1)};
        peak = std::max(peak, layout_dimension(build_layout(c.rows, c.columns, q, c.base), B));
      }
      return doubled(peak);
    }
  }
  return 0;
}

// ---- sinks ----------------------------------------------------------------------

std::string ResultSink::jsonl() const {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string ResultSink::csv_text() const {
  std::string out;
  for (const auto& l : csv) out += l + "\n";
  return out;
}

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::vector<std::string> q;
  for (const auto& c : cells) q.push_back(quoted(c));
  return join(q, ",");
}

// rounding noise below 1e-14 is printed as zero
double chop(double x) { return std::abs(x) < 1e-14 ? 0.0 : x; }

ojson amplitudes_json(const std::vector<cplx>& v) {
  ojson a = ojson::array();
  for (auto x : v) a.push_back(ojson::array({chop(x.real()), chop(x.imag())}));
  return a;
}

std::string amplitudes_text(const std::vector<cplx>& v) {
  std::vector<std::string> parts;
  for (auto x : v) {
    double re = chop(x.real()), im = chop(x.imag());
    parts.push_back(num(re) + (im < 0 ? "-" : "+") + num(std::abs(im)) + "i");
  }
  return join(parts, " ");
}

ojson probs_json(const std::vector<double>& p) {
  ojson a = ojson::array();
  for (double x : p) a.push_back(x);
  return a;
}

std::string probs_text(const std::vector<double>& p) {
  std::vector<std::string> parts;
  for (double x : p) {
    auto r = magic::rational(x);
    parts.push_back(r.empty() ? num(x) : r);
  }
  return join(parts, " ");
}

struct Context {
  const ExperimentConfig& cfg;
  RunResult& res;
  ojson base() const { return ojson{{"kind", kind_name(cfg.kind)}, {"seed", cfg.seed}, {"backend", cfg.backend}}; }
  void fail(const std::string& why) { res.failures.push_back(why); }
  std::string seed() const { return std::to_string(cfg.seed); }
};

// ---- verify ---------------------------------------------------------------------

void run_verify(Context& ctx) {
  const auto& c = ctx.cfg;
  auto& sink = ctx.res.sink;
  sink.csv.push_back("check,value,tol,pass,detail,seed,backend");
  auto emit = [&](const std::string& group, const CheckRow& r) {
    ojson j = ctx.base();
    j["section"] = group;
    j["check"] = r.name;
    j["value"] = r.value;
    j["tol"] = r.tol;
    j["pass"] = r.pass;
    j["detail"] = r.detail;
    sink.record(j);
    sink.csv.push_back(csv_row({r.name, num(r.value), num(r.tol), r.pass ? "true" : "false", r.detail, ctx.seed(), c.backend}));
    if (!r.pass) ctx.fail(group + ": " + r.name);
  };
  auto B = BaseSpec::from(GroupSpec::s3());
  for (const auto& name : c.checks) {
    if (name == "group")
      for (const auto& r : group_checks()) emit(name, r);
    if (name == "dictionary")
      for (const auto& r : dictionary_checks()) emit(name, r);
    if (name == "kitaev")
      for (const auto& r : kitaev_rows()) emit(name, r);
    if (name == "suite") {
      auto L = build_layout(c.rows, c.columns, c.qubit, c.base);
      L.left_pinned = true;
      for (const auto& r : suite_rows(suite_checks(L, B, c.seed))) emit(name, r);
    }
    if (name == "ground_state") {
      auto g = ground_state_check(c.rows, c.columns, c.base, c.seed);
      emit(name, tolerance_row("gauged state equals projector ground state", std::abs(1 - g.fidelity), 1e-9,
                               "fidelity " + num(g.fidelity) + ", dim " + std::to_string(g.dim)));
      emit(name, tolerance_row("gauged state in the +1 space of every projector", 1 - g.suite_min_prob, 1e-9));
    }
  }
}

// ---- protocol -------------------------------------------------------------------

void run_protocol_kind(Context& ctx) {
  const auto& c = ctx.cfg;
  auto& sink = ctx.res.sink;
  auto rep = verify_logical_action(c.protocol(), c.trials, c.inputs);
  sink.csv.push_back("input,run_seed,fidelity,pass,peak_dim,seed,backend");
  ojson report{{"group", rep.group}, {"seed", c.seed}, {"backend", c.backend}, {"peak_dim", rep.peak_dim},
               {"min_fidelity", rep.min_fidelity()}, {"max_heisenberg_error", rep.max_heisenberg_error()}};
  report["fidelities"] = ojson::array();
  for (const auto& f : rep.fidelities) {
    int idx = 0;
    for (const auto& st : f.trace.steps) {
      ojson j = ctx.base();
      j["record"] = "step";
      j["input"] = f.input;
      j["run_seed"] = f.seed;
      j["step"] = idx++;
      j["move"] = st.kind;
      j["column"] = st.column;
      j["x_outcomes"] = st.x_outcomes;
      j["z_horizontal"] = st.z_horizontal;
      j["z_vertical"] = st.z_vertical;
      j["offsets"] = st.offsets;
      j["feedforward"] = st.feedforward;
      j["loop"] = st.loop;
      j["logical"] = st.logical;
      sink.record(j);
    }
    bool pass = f.fidelity >= 1 - 1e-9;
    ojson j = ctx.base();
    j["record"] = "fidelity";
    j["group_spec"] = rep.group;
    j["input"] = f.input;
    j["run_seed"] = f.seed;
    j["fidelity"] = f.fidelity;
    j["pass"] = pass;
    j["noncontractible"] = f.trace.noncontractible;
    j["xbar_corrections"] = f.trace.xbar_corrections;
    j["loops_ok"] = f.trace.loops_ok;
    j["peak_dim"] = f.trace.peak_dim;
    sink.record(j);
    report["fidelities"].push_back({{"input", f.input}, {"run_seed", f.seed}, {"fidelity", f.fidelity}});
    sink.csv.push_back(csv_row({f.input, std::to_string(f.seed), num(f.fidelity), pass ? "true" : "false",
                                std::to_string(f.trace.peak_dim), ctx.seed(), c.backend}));
    if (!pass) ctx.fail("fidelity " + num(f.fidelity) + " on " + f.input);
    if (!f.trace.loops_ok) ctx.fail("unclosed boundary loop on " + f.input);
  }
  report["heisenberg"] = ojson::array();
  for (const auto& h : rep.heisenberg) {
    double err = std::abs(h.before - h.after);
    ojson j = ctx.base();
    j["record"] = "heisenberg";
    j["operator"] = h.op;
    j["before"] = ojson::array({h.before.real(), h.before.imag()});
    j["after"] = ojson::array({h.after.real(), h.after.imag()});
    j["error"] = err;
    sink.record(j);
    report["heisenberg"].push_back(j);
    if (err > 1e-9) ctx.fail("Heisenberg mismatch for " + h.op);
  }
  sink.documents["report.json"] = report;
}

// ---- syndromes -------------------------------------------------------------------

std::vector<ErrorEvent> all_single_errors(const LayeredLayout& L) {
  std::vector<ErrorEvent> evs;
  auto g = L.geo();
  for (auto e : g.edges(L.qubit))
    for (auto k : {ErrorKind::X, ErrorKind::Z}) evs.push_back({k, e, 1});
  for (auto e : g.edges(L.base))
    for (auto k : {ErrorKind::Xq, ErrorKind::Zq})
      for (int p : {1, 2}) evs.push_back({k, e, p});
  return evs;
}

void run_syndromes(Context& ctx) {
  const auto& c = ctx.cfg;
  auto& sink = ctx.res.sink;
  auto B = BaseSpec::from(c.group);
  auto P = static_patch(c.rows, c.columns, c.qubit, c.base, B, c.seed, false, c.budget);
  auto events = c.events.empty() ? all_single_errors(P.L) : c.events;
  sink.csv.push_back("error,marginal,exact,oracle,difference,seed,backend");
  for (const auto& ev : events) {
    auto ex = exact_syndromes(P.ground, ev, P.L, B);
    auto orc = syndrome_oracle(ev, P.L, B);
    for (const auto& m : ex.marginals) {
      const auto* o = orc.find(m.name);
      bool nontrivial = m.prob[0] < 1 - 1e-12 || (o && o->prob[0] < 1 - 1e-12);
      if (!nontrivial) continue;
      double diff = 0;
      for (std::size_t j = 0; j < m.prob.size(); ++j) diff = std::max(diff, o ? std::abs(m.prob[j] - o->prob.at(j)) : 1.0);
      ojson j = ctx.base();
      j["record"] = "marginal";
      j["error"] = to_string(ev);
      j["marginal"] = m.name;
      j["family"] = family_name(m.family);
      j["exact"] = probs_json(m.prob);
      j["oracle"] = o ? probs_json(o->prob) : ojson();
      j["rational"] = probs_text(m.prob);
      j["difference"] = diff;
      sink.record(j);
      sink.csv.push_back(csv_row({to_string(ev), m.name, probs_text(m.prob), o ? probs_text(o->prob) : "", num(diff),
                                  ctx.seed(), c.backend}));
      if (diff > 1e-9) ctx.fail("oracle mismatch " + num(diff) + " for " + to_string(ev) + " " + m.name);
    }
  }
  for (std::size_t i = 0; i < c.sample.size(); ++i) {
    const auto& ev = c.sample[i];
    for (const auto& m : sample_marginals(P.ground, ev, P.L, B, c.shots, trial_seed(c.seed, i))) {
      ojson j = ctx.base();
      j["record"] = "sample";
      j["error"] = to_string(ev);
      j["marginal"] = m.name;
      j["exact"] = probs_json(m.exact);
      j["counts"] = m.counts;
      j["shots"] = m.shots;
      j["max_z"] = m.max_z;
      j["within_3sigma"] = m.within(3);
      sink.record(j);
      if (!m.within(3)) ctx.fail("sampled " + m.name + " under " + to_string(ev) + " off by " + num(m.max_z) + " sigma");
    }
  }
}

// ---- decode ------------------------------------------------------------------------

void run_decode(Context& ctx) {
  const auto& c = ctx.cfg;
  auto& sink = ctx.res.sink;
  auto B = BaseSpec::from(c.group);
  ojson rates{{"p_x", c.rates.px}, {"p_z", c.rates.pz}, {"p_xq", c.rates.pxq}, {"p_zq", c.rates.pzq}};
  auto res = mc_logical_error_rate(c.monte_carlo(), B, [&](const TrialResult& t) {
    const auto& s = t.report.stats;
    ojson j = ctx.base();
    j["trial"] = t.index;
    j["trial_seed"] = t.seed;
    j["rates"] = rates;
    j["errors"] = t.errors;
    j["success"] = t.report.success;
    j["residual_logical"] = t.report.residual_logical;
    j["failure"] = t.report.failure;
    j["stage_stats"] = {{"b_flux", s.b_flux},         {"heralds", s.heralds},
                        {"heralds_used", s.heralds_used}, {"x_corrections", s.x_corrections},
                        {"c_anyons", s.c_anyons},     {"f_anyons", s.f_anyons},
                        {"fusion_rounds", s.fusion_rounds}, {"fusions", s.fusions},
                        {"b_anyons", s.b_anyons},     {"z_corrections", s.z_corrections}};
    sink.record(j);
  });
  sink.csv.push_back("rate,ci_lo,ci_hi,stderr,failures,trials,p_x,p_z,p_xq,p_zq,seed,backend");
  sink.csv.push_back(csv_row({num(res.rate), num(res.ci_lo), num(res.ci_hi), num(res.stderr_), std::to_string(res.failures),
                              std::to_string(res.trials.size()), num(c.rates.px), num(c.rates.pz), num(c.rates.pxq),
                              num(c.rates.pzq), ctx.seed(), c.backend}));
  if (c.rates.zero() && res.failures > 0) ctx.fail(std::to_string(res.failures) + " logical failures without noise");
}

// ---- magic -------------------------------------------------------------------------

void run_magic_kind(Context& ctx) {
  const auto& c = ctx.cfg;
  auto& sink = ctx.res.sink;
  sink.csv.push_back("layer,branch,probability,amplitudes,seed,backend");
  for (auto layer : {magic::Layer::qutrit, magic::Layer::qubit}) {
    std::string lname = layer == magic::Layer::qutrit ? "qutrit" : "qubit";
    for (const auto& b : magic::run_magic(layer)) {
      ojson j = ctx.base();
      j["record"] = "branch";
      j["measured"] = lname;
      j["branch"] = b.label;
      j["probability"] = b.probability;
      j["exact"] = b.exact;
      j["state"] = amplitudes_json(b.state);
      sink.record(j);
      sink.csv.push_back(csv_row({lname, b.label, b.exact.empty() ? num(b.probability) : b.exact, amplitudes_text(b.state),
                                  ctx.seed(), c.backend}));
    }
  }
  auto zero = magic::run_magic(magic::Layer::qutrit)[0];
  double unit = (magic::composite() * magic::composite().adjoint() - magic::Mat6::Identity()).cwiseAbs().maxCoeff();
  if (unit > 1e-12) ctx.fail("composite gate not unitary");
  double norm = 0;
  for (const auto& b : magic::run_magic(magic::Layer::qutrit)) norm += b.probability;
  if (std::abs(norm - 1) > 1e-12) ctx.fail("branch probabilities do not sum to one");
  if (c.shots == 0) return;
  auto cc = magic::lattice_cross_check(c.protocol(), c.shots, c.runs);
  ojson j = ctx.base();
  j["record"] = "lattice_cross_check";
  j["runs"] = cc.runs;
  j["shots"] = cc.shots;
  j["counts"] = cc.counts;
  j["frequency"] = cc.z_frequency();
  j["reference"] = cc.reference;
  j["lattice_exact"] = cc.exact;
  j["sigma"] = cc.sigma();
  j["within_3sigma"] = cc.within(3);
  j["min_gate_fidelity"] = cc.min_gate_fidelity;
  sink.record(j);
  if (!cc.within(3)) ctx.fail("lattice frequency " + num(cc.z_frequency()) + " outside 3 sigma of " + num(zero.probability));
  if (cc.min_gate_fidelity < 1 - 1e-9) ctx.fail("lattice gate fidelity " + num(cc.min_gate_fidelity));
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  RunResult res;
  auto t0 = std::chrono::steady_clock::now();
  Context ctx{cfg, res};
  try {
    switch (cfg.kind) {
      case Kind::verify: run_verify(ctx); break;
      case Kind::protocol: run_protocol_kind(ctx); break;
      case Kind::syndromes: run_syndromes(ctx); break;
      case Kind::decode: run_decode(ctx); break;
      case Kind::magic: run_magic_kind(ctx); break;
    }
    res.status = res.failures.empty() ? 0 : 1;
  } catch (const BudgetError& e) {
    res.failures.push_back(e.what());
    res.status = 2;
  } catch (const std::invalid_argument& e) {
    res.failures.push_back(e.what());
    res.status = 2;
  } catch (const std::exception& e) {
    res.failures.push_back(e.what());
    res.status = 1;
  }
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

ojson manifest(const ExperimentConfig& cfg, const RunResult& r, const std::vector<std::string>& files) {
  return ojson{{"kind", kind_name(cfg.kind)},
               {"version", kVersion},
               {"seed", cfg.seed},
               {"backend", cfg.backend},
               {"config", cfg.echo},
               {"wall_time_s", r.wall_time},
               {"exit_status", r.status},
               {"records", r.sink.lines.size()},
               {"failures", r.failures},
               {"outputs", files}};
}

void write_outputs(const ExperimentConfig& cfg, const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << text;
    files.push_back(name);
  };
  std::string stem = kind_name(cfg.kind);
  put(stem + ".jsonl", r.sink.jsonl());
  put(stem + ".csv", r.sink.csv_text());
  for (const auto& [name, doc] : r.sink.documents) put(name, doc.dump(2) + "\n");
  files.push_back("manifest.json");
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << manifest(cfg, r, files).dump(2) << "\n";
}

}  // namespace s3q::harness
