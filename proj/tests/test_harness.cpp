#include "doctest.h"
#include "harness.hpp"

#include <fstream>

using namespace s3q;
using namespace s3q::harness;
using nlohmann::json;

namespace {

std::string problems_of(const json& doc, std::optional<Kind> k = {}) {
  try {
    parse_config(doc, k);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::vector<std::string>& lines, const std::string& needle) {
  return std::ranges::any_of(lines, [&](const std::string& l) { return l.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("minimal verify config gets defaults") {
  auto c = parse_config(json{{"kind", "verify"}, {"seed", 1}});
  CHECK(c.backend == "exact");
  CHECK(c.trials == 1);
  CHECK(c.checks.size() == 5);
  CHECK(c.echo["seed"] == 1);
  CHECK(c.out_dir == "out/verify");
}

TEST_CASE("config errors") {
  CHECK(problems_of(json{{"kind", "decode"}, {"seed", 1}, {"rates", {{"p_x", 0.6}}}}).find("p_x") != std::string::npos);
  CHECK(problems_of(json{{"kind", "verify"}}).find("missing seed") != std::string::npos);
  CHECK(problems_of(json{{"kind", "sweep"}, {"seed", 1}}).find("unknown kind") != std::string::npos);
  CHECK(problems_of(json{{"seed", 1}}).find("missing kind") != std::string::npos);
  CHECK(problems_of(json{{"kind", "verify"}, {"seed", 1}}, Kind::decode).find("does not match") != std::string::npos);
  CHECK(problems_of(json{{"kind", "magic"}, {"seed", 1}, {"backend", "syndrome"}}).find("decode only") != std::string::npos);
  CHECK(problems_of(json{{"kind", "verify"}, {"seed", -3}}).find("seed") != std::string::npos);
  CHECK(problems_of(json{{"kind", "verify"}, {"seed", 1}, {"colour", 2}}).find("unknown field") != std::string::npos);
  // several problems are reported together
  auto all = problems_of(json{{"kind", "decode"}, {"rates", {{"p_z", 0.7}}}, {"trials", 0}});
  CHECK(all.find("seed") != std::string::npos);
  CHECK(all.find("p_z") != std::string::npos);
  CHECK(all.find("trials") != std::string::npos);
}

TEST_CASE("budget guard states the dimension") {
  json doc{{"kind", "verify"}, {"seed", 1}, {"layout", {{"rows", 3}, {"columns", 5}, {"qubit", {1, 3}}, {"base", {1, 3}}}}};
  auto msg = problems_of(doc);
  CHECK(msg.find("state dimension") != std::string::npos);
  auto c = parse_config(json{{"kind", "syndromes"}, {"seed", 1}});
  CHECK(exact_dimension(c) == 2 * 62208);
  // a syndrome-backend decode allocates nothing
  CHECK(exact_dimension(parse_config(json{{"kind", "decode"}, {"seed", 1}, {"backend", "syndrome"}})) == 0);
}

TEST_CASE("D4 protocol config instantiates the swap automorphism") {
  auto c = parse_config(json{{"kind", "protocol"}, {"seed", 4}, {"group", "D4"}});
  CHECK(c.group.kind == GroupSpec::Kind::d4);
  auto B = BaseSpec::from(c.group);
  CHECK(B.layers == 2);
  CHECK((B.automorphism - gates::swap2()).norm() < 1e-12);
}

TEST_CASE("flag overrides") {
  Overrides ov;
  ov.seed = 99;
  ov.trials = 5;
  ov.backend = "syndrome";
  ov.out = "elsewhere";
  auto c = parse_config(json{{"kind", "decode"}}, std::nullopt, ov);
  CHECK(c.seed == 99);
  CHECK(c.trials == 5);
  CHECK(c.backend == "syndrome");
  CHECK(c.out_dir == "elsewhere");
}

TEST_CASE("syndromes table carries the half and third rows") {
  json doc{{"kind", "syndromes"},
           {"seed", 2},
           {"events", {{{"type", "Zq"}, {"edge", {1, 0, "v"}}}, {{"type", "X"}, {"edge", {1, 0, "v"}}}}}};
  auto r = run_experiment(parse_config(doc));
  CHECK(r.status == 0);
  CHECK(contains(r.sink.csv, "1/2 1/2"));
  CHECK(contains(r.sink.csv, "1/3 1/3 1/3"));
  for (const auto& l : r.sink.lines) {
    auto j = json::parse(l);
    CHECK(j["seed"] == 2);
    CHECK(j["backend"] == "exact");
  }
}

TEST_CASE("magic table") {
  auto r = run_experiment(parse_config(json{{"kind", "magic"}, {"seed", 1}}));
  CHECK(r.status == 0);
  bool found = false;
  for (const auto& l : r.sink.lines) {
    auto j = json::parse(l);
    if (j["branch"] != "Zt=w^0") continue;
    found = true;
    CHECK(j["exact"] == "5/9");
    CHECK(j["state"][0][0].get<double>() == doctest::Approx(3 / std::sqrt(10.0)));
    CHECK(j["state"][1][0].get<double>() == doctest::Approx(1 / std::sqrt(10.0)));
  }
  CHECK(found);
}

TEST_CASE("invariant failures exit with status 1") {
  // a verify patch with no bulk site cannot exercise the twisted commutator
  json doc{{"kind", "verify"}, {"seed", 1}, {"checks", {"suite"}},
           {"layout", {{"rows", 2}, {"columns", 2}, {"qubit", {0, 0}}, {"base", {0, 0}}}}};
  auto r = run_experiment(parse_config(doc));
  CHECK(r.status == 1);
  CHECK_FALSE(r.failures.empty());
}

TEST_CASE("identical configs give identical JSON-lines, and outputs are written") {
  json doc{{"kind", "decode"}, {"seed", 8}, {"backend", "syndrome"}, {"trials", 50},
           {"rates", {{"p_x", 0.05}, {"p_z", 0.05}, {"p_xq", 0.05}, {"p_zq", 0.05}}}};
  auto c = parse_config(doc);
  auto a = run_experiment(c), b = run_experiment(c);
  CHECK(a.sink.jsonl() == b.sink.jsonl());
  CHECK(a.sink.lines.size() == 50);
  auto dir = std::filesystem::temp_directory_path() / "s3q_harness_test";
  std::filesystem::remove_all(dir);
  write_outputs(c, a, dir);
  CHECK(std::filesystem::exists(dir / "decode.jsonl"));
  CHECK(std::filesystem::exists(dir / "decode.csv"));
  std::ifstream in(dir / "manifest.json");
  auto m = json::parse(in);
  CHECK(m["version"] == kVersion);
  CHECK(m["config"]["seed"] == 8);
  CHECK(m["exit_status"] == 0);
  std::ifstream jl(dir / "decode.jsonl", std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(jl)), std::istreambuf_iterator<char>());
  CHECK(text == a.sink.jsonl());
}
