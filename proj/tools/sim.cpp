// sim <kind> --config <path> [--seed N] [--trials N] [--backend exact|syndrome] [--out DIR]
#include "harness.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace s3q::harness;
  CLI::App app{"Experiments on the qubit/qutrit surface-code gate through the S3 double"};
  std::string kind, config;
  Overrides ov;
  std::uint64_t seed = 0;
  int trials = 0;
  std::string backend, out;
  app.add_option("kind", kind, "verify, protocol, syndromes, decode or magic")
      ->required()
      ->check(CLI::IsMember({"verify", "protocol", "syndromes", "decode", "magic"}));
  app.add_option("--config", config, "experiment config (JSON)")->required();
  auto* o_seed = app.add_option("--seed", seed, "master seed");
  auto* o_trials = app.add_option("--trials", trials, "number of trials")->check(CLI::PositiveNumber);
  auto* o_backend = app.add_option("--backend", backend, "exact or syndrome")->check(CLI::IsMember({"exact", "syndrome"}));
  auto* o_out = app.add_option("--out", out, "output directory");
  app.set_version_flag("--version", kVersion);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (*o_seed) ov.seed = seed;
  if (*o_trials) ov.trials = trials;
  if (*o_backend) ov.backend = backend;
  if (*o_out) ov.out = out;

  ExperimentConfig cfg;
  try {
    cfg = load_config(config, kind_from(kind), ov);
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) std::cerr << "config error: " << p << "\n";
    return 2;
  }
  auto res = run_experiment(cfg);
  try {
    write_outputs(cfg, res, cfg.out_dir);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  for (const auto& f : res.failures) std::cerr << (res.status == 2 ? "config error: " : "failed: ") << f << "\n";
  std::cout << kind << ": " << res.sink.lines.size() << " records, " << (res.status == 0 ? "ok" : "FAILED") << ", "
            << res.wall_time << " s -> " << cfg.out_dir << "\n";
  return res.status;
}
