// Experiment harness: config ingestion, dispatch to the library, and the
// JSON-lines / CSV / manifest sinks.
#pragma once

#include "s3q/decoder.hpp"
#include "s3q/protocol.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>

namespace s3q::harness {

inline constexpr const char* kVersion = "0.1.0";

enum class Kind { verify, protocol, syndromes, decode, magic };

std::string kind_name(Kind k);
std::optional<Kind> kind_from(const std::string& s);

// Field-level problems, all collected before throwing.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ExperimentConfig {
  Kind kind = Kind::verify;
  std::uint64_t seed = 0;
  int trials = 1;
  std::string backend = "exact";
  GroupSpec group = GroupSpec::s3();
  int rows = 2;
  int columns = 4;
  Window qubit{1, 2};
  Window base{1, 2};
  ErrorModel rates;
  std::size_t budget = kDefaultBudget;
  int shots = 0;
  int runs = 16;
  std::vector<std::string> checks;  // verify
  std::vector<std::string> inputs;  // protocol
  std::vector<ErrorEvent> events;   // syndromes sweep; empty means every single error
  std::vector<ErrorEvent> sample;   // syndromes Born sampling
  std::string out_dir;
  nlohmann::ordered_json echo;      // effective config after defaults and overrides

  ProtocolConfig protocol() const;
  McConfig monte_carlo() const;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> backend;
  std::optional<std::string> out;
};

// kind: the subcommand; must agree with the document's "kind" when both are given.
ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<Kind> kind = {}, const Overrides& ov = {});
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Kind> kind = {}, const Overrides& ov = {});

// Peak state-vector dimension the exact backend will allocate; 0 when no
// state vector is involved.
std::size_t exact_dimension(const ExperimentConfig& cfg);

struct ResultSink {
  std::vector<std::string> lines;  // serialized JSON-lines records
  std::vector<std::string> csv;    // header first
  std::map<std::string, nlohmann::ordered_json> documents;

  void record(const nlohmann::ordered_json& j) { lines.push_back(j.dump()); }
  std::string jsonl() const;
  std::string csv_text() const;
};

struct RunResult {
  int status = 0;  // 0 ok, 1 invariant failure, 2 config error
  ResultSink sink;
  std::vector<std::string> failures;
  double wall_time = 0;
};

RunResult run_experiment(const ExperimentConfig& cfg);

// Writes <kind>.jsonl, <kind>.csv, any documents and manifest.json.
void write_outputs(const ExperimentConfig& cfg, const RunResult& r, const std::filesystem::path& dir);

nlohmann::ordered_json manifest(const ExperimentConfig& cfg, const RunResult& r, const std::vector<std::string>& files);

}  // namespace s3q::harness
