#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commlab/adversary.hpp"

namespace commlab::harness {

using netsim::Bytes;
using graphkit::VertexSet;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  IoError(const std::string& what, std::filesystem::path p)
      : std::runtime_error(what + ": " + p.string()), path(std::move(p)) {}
  std::filesystem::path path;
};

// Flat TOML: key = value lines with strings, integers, floats, booleans and
// arrays of those; '#' comments. Tables and inline tables are rejected.
nlohmann::json parse_toml_subset(const std::string& text);

// Arithmetic over n: numbers, + - * / ^, parentheses, sqrt, log2, ceil, floor.
double eval_expression(const std::string& expr, int n);

struct SeedRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;  // inclusive
  std::uint64_t size() const { return last - first + 1; }
};
// "a..b", inclusive; throws ConfigError when empty or malformed.
SeedRange parse_seed_range(const std::string& s);

struct ExperimentConfig {
  std::string id;
  std::string protocol;
  std::string adversary = "none";
  int n = 16;
  double beta = 0.25;
  int t = -1;  // -1: floor(beta n)
  int kappa = 8;
  double delta = 0.125;
  int committee = 2;
  int sig_threshold = -1;
  std::string reducer = "xor";
  int bridges = 2;
  std::uint64_t prime = crypto::kMersenne61;
  std::string alpha = "ceil(sqrt(n))";
  int threshold = -1;
  std::string channel = "secure";
  std::string ideal_mode = "clique";
  std::string honesty = "at_event";
  SeedRange seeds{0, 0};
  std::vector<int> corrupt;
  int max_corrupt = -1;
  bool replays = true;      // red and blue replays for attack runs
  bool view_check = false;  // paired corrupt-i* runs
  bool metrics = true;      // expansion, locality, cut list
  bool artifacts = true;    // per-seed trace and DOT files
  int cut_list_cap = 64;

  int budget() const;
  int alpha_value() const;
  protocols::ProtocolParams protocol_params() const;
  adversary::AttackParams attack_params() const;
  nlohmann::json to_json() const;
};

// Unknown keys, unknown ids and empty seed ranges are ConfigErrors.
ExperimentConfig config_from_json(const nlohmann::json& j);
// .json or .toml, by extension. The raw document is what CLI flags overlay.
nlohmann::json read_config_document(const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);
void validate(const ExperimentConfig& cfg);

// Inputs of one seeded run.
std::vector<Bytes> seed_inputs(std::uint64_t seed, int n, int kappa);

struct Interval {
  double low = 0;
  double high = 0;
};
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054);

struct SeedRecord {
  std::uint64_t seed = 0;
  nlohmann::json data;  // see run_seed
  std::vector<std::string> violations;
  netsim::Trace trace;
};

SeedRecord run_seed(const ExperimentConfig& cfg, std::uint64_t seed);

struct Report {
  ExperimentConfig config;
  std::vector<SeedRecord> records;  // sorted by seed
  nlohmann::json aggregate;

  int violations() const;
  nlohmann::json to_json() const;
  std::string bytes() const;  // canonical serialisation of to_json()
};

nlohmann::json aggregate(const ExperimentConfig& cfg, const std::vector<SeedRecord>& records);

struct RunOptions {
  std::optional<std::filesystem::path> out_root;  // null: no files
  int workers = 1;
};
Report run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Output root: explicit flag, else $COMMLAB_OUT, else "out".
std::filesystem::path output_root(const std::optional<std::string>& flag);

std::string export_dot(const netsim::Trace& trace, const std::optional<VertexSet>& highlight = std::nullopt);
// Halves for the two-half protocols, otherwise none (export_dot then uses the min cut).
std::optional<VertexSet> default_highlight(const ExperimentConfig& cfg);
std::string export_metrics_csv(const nlohmann::json& report);

struct VerifyResult {
  int checked_seeds = 0;
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};
// Re-checks a written experiment directory from its report and traces.
VerifyResult verify_directory(const std::filesystem::path& dir);

// Exit codes of the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitViolations = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

}  // namespace commlab::harness
