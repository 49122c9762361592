#pragma once

// Experiment runner: a JSON configuration names a model and an ordered list
// of tasks; each task writes one CSV file into the output directory and the
// run finishes with manifest.json.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qembed/model.hpp"

namespace qembed {

inline constexpr const char* kVersion = "0.1.0";

/// Model source. `builder` is one of "file", "hubbard", "random",
/// "impurity".
struct ModelSpec {
  std::string builder;
  std::string path;             // file
  int sites = 0;                // hubbard (spatial sites, spin doubled)
  double t = 1.0;
  double u = 0.0;
  bool periodic = false;
  int modes = 0;                // random, impurity (N)
  int impurity_modes = 0;       // impurity (M)
  double gap = 0.0;             // impurity: |eps| >= gap
  double scale = 0.5;           // random / impurity interaction strength
  std::optional<std::uint64_t> seed;  // defaults to the global seed
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// One task. Only the fields of the task's type are read or written.
struct TaskSpec {
  std::string type;  // solve | mean-field | embed | guiding | oligomer |
                     // impurity-ensemble | qpe-cost
  // embed
  std::string scheme;         // dmet | huzinaga
  std::vector<int> fragment;  // modes (dmet) or mean-field orbitals (huzinaga)
  double mu = 1e3;
  // guiding
  std::string kind;           // hf | sos | mps | theorem1
  std::vector<int> values;    // L, D or K list (guiding); k list (oligomer)
  bool all_values = false;    // sos: L = 1..dim
  std::string policy = "auto";  // theorem1 freeze policy
  // oligomer
  std::optional<double> coupling;
  // impurity-ensemble
  int count = 0;
  int n_modes = 0;
  int impurity_modes = 0;
  int electrons = 0;
  double gap = 0.0;
  std::optional<std::uint64_t> seed;
  // qpe-cost
  std::vector<double> eta;
  std::vector<double> eps;
  std::vector<std::string> modes;
  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct ExperimentConfig {
  std::optional<ModelSpec> model;
  std::optional<int> electrons;  // file models default to NELEC
  std::uint64_t seed = 0;
  std::string output = "out";
  std::optional<std::uint64_t> max_dim;
  std::vector<TaskSpec> tasks;
  /// Directory that relative model paths are resolved against.
  std::filesystem::path base_dir;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ConfigError on malformed JSON or unknown keys and wrong types.
ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON text; parse_config(config_to_json(c)) == c up to base_dir.
std::string config_to_json(const ExperimentConfig& c);

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct Diagnostic {
  std::string where;  // JSON-pointer-like location, e.g. "/tasks/2/fragment"
  std::string message;
};

/// Static checks without running anything. Empty means valid.
std::vector<Diagnostic> validate(const ExperimentConfig& c);

/// Model and electron count resolved from a config.
struct ResolvedModel {
  MolecularIntegrals integrals;
  int electrons = 0;
  std::optional<ImpurityModel> impurity;  // for the impurity builder
  std::string hash;
};
ResolvedModel resolve_model(const ExperimentConfig& c);

struct TaskOutput {
  std::string type;
  std::filesystem::path csv;
  int rows = 0;
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 2 validation failure, 3 runtime failure
  std::vector<TaskOutput> outputs;
  std::vector<Diagnostic> diagnostics;
  std::string error;  // runtime failure message
  double wall_seconds = 0.0;
};

/// Runs every task in order into c.output (created if missing). Writes
/// manifest.json, plus error.json when a task fails.
RunResult run(const ExperimentConfig& c);

/// Fixed CSV header of each task type (guiding uses its kind).
std::string csv_header(const TaskSpec& t);

}  // namespace qembed
