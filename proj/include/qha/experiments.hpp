#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qha/report.hpp"

namespace qha {

// Bad experiment name, unknown config key, unparsable value: caller exits 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numerical validation gate disagreed with its quadrature oracle: caller
// exits 2 and no experiment output is written.
struct GateFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentInfo {
  std::string name;
  std::string description;  // one line, for the registry listing
  std::string anchor;       // the claim the experiment exercises
  std::vector<std::pair<std::string, std::string>> defaults;  // ordered param defaults
  std::string n_alias;      // which param --N aliases ("" means the param named "N")
};

const std::vector<ExperimentInfo>& experiment_registry();
const ExperimentInfo* find_experiment(const std::string& name);

struct ExperimentConfig {
  std::string name;
  // --key=value overrides, applied after the config file, in given order
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string config_path;  // optional JSON object of key -> value
  std::string out_dir;      // empty: no files written
  bool has_seed = false;
  std::uint64_t seed = 1;
  bool has_n = false;
  int n = 0;
  bool has_workers = false;
  int workers = 0;
};

// Closed-form fast paths against their quadrature oracles: the Hermite
// ambiguity block (64 x 64, spread of z, tol 1e-8) and the circle eigenvalue
// recurrence (n < 256 vs the 4096-node quadrature diagonal). Returns "" when
// everything holds, else a message describing the first failure. Setting
// QHA_FORCE_GATE_FAIL simulates a failure (exit-code drill).
std::string run_validation_gates(int workers = 0);

struct ExperimentResult {
  ordered_json report;
  bool all_pass = false;
};

// Resolves the config (overrides > file > defaults, unknown keys rejected),
// runs the validation gates, then the experiment body at N and 2N. Every
// scalar in results carries its N-vs-2N relative delta; pass flags come from
// the base-N run. With out_dir set, writes report.json (byte-stable for a
// fixed config and seed), meta.json (timestamps, workers), spectrum.csv, and
// plot.svg where the experiment declares a plot.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace qha
