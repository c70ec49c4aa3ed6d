#pragma once

// Canned runs. Each subcommand has a config schema whose defaults are the
// preset; run() executes the recipe and returns tables, a JSON result block,
// the published reference values and the pass/fail checks.
//
// Statistical tolerances are computed: the published relative tolerance is
// widened by two bootstrap standard errors of the estimate, so it scales as
// 1/sqrt(N).

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ccd/drives/scheme.hpp"
#include "ccd/evolution/engine.hpp"
#include "ccd/io/config.hpp"
#include "ccd/io/output.hpp"

namespace ccd::experiments {

/// Published value a run is compared against.
struct Reference {
  std::string quantity;
  double value = 0.0;
  std::string unit;
  /// relative tolerance for "relative", otherwise unused
  double tolerance = 0.0;
  std::string comparison = "relative";  ///< relative | at_least | at_most | property
  std::string note;
};

struct Check {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct Outcome {
  std::vector<io::Table> tables;
  io::Json results = io::Json::object();
  std::vector<Reference> references;
  std::vector<Check> checks;

  bool pass() const;
};

struct ExperimentPreset {
  std::string name;
  drives::SchemeConfig scheme;
  evolution::LindbladConfig lindblad;
  double horizon_us = 0.0;
  double output_interval_us = 0.0;
  std::size_t realizations = 0;
  std::string recipe;
  std::vector<Reference> references;
};

const std::vector<std::string>& subcommands();

/// Schema with preset defaults; throws io::ConfigError for an unknown name.
io::Config default_config(const std::string& subcommand);

/// Materializes derived defaults (realizations from mode, ladder amplitudes,
/// rf amplitude) and validates: required fields (io::MissingField), scheme
/// invariants (io::ConfigError) and the dt rule (InvariantViolation).
void resolve(io::Config& cfg);

ExperimentPreset preset_single_drive_rabi();
ExperimentPreset preset_persistent_rabi();
std::vector<ExperimentPreset> preset_dressed_ramsey_t2_sweep();
ExperimentPreset preset_order_scaling();
ExperimentPreset preset_dressed_control();
ExperimentPreset preset_two_qubit_fidelity();

/// Scheme of a resolved config with `order` drives (0: the configured order).
drives::SchemeConfig scheme_from(const io::Config& cfg, int order = 0);
evolution::TrajectoryRun trajectory_from(const io::Config& cfg, const drives::SchemeConfig& s, double horizon_us,
                                         double output_interval_us);

/// Runs the subcommand of a resolved config. Progress lines go to `log`.
Outcome run(const io::Config& cfg, std::ostream* log = nullptr);

io::Json to_json(const Reference& r);
io::Json to_json(const Check& c);

}  // namespace ccd::experiments
