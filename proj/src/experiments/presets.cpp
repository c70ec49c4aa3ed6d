#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ccd/core/operator.hpp"
#include "ccd/evolution/process.hpp"
#include "ccd/experiments/experiments.hpp"

namespace ccd::experiments {

using io::Config;
using io::KeySpec;
using io::ValueType;

namespace {

KeySpec real(std::string key, std::optional<std::string> fallback, std::string help) {
  return {std::move(key), ValueType::real, std::move(fallback), {}, std::move(help)};
}
KeySpec integer(std::string key, std::optional<std::string> fallback, std::string help) {
  return {std::move(key), ValueType::integer, std::move(fallback), {}, std::move(help)};
}
KeySpec boolean(std::string key, std::string fallback, std::string help) {
  return {std::move(key), ValueType::boolean, std::move(fallback), {}, std::move(help)};
}
KeySpec choice(std::string key, std::string fallback, std::vector<std::string> choices, std::string help) {
  return {std::move(key), ValueType::choice, std::move(fallback), std::move(choices), std::move(help)};
}

const std::string kHalfPi = io::format_number(std::numbers::pi / 2.0);
const std::string kSigmaB = io::format_number(2.0 * std::numbers::pi * 0.05);
const std::string kThirtieth = io::format_number(1.0 / 30.0);

void common_keys(std::vector<KeySpec>& s, const std::string& frame, double horizon, double interval) {
  s.push_back({"seed", ValueType::unsigned64, "1", {}, "master seed of all noise realizations"});
  s.push_back(choice("mode", "desk", {"desk", "full"}, "desk: N = 200 (100 for persistent-rabi); full: N = 2000"));
  s.push_back(integer("realizations", std::nullopt, "noise realizations N (default from mode)"));
  s.push_back(integer("threads", "1", "worker threads; results do not depend on it"));
  s.push_back(choice("kernel", "auto", {"auto", "reference", "portable", "avx2"}, "Bloch step kernel"));
  s.push_back(choice("frame", frame, {"lab", "int1", "int2"}, "simulation frame of the main run"));
  s.push_back(real("horizon_us", io::format_number(horizon), "simulated time"));
  s.push_back(real("output_interval_us", io::format_number(interval), "sample spacing of the outputs"));
  s.push_back(real("dt_us", "0", "integration step of the main run (0: largest admissible)"));
  s.push_back(real("noise_spacing_us", "0", "noise update spacing (0: min(tau/100, 50 dt))"));
  s.push_back(real("carrier_mhz", "2042", "qubit transition frequency"));
  s.push_back(real("t1_us", "1500", "longitudinal relaxation time"));
  s.push_back(real("sigma_rel", "0.0024", "relative amplitude noise std of every drive"));
  s.push_back(real("tau_m_us", "1000", "correlation time of the amplitude noise"));
  s.push_back(real("sigma_b", kSigmaB, "magnetic noise std, rad/us (free parameter)"));
  s.push_back(real("tau_c_us", "25", "correlation time of the magnetic noise"));
  s.push_back(integer("bootstrap_resamples", "1000", "bootstrap resamples of the decay fits"));
  s.push_back(real("confidence", "0.95", "bootstrap interval level"));
}

void drive_keys(std::vector<KeySpec>& s, int order, const std::vector<double>& omega, bool allow_both) {
  s.push_back(integer("order", std::to_string(order), "number of drives"));
  for (int k = 1; k <= drives::kMaxOrder; ++k) {
    std::optional<std::string> w;
    if (static_cast<std::size_t>(k - 1) < omega.size()) w = io::format_number(omega[k - 1]);
    s.push_back(real("omega" + std::to_string(k) + "_mhz", w, "amplitude of drive " + std::to_string(k)));
  }
  for (int k = 1; k <= drives::kMaxOrder; ++k)
    s.push_back(real("phase" + std::to_string(k), "0", "phase of drive " + std::to_string(k) + " (rad)"));
  std::vector<std::string> variants{"refined", "simplified"};
  if (allow_both) variants.push_back("both");
  s.push_back(choice("variant", allow_both ? "both" : "refined", variants, "form of the second drive"));
}

void cv_keys(std::vector<KeySpec>& s) {
  s.push_back(boolean("cross_validate", "true", "second-frame runs: check against the first frame first"));
  s.push_back(real("cv_window_us", "50", "cross-validation window"));
  s.push_back(integer("cv_lanes", "16", "cross-validation realizations"));
  s.push_back(real("cv_min_fidelity", "0.999", "minimum per-lane state fidelity"));
}

void control_keys(std::vector<KeySpec>& s, double omega1) {
  s.push_back(real("control_omega1_mhz", io::format_number(omega1), "single-drive control amplitude"));
  s.push_back(real("control_horizon_us", "10", "single-drive control horizon"));
  s.push_back(real("control_interval_us", "0.0025", "single-drive control sample spacing"));
}

void positive(const Config& c, const std::string& key) {
  if (!(c.real(key) > 0.0)) throw io::ConfigError(key + " must be > 0");
}

void at_least(const Config& c, const std::string& key, std::int64_t v) {
  if (c.integer(key) < v) throw io::ConfigError(key + " must be >= " + std::to_string(v));
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"rabi",         "persistent-rabi", "dressed-ramsey",     "t2-sweep",
                                              "order-scaling", "dressed-control", "two-qubit-fidelity", "noise-selfcheck"};
  return names;
}

Config default_config(const std::string& sub) {
  std::vector<KeySpec> s;
  if (sub == "noise-selfcheck") {
    s.push_back({"seed", ValueType::unsigned64, "1", {}, "master seed"});
    s.push_back(integer("chain_steps", "1000000", "length of the long OU chain"));
    return Config(sub, std::move(s));
  }
  if (sub == "rabi") {
    common_keys(s, "int1", 10.0, 0.0025);
    drive_keys(s, 1, {40.0}, false);
  } else if (sub == "persistent-rabi") {
    common_keys(s, "int2", 300.0, 0.05);
    drive_keys(s, 2, {20.0, 2.0}, false);
    cv_keys(s);
    control_keys(s, 40.0);
  } else if (sub == "dressed-ramsey") {
    common_keys(s, "int2", 150.0, 0.05);
    drive_keys(s, 2, {40.0, 0.04}, true);
    cv_keys(s);
    control_keys(s, 40.0);
  } else if (sub == "t2-sweep") {
    common_keys(s, "int2", 150.0, 0.05);
    drive_keys(s, 2, {40.0}, true);
    cv_keys(s);
    s.push_back(integer("sweep_points", "9", "log-spaced values of omega2 / omega1"));
    s.push_back(real("sweep_ratio_min", "0.001", "smallest omega2 / omega1"));
    s.push_back(real("sweep_ratio_max", "0.1", "largest omega2 / omega1"));
  } else if (sub == "order-scaling") {
    common_keys(s, "int2", 4000.0, 0.0025);
    drive_keys(s, 4, {40.0}, false);
    cv_keys(s);
    s.push_back(real("ratio", kThirtieth, "omega_k / omega_(k-1) for amplitudes not given"));
    for (int k = 1; k <= 4; ++k) {
      static const double h[] = {10.0, 400.0, 2000.0, 4000.0};
      static const double dt[] = {0.0025, 0.025, 0.25, 2.5};
      s.push_back(real("horizon_k" + std::to_string(k) + "_us", io::format_number(h[k - 1]),
                       "horizon of the order-" + std::to_string(k) + " run (capped by horizon_us)"));
      s.push_back(real("interval_k" + std::to_string(k) + "_us", io::format_number(dt[k - 1]),
                       "sample spacing of the order-" + std::to_string(k) + " run"));
    }
  } else if (sub == "dressed-control") {
    common_keys(s, "int2", 250.0, 0.05);
    drive_keys(s, 2, {40.0, 40.0 / 30.0}, false);
    cv_keys(s);
    s.push_back(real("rf_omega_mhz", std::nullopt, "rf control amplitude (default omega2 / 15)"));
    s.push_back(real("rf_phase", "0", "rf phase relative to the second drive (rad)"));
  } else if (sub == "two-qubit-fidelity") {
    common_keys(s, "int1", 10.0, 0.5);
    drive_keys(s, 2, {40.0, 40.0 / 30.0}, false);
    s.push_back(real("j_mhz", "0.05", "dipolar coupling J"));
    s.push_back(real("dissipation_block_us", "0.02", "relaxation block length"));
  } else {
    throw io::ConfigError("unknown subcommand '" + sub + "'");
  }
  Config c(sub, std::move(s));
  if (sub == "dressed-ramsey" || sub == "t2-sweep") c.set_default("phase2", kHalfPi);
  if (sub == "persistent-rabi") c.set_default("variant", "simplified");
  return c;
}

drives::SchemeConfig scheme_from(const Config& c, int order) {
  if (order <= 0) order = static_cast<int>(c.integer("order"));
  drives::SchemeConfig s;
  s.carrier_mhz = c.real("carrier_mhz");
  s.magnetic = {c.real("sigma_b"), c.real("tau_c_us"), 0};
  const std::string variant = c.text("variant");
  for (int k = 1; k <= order; ++k) {
    drives::DriveSpec d;
    d.order = k;
    d.amplitude_mhz = c.real("omega" + std::to_string(k) + "_mhz");
    d.phase = c.real("phase" + std::to_string(k));
    if (k == 2 && variant != "both") d.variant = drives::parse_variant(variant);
    d.noise = {c.real("sigma_rel"), c.real("tau_m_us"), 0};
    s.drives.push_back(d);
  }
  s.frame = drives::parse_frame(c.text("frame"));
  if (c.known("rf_omega_mhz")) {
    s.rf.amplitude_mhz = c.real("rf_omega_mhz");
    s.rf.phases = {0.0, c.real("rf_phase")};
  }
  return s;
}

evolution::TrajectoryRun trajectory_from(const Config& c, const drives::SchemeConfig& s, double horizon_us,
                                         double output_interval_us) {
  evolution::TrajectoryRun run;
  run.scheme = s;
  run.lindblad = evolution::LindbladConfig::from_t1(c.real("t1_us"), 1);
  run.horizon_us = horizon_us;
  run.output_interval_us = output_interval_us;
  run.dt_us = c.real("dt_us");
  run.noise_spacing_us = c.real("noise_spacing_us");
  run.seed = c.unsigned64("seed");
  run.kernel = evolution::parse_kernel(c.text("kernel"));
  return run;
}

void resolve(Config& c) {
  const std::string& sub = c.name();
  if (sub == "noise-selfcheck") {
    at_least(c, "chain_steps", 1000);
    c.unsigned64("seed");
    return;
  }
  if (!c.explicit_value("realizations")) {
    const bool full = c.text("mode") == "full";
    c.set_default("realizations", full ? "2000" : (sub == "persistent-rabi" ? "100" : "200"));
  }
  if (sub == "order-scaling") {
    for (int k = 2; k <= drives::kMaxOrder; ++k) {
      const std::string key = "omega" + std::to_string(k) + "_mhz";
      if (!c.explicit_value(key))
        c.set_default(key, io::format_number(c.real("omega" + std::to_string(k - 1) + "_mhz") * c.real("ratio")));
    }
  }
  if (sub == "dressed-control" && !c.explicit_value("rf_omega_mhz"))
    c.set_default("rf_omega_mhz", io::format_number(c.real("omega2_mhz") / 15.0));

  at_least(c, "realizations", 1);
  at_least(c, "threads", 1);
  at_least(c, "bootstrap_resamples", 0);
  at_least(c, "order", sub == "rabi" ? 1 : 2);
  if (c.integer("order") > drives::kMaxOrder) throw io::ConfigError("order must be <= 4");
  if (sub == "order-scaling" && c.integer("order") < 2) throw io::ConfigError("order-scaling needs order >= 2");
  positive(c, "horizon_us");
  positive(c, "output_interval_us");
  positive(c, "t1_us");
  if (!(c.real("dt_us") >= 0.0)) throw io::ConfigError("dt_us must be >= 0");
  if (!(c.real("confidence") > 0.0 && c.real("confidence") < 1.0)) throw io::ConfigError("confidence must be in (0, 1)");
  if (c.known("cv_lanes")) at_least(c, "cv_lanes", 1);
  if (sub == "t2-sweep") {
    at_least(c, "sweep_points", 3);
    positive(c, "sweep_ratio_min");
    if (!(c.real("sweep_ratio_max") > c.real("sweep_ratio_min"))) throw io::ConfigError("sweep_ratio_max must exceed sweep_ratio_min");
  }
  if (sub == "two-qubit-fidelity") positive(c, "dissipation_block_us");

  // Required amplitudes and scheme invariants.
  drives::SchemeConfig s;
  try {
    if (sub == "t2-sweep") {
      Config probe = c;
      probe.set("omega2_mhz", c.real("omega1_mhz") * c.real("sweep_ratio_max"));
      s = scheme_from(probe);
    } else {
      s = scheme_from(c);
    }
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw io::ConfigError(e.what());
  }

  // dt rule on the main run.
  if (c.real("dt_us") > 0.0) {
    try {
      if (sub == "two-qubit-fidelity") {
        evolution::ProcessRun p;
        p.a = s;
        p.b = s;
        p.j_mhz = c.real("j_mhz");
        p.horizon_us = c.real("horizon_us");
        p.output_interval_us = c.real("output_interval_us");
        p.dt_us = c.real("dt_us");
        evolution::resolve_process_grid(p);
      } else {
        double interval = c.real("output_interval_us");
        if (sub == "order-scaling") interval = c.real("interval_k" + std::to_string(c.integer("order")) + "_us");
        evolution::resolve_grid(trajectory_from(c, s, c.real("horizon_us"), interval));
      }
    } catch (const std::invalid_argument& e) {
      throw io::ConfigError(e.what());
    }
  }
}

namespace {

ExperimentPreset make_preset(const std::string& sub, const std::string& recipe, int order = 0) {
  Config c = default_config(sub);
  resolve(c);
  ExperimentPreset p;
  p.name = sub;
  p.scheme = scheme_from(c, order);
  p.lindblad = evolution::LindbladConfig::from_t1(c.real("t1_us"), sub == "two-qubit-fidelity" ? 2 : 1);
  p.horizon_us = c.real("horizon_us");
  p.output_interval_us = c.real("output_interval_us");
  p.realizations = static_cast<std::size_t>(c.integer("realizations"));
  p.recipe = recipe;
  return p;
}

}  // namespace

ExperimentPreset preset_single_drive_rabi() {
  ExperimentPreset p = make_preset("rabi", "gaussian envelope fit of the Rabi contrast");
  p.references = {{"b1", 98.0, "kHz", 0.15, "relative", ""}, {"t2", 2.3, "us", 0.20, "relative", ""}};
  return p;
}

ExperimentPreset preset_persistent_rabi() {
  ExperimentPreset p = make_preset("persistent-rabi", "Rabi contrast at the horizon; single-drive control");
  p.references = {{"contrast_ratio_at_300us", std::exp(-1.0), "", 0.0, "at_least", ""},
                  {"control_decay_time", 3.0, "us", 0.0, "at_most", ""}};
  return p;
}

std::vector<ExperimentPreset> preset_dressed_ramsey_t2_sweep() {
  Config c = default_config("t2-sweep");
  resolve(c);
  const auto n = static_cast<int>(c.integer("sweep_points"));
  const double lo = c.real("sweep_ratio_min"), hi = c.real("sweep_ratio_max");
  std::vector<ExperimentPreset> out;
  for (const char* v : {"refined", "simplified"}) {
    for (int i = 0; i < n; ++i) {
      Config ci = c;
      const double ratio = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
      ci.set("omega2_mhz", ci.real("omega1_mhz") * ratio);
      ci.set("variant", v);
      ExperimentPreset p;
      p.name = std::string("t2-sweep/") + v + "/" + io::format_number(ratio);
      p.scheme = scheme_from(ci);
      p.lindblad = evolution::LindbladConfig::from_t1(ci.real("t1_us"), 1);
      p.horizon_us = ci.real("horizon_us");
      p.output_interval_us = ci.real("output_interval_us");
      p.realizations = static_cast<std::size_t>(ci.integer("realizations"));
      p.recipe = "T2 of the dressed Rabi contrast";
      p.references = {{"interior_maximum", 0.0, "", 0.0, "property", ""}};
      out.push_back(p);
    }
  }
  return out;
}

ExperimentPreset preset_order_scaling() {
  ExperimentPreset p = make_preset("order-scaling", "T2 and envelope model for K = 1..4");
  p.references = {{"t2_k4_over_t1", 0.5, "", 0.0, "at_least", ""}};
  return p;
}

ExperimentPreset preset_dressed_control() {
  ExperimentPreset p = make_preset("dressed-control", "dressed-population oscillation frequency");
  p.references = {{"oscillation_frequency", p.scheme.rf.amplitude_mhz / 2.0, "MHz", 0.02, "relative", ""}};
  return p;
}

ExperimentPreset preset_two_qubit_fidelity() {
  ExperimentPreset p = make_preset("two-qubit-fidelity", "gate fidelity against the double-RWA generator");
  p.references = {{"noiseless_fidelity", 0.99, "", 0.0, "at_least", ""}};
  return p;
}

}  // namespace ccd::experiments
