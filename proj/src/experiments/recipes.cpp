#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ccd/analysis/fit.hpp"
#include "ccd/analysis/spectrum.hpp"
#include "ccd/core/operator.hpp"
#include "ccd/core/units.hpp"
#include "ccd/drives/hamiltonians.hpp"
#include "ccd/evolution/process.hpp"
#include "ccd/experiments/experiments.hpp"
#include "ccd/noise/selfcheck.hpp"

namespace ccd::experiments {

using analysis::DecayModel;
using analysis::FitResult;
using evolution::EnsembleResult;
using evolution::TrajectoryRun;
using io::Config;
using io::Json;
using io::number;

bool Outcome::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

Json to_json(const Reference& r) {
  Json j;
  j["quantity"] = r.quantity;
  j["published_value"] = number(r.value);
  j["unit"] = r.unit;
  j["comparison"] = r.comparison;
  if (r.comparison == "relative") j["relative_tolerance"] = r.tolerance;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Json to_json(const Check& c) {
  Json j;
  j["name"] = c.name;
  j["value"] = number(c.value);
  j["expected"] = number(c.expected);
  j["tolerance"] = number(c.tolerance);
  j["pass"] = c.pass;
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

namespace {

struct Ctx {
  const Config& c;
  std::ostream* log;
  std::size_t n;
  std::uint64_t seed;
  unsigned threads;
  analysis::BootstrapOptions boot;
};

Ctx make_ctx(const Config& c, std::ostream* log) {
  Ctx x{c, log, 0, 0, 1, {}};
  if (c.name() == "noise-selfcheck") return x;
  x.n = static_cast<std::size_t>(c.integer("realizations"));
  x.seed = c.unsigned64("seed");
  x.threads = static_cast<unsigned>(c.integer("threads"));
  x.boot.resamples = static_cast<std::size_t>(c.integer("bootstrap_resamples"));
  x.boot.confidence = c.real("confidence");
  x.boot.seed = x.seed;
  return x;
}

template <class... A>
void say(const Ctx& x, const A&... a) {
  if (!x.log) return;
  std::ostringstream os;
  (os << ... << a);
  *x.log << os.str() << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json grid_json(const evolution::TimeGrid& g) {
  Json j;
  j["dt_us"] = g.dt;
  j["dt_max_us"] = g.dt_max;
  j["f_max_mhz"] = g.f_max_mhz;
  j["noise_spacing_us"] = g.noise_spacing();
  j["outputs"] = g.outputs;
  return j;
}

Json fit_json(const FitResult& f) {
  Json j;
  j["model"] = analysis::to_string(f.model);
  j["parameter"] = f.parameter;
  j["parameter_unit"] = f.model == DecayModel::gaussian ? "rad/us" : "1/us";
  j["parameter_stderr"] = f.parameter_stderr;
  j["t2_us"] = number(f.t2);
  j["t2_low_us"] = number(f.t2_low);
  j["t2_high_us"] = number(f.t2_high);
  j["t2_infinite"] = f.t2_infinite;
  if (f.t2_infinite) j["t2_lower_bound_us"] = f.t2_lower_bound;
  j["residual_norm"] = f.residual_norm;
  j["points"] = f.points;
  j["confidence"] = f.confidence;
  j["resamples"] = f.resamples;
  return j;
}

double rel_stderr(const FitResult& f) { return f.parameter > 0.0 ? f.parameter_stderr / f.parameter : 0.0; }

Check relative_check(std::string name, double value, double expected, double base, double rel_err) {
  Check k;
  k.name = std::move(name);
  k.value = value;
  k.expected = expected;
  k.tolerance = base + 2.0 * rel_err;
  k.pass = std::isfinite(value) && std::abs(value / expected - 1.0) <= k.tolerance;
  std::ostringstream os;
  os << "relative tolerance " << base << " + 2 x bootstrap relative stderr " << rel_err;
  k.detail = os.str();
  return k;
}

Check bound_check(std::string name, double value, double bound, bool at_least, std::string detail = {}) {
  Check k;
  k.name = std::move(name);
  k.value = value;
  k.expected = bound;
  k.pass = at_least ? value >= bound : value <= bound;
  if (std::isnan(value)) k.pass = false;
  k.detail = detail.empty() ? (at_least ? "value >= expected" : "value <= expected") : std::move(detail);
  return k;
}

Check failed_check(std::string name, const std::string& why) {
  Check k;
  k.name = std::move(name);
  k.value = std::nan("");
  k.expected = std::nan("");
  k.tolerance = std::nan("");
  k.detail = why;
  return k;
}

EnsembleResult ensemble(const Ctx& x, const TrajectoryRun& run, const std::string& label) {
  const auto t0 = std::chrono::steady_clock::now();
  EnsembleResult r = evolution::run_ensemble(run, x.n, x.seed, x.threads);
  say(x, label, ": N=", x.n, " horizon=", run.horizon_us, " us frame=", drives::to_string(run.scheme.frame), " dt=",
      r.grid.dt, " us (", seconds_since(t0), " s)");
  return r;
}

// Mandatory first-frame cross-validation of second-frame runs.
void cross_check(const Ctx& x, const TrajectoryRun& run, Outcome& out, const std::string& label) {
  if (run.scheme.frame != drives::FrameLabel::interaction2 || !x.c.known("cross_validate") ||
      !x.c.boolean("cross_validate"))
    return;
  TrajectoryRun cv = run;
  cv.dt_us = 0.0;
  cv.noise_spacing_us = 0.0;
  const auto lanes = static_cast<std::size_t>(x.c.integer("cv_lanes"));
  const double window = std::min(x.c.real("cv_window_us"), run.horizon_us);
  const auto t0 = std::chrono::steady_clock::now();
  const evolution::CrossValidation r = evolution::cross_validate(cv, lanes, x.seed, window, x.threads);
  const double need = x.c.real("cv_min_fidelity");
  say(x, label, ": cross-validation over ", window, " us, min fidelity ", r.min_fidelity, " (", seconds_since(t0), " s)");
  Json j;
  j["window_us"] = window;
  j["lanes"] = lanes;
  j["min_fidelity"] = r.min_fidelity;
  j["worst_time_us"] = r.worst_time;
  j["required"] = need;
  out.results["cross_validation"][label] = j;
  if (!(r.min_fidelity >= need)) {
    std::ostringstream os;
    os << label << ": second-frame cross-validation failed, min fidelity " << r.min_fidelity << " < " << need
       << " at t = " << r.worst_time << " us";
    throw InvariantViolation(os.str());
  }
}

io::Table contrast_table(const std::string& name, const EnsembleResult& r) {
  io::Table t;
  t.name = name;
  t.add("time_us", r.times);
  t.add("contrast", r.contrast);
  t.add("contrast_stderr", r.contrast_stderr);
  t.add("coherence", r.coherence);
  t.add("population_down", r.population_down);
  return t;
}

// Amplitude of the first-drive Rabi oscillation: the part of the mean
// observation-frame vector transverse to the first drive axis.
std::vector<double> rabi_amplitude(const EnsembleResult& r) {
  std::vector<double> a(r.times.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::hypot(r.mean_obs[1][i], r.mean_obs[2][i]);
  return a;
}

// First time the series falls below level (linear interpolation); NaN if never.
double first_crossing(const std::vector<double>& t, const std::vector<double>& v, double level) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < level) {
      const double f = (v[i - 1] - level) / (v[i - 1] - v[i]);
      return t[i - 1] + f * (t[i] - t[i - 1]);
    }
  return std::nan("");
}

double value_at(const std::vector<double>& t, const std::vector<double>& v, double at) {
  const auto it = std::lower_bound(t.begin(), t.end(), at - 1e-9);
  const std::size_t i = it == t.end() ? t.size() - 1 : static_cast<std::size_t>(it - t.begin());
  return v[i];
}

double khz(double rad_per_us) { return mhz_from_angular(rad_per_us) * 1e3; }

TrajectoryRun single_drive_control(const Ctx& x, double omega1_mhz) {
  Config cc = x.c;
  cc.set("omega1_mhz", omega1_mhz);
  cc.set("frame", "int1");
  drives::SchemeConfig s = scheme_from(cc, 1);
  TrajectoryRun run = trajectory_from(cc, s, cc.real("control_horizon_us"), cc.real("control_interval_us"));
  run.dt_us = 0.0;
  run.noise_spacing_us = 0.0;
  run.reference_order = 1;
  return run;
}

// ---------------------------------------------------------------------------

Outcome rabi(const Ctx& x) {
  Outcome out;
  const Config& c = x.c;
  const drives::SchemeConfig s = scheme_from(c);
  const TrajectoryRun run = trajectory_from(c, s, c.real("horizon_us"), c.real("output_interval_us"));
  cross_check(x, run, out, "rabi");
  const EnsembleResult r = ensemble(x, run, "rabi");
  out.tables.push_back(contrast_table("rabi", r));
  out.results["grid"] = grid_json(r.grid);
  out.results["kernel"] = evolution::to_string(r.kernel);
  out.references = preset_single_drive_rabi().references;
  try {
    const FitResult f = analysis::fit_ensemble(r, DecayModel::gaussian, x.boot);
    out.results["fit"] = fit_json(f);
    out.results["b1_khz"] = khz(f.parameter);
    out.results["b1_khz_stderr"] = khz(f.parameter_stderr);
    out.results["quasi_static_b1_khz"] = s.drives[0].amplitude_mhz * s.drives[0].noise.sigma * 1e3;
    out.checks.push_back(relative_check("b1_khz", khz(f.parameter), 98.0, 0.15, rel_stderr(f)));
    out.checks.push_back(relative_check("t2_us", f.t2, 2.3, 0.20, rel_stderr(f)));
  } catch (const analysis::FitError& e) {
    out.checks.push_back(failed_check("b1_khz", e.what()));
    out.checks.push_back(failed_check("t2_us", e.what()));
  }
  return out;
}

Outcome persistent_rabi(const Ctx& x) {
  Outcome out;
  const Config& c = x.c;
  const drives::SchemeConfig s = scheme_from(c);
  TrajectoryRun run = trajectory_from(c, s, c.real("horizon_us"), c.real("output_interval_us"));
  run.reference_order = 1;
  cross_check(x, run, out, "persistent-rabi");
  const EnsembleResult r = ensemble(x, run, "persistent-rabi");
  const std::vector<double> amp = rabi_amplitude(r);
  io::Table t;
  t.name = "persistent-rabi";
  t.add("time_us", r.times);
  t.add("rabi_contrast", amp);
  for (int k = 0; k < 3; ++k) t.add(std::string("obs_") + "xyz"[k], r.mean_obs[k]);
  out.tables.push_back(t);
  out.references = preset_persistent_rabi().references;

  const double at = std::min(300.0, c.real("horizon_us"));
  const double ratio = value_at(r.times, amp, at) / amp.front();
  out.results["grid"] = grid_json(r.grid);
  out.results["evaluation_time_us"] = at;
  out.results["rabi_contrast_ratio"] = ratio;
  out.checks.push_back(bound_check("rabi_contrast_ratio", ratio, std::exp(-1.0), true,
                                   "contrast(t) / contrast(0) >= 1/e at t = " + io::format_number(at) + " us"));

  const double wc = c.real("control_omega1_mhz");
  auto control = [&](double w, const std::string& label) {
    const EnsembleResult rc = ensemble(x, single_drive_control(x, w), label);
    const std::vector<double> a = rabi_amplitude(rc);
    const double tc = first_crossing(rc.times, a, std::exp(-1.0) * a.front());
    Json j;
    j["omega1_mhz"] = w;
    j["decay_time_us"] = number(tc);
    j["horizon_us"] = rc.times.back();
    out.results[label] = j;
    io::Table tt;
    tt.name = "persistent-rabi_" + label;
    tt.add("time_us", rc.times);
    tt.add("rabi_contrast", a);
    out.tables.push_back(tt);
    return tc;
  };
  const double tc = control(wc, "control");
  out.checks.push_back(bound_check("control_decay_time_us", std::isnan(tc) ? INFINITY : tc, 3.0, false,
                                   "single drive at " + io::format_number(wc) + " MHz falls below 1/e by 3 us"));
  if (std::abs(wc - s.drives[0].amplitude_mhz) > 1e-12) control(s.drives[0].amplitude_mhz, "control_same_omega1");
  return out;
}

FitResult single_drive_t2(const Ctx& x, Outcome& out) {
  const double w = x.c.real("control_omega1_mhz");
  TrajectoryRun run = single_drive_control(x, w);
  run.reference_order = 0;
  const EnsembleResult r = ensemble(x, run, "single-drive");
  const FitResult f = analysis::fit_ensemble(r, DecayModel::gaussian, x.boot);
  out.results["single_drive"] = fit_json(f);
  out.results["single_drive"]["omega1_mhz"] = w;
  return f;
}

std::vector<std::string> variants_of(const Config& c) {
  const std::string v = c.text("variant");
  if (v == "both") return {"refined", "simplified"};
  return {v};
}

Outcome dressed_ramsey(const Ctx& x) {
  Outcome out;
  const Config& c = x.c;
  out.references = {{"t2_gain_over_single_drive", 5.0, "", 0.0, "at_least", ""},
                    {"t2", 21.0, "us", 0.30, "relative", "compared in full mode only"}};
  FitResult single;
  try {
    single = single_drive_t2(x, out);
  } catch (const analysis::FitError& e) {
    out.checks.push_back(failed_check("single_drive_t2", e.what()));
    return out;
  }
  io::Table t;
  t.name = "dressed-ramsey";
  for (const std::string& v : variants_of(c)) {
    Config cv = c;
    cv.set("variant", v);
    const drives::SchemeConfig s = scheme_from(cv);
    const TrajectoryRun run = trajectory_from(cv, s, c.real("horizon_us"), c.real("output_interval_us"));
    cross_check(x, run, out, v);
    const EnsembleResult r = ensemble(x, run, "dressed-ramsey/" + v);
    if (t.data.empty()) t.add("time_us", r.times);
    t.add("contrast_" + v, r.contrast);
    t.add("contrast_stderr_" + v, r.contrast_stderr);
    try {
      const analysis::ModelSelection m = analysis::select_model(r, x.boot);
      const FitResult& f = m.chosen();
      Json j;
      j["gaussian"] = fit_json(m.gaussian);
      j["exponential"] = fit_json(m.exponential);
      j["best_model"] = analysis::to_string(m.best);
      j["t2_us"] = number(f.t2);
      j["gain"] = number(f.t2 / single.t2);
      j["grid"] = grid_json(r.grid);
      out.results[v] = j;
      out.checks.push_back(bound_check("t2_gain_" + v, f.t2 / single.t2, 5.0, true, "T2 / single-drive T2 >= 5"));
      if (c.text("mode") == "full") out.checks.push_back(relative_check("t2_us_" + v, f.t2, 21.0, 0.30, rel_stderr(f)));
    } catch (const analysis::FitError& e) {
      out.checks.push_back(failed_check("t2_gain_" + v, e.what()));
    }
  }
  out.tables.push_back(t);
  return out;
}

Outcome t2_sweep(const Ctx& x) {
  Outcome out;
  const Config& c = x.c;
  out.references = {{"interior_maximum", 0.0, "", 0.0, "property", "T2 peaks at an intermediate omega2"}};
  const auto n = static_cast<int>(c.integer("sweep_points"));
  const double lo = c.real("sweep_ratio_min"), hi = c.real("sweep_ratio_max");
  std::vector<double> ratios;
  for (int i = 0; i < n; ++i) ratios.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  out.results["ratios"] = ratios;
  io::Table t;
  t.name = "t2-sweep";
  std::map<std::string, std::vector<FitResult>> fits;
  for (const std::string& v : variants_of(c)) {
    Json rows = Json::array();
    for (int i = 0; i < n; ++i) {
      Config ci = c;
      ci.set("variant", v);
      ci.set("omega2_mhz", c.real("omega1_mhz") * ratios[i]);
      const drives::SchemeConfig s = scheme_from(ci);
      const TrajectoryRun run = trajectory_from(ci, s, c.real("horizon_us"), c.real("output_interval_us"));
      const std::string label = v + "_" + std::to_string(i);
      cross_check(x, run, out, label);
      const EnsembleResult r = ensemble(x, run, "t2-sweep/" + label);
      if (t.data.empty()) t.add("time_us", r.times);
      t.add("contrast_" + label, r.contrast);
      FitResult f;
      Json row;
      row["ratio"] = ratios[i];
      row["omega2_mhz"] = s.drives[1].amplitude_mhz;
      try {
        const analysis::ModelSelection m = analysis::select_model(r, x.boot);
        f = m.chosen();
        row["best_model"] = analysis::to_string(m.best);
        row["fit"] = fit_json(f);
      } catch (const analysis::FitError& e) {
        f.t2 = f.t2_low = f.t2_high = std::nan("");
        row["error"] = e.what();
      }
      say(x, "  T2 = ", f.t2, " us [", f.t2_low, ", ", f.t2_high, "]");
      fits[v].push_back(f);
      rows.push_back(row);
    }
    out.results[v] = rows;
    // Interior maximum beyond the bootstrap intervals of both endpoints.
    const auto& fv = fits[v];
    int best = 1;
    for (int i = 1; i < n - 1; ++i)
      if (fv[i].t2 > fv[best].t2 || std::isnan(fv[best].t2)) best = i;
    const double edge = std::max(fv.front().t2_high, fv.back().t2_high);
    Check k = bound_check("interior_maximum_" + v, fv[best].t2_low, edge, true,
                          "lower T2 bound at the best interior point exceeds the upper bounds of both endpoints");
    if (std::isnan(edge)) k.pass = false;
    out.checks.push_back(k);
  }
  if (fits.count("refined") && fits.count("simplified")) {
    // Reported, not gated: at equal omega2 the two forms have different
    // dressed gaps, so the comparison mixes two effects.
    int above = 0, above_ci = 0, below_ci = 0;
    for (int i = 0; i < n; ++i) {
      const FitResult& r = fits["refined"][i];
      const FitResult& q = fits["simplified"][i];
      above += r.t2 > q.t2;
      above_ci += r.t2_low > q.t2_high;
      below_ci += r.t2_high < q.t2_low;
    }
    Json j;
    j["points"] = n;
    j["refined_above"] = above;
    j["refined_above_beyond_ci"] = above_ci;
    j["refined_below_beyond_ci"] = below_ci;
    out.results["refined_vs_simplified"] = j;
  }
  out.tables.push_back(t);
  return out;
}

Outcome order_scaling(const Ctx& x) {
  Outcome out;
  const Config& c = x.c;
  out.references = preset_order_scaling().references;
  const int kmax = static_cast<int>(c.integer("order"));
  std::vector<double> t2;
  std::vector<DecayModel> model;
  Json rows = Json::array();
  for (int k = 1; k <= kmax; ++k) {
    Config ck = c;
    if (k == 1 && !c.explicit_value("frame")) ck.set("frame", "int1");
    const drives::SchemeConfig s = scheme_from(ck, k);
    const double horizon = std::min(c.real("horizon_k" + std::to_string(k) + "_us"), c.real("horizon_us"));
    TrajectoryRun run = trajectory_from(ck, s, horizon, c.real("interval_k" + std::to_string(k) + "_us"));
    if (k < kmax) run.dt_us = 0.0;
    const std::string label = "k" + std::to_string(k);
    cross_check(x, run, out, label);
    const EnsembleResult r = ensemble(x, run, "order-scaling/" + label);
    out.tables.push_back(contrast_table("order-scaling_" + label, r));
    Json row;
    row["order"] = k;
    row["amplitudes_mhz"] = Json::array();
    for (const auto& d : s.drives) row["amplitudes_mhz"].push_back(d.amplitude_mhz);
    row["grid"] = grid_json(r.grid);
    try {
      const analysis::ModelSelection m = analysis::select_model(r, x.boot);
      row["gaussian"] = fit_json(m.gaussian);
      row["exponential"] = fit_json(m.exponential);
      row["best_model"] = analysis::to_string(m.best);
      row["t2_us"] = number(m.chosen().t2);
      t2.push_back(m.chosen().t2);
      model.push_back(m.best);
      say(x, "  T2(", k, ") = ", m.chosen().t2, " us, ", analysis::to_string(m.best));
    } catch (const analysis::FitError& e) {
      row["error"] = e.what();
      t2.push_back(std::nan(""));
      model.push_back(DecayModel::gaussian);
    }
    rows.push_back(row);
  }
  out.results["orders"] = rows;
  bool increasing = true;
  for (std::size_t i = 1; i < t2.size(); ++i) increasing = increasing && t2[i] > t2[i - 1];
  for (double v : t2) increasing = increasing && !std::isnan(v);
  Check inc = bound_check("t2_strictly_increasing", increasing ? 1.0 : 0.0, 1.0, true, "T2(K) > T2(K-1) for all K");
  out.checks.push_back(inc);
  const double t1 = c.real("t1_us");
  out.checks.push_back(bound_check("t2_top_over_t1", t2.back() / t1, 0.5, true, "T2(K max) >= T1 / 2"));
  if (kmax >= 3) {
    bool flip = true;
    for (int k = 1; k <= kmax; ++k)
      flip = flip && (model[k - 1] == (k <= 2 ? DecayModel::gaussian : DecayModel::exponential));
    out.checks.push_back(bound_check("envelope_flips_between_k2_and_k3", flip ? 1.0 : 0.0, 1.0, true,
                                     "gaussian for K <= 2, exponential for K >= 3"));
  }
  return out;
}

Outcome dressed_control(const Ctx& x) {
  Outcome out;
  const Config& c = x.c;
  const drives::SchemeConfig s = scheme_from(c);
  TrajectoryRun run = trajectory_from(c, s, c.real("horizon_us"), c.real("output_interval_us"));
  run.initial = {0.0, -1.0, 0.0};
  run.reference_order = 1;
  cross_check(x, run, out, "dressed-control");
  const EnsembleResult r = ensemble(x, run, "dressed-control");
  std::vector<double> pop(r.times.size()), err(r.times.size());
  for (std::size_t i = 0; i < pop.size(); ++i) {
    pop[i] = 0.5 * (1.0 + r.mean_obs[1][i]);
    err[i] = 0.5 * r.stderr_obs[1][i];
  }
  io::Table t;
  t.name = "dressed-control";
  t.add("time_us", r.times);
  t.add("dressed_population", pop);
  t.add("dressed_population_stderr", err);
  for (int k = 0; k < 3; ++k) t.add(std::string("obs_") + "xyz"[k], r.mean_obs[k]);
  out.tables.push_back(t);
  const double expected = s.rf.amplitude_mhz / 2.0;
  out.references = {{"oscillation_frequency", expected, "MHz", 0.02, "relative", "half the rf amplitude"}};
  out.results["grid"] = grid_json(r.grid);
  out.results["expected_frequency_mhz"] = expected;
  try {
    const analysis::SpectralPeak p = analysis::dressed_rabi_frequency(r.times, pop);
    out.results["frequency_mhz"] = p.frequency_mhz;
    out.results["periods"] = p.periods;
    out.results["peak_over_floor"] = p.magnitude / p.noise_floor;
    out.checks.push_back(relative_check("oscillation_frequency_mhz", p.frequency_mhz, expected, 0.02, 0.0));
  } catch (const analysis::FitError& e) {
    out.checks.push_back(failed_check("oscillation_frequency_mhz", e.what()));
  }
  return out;
}

Outcome two_qubit(const Ctx& x) {
  Outcome out;
  const Config& c = x.c;
  const double j = c.real("j_mhz");
  auto make = [&](const drives::SchemeConfig& s, bool noisy) {
    evolution::ProcessRun p;
    p.a = s;
    p.b = s;
    p.j_mhz = j;
    p.horizon_us = c.real("horizon_us");
    p.output_interval_us = c.real("output_interval_us");
    p.dt_us = c.real("dt_us");
    p.noise_spacing_us = c.real("noise_spacing_us");
    p.dissipation_block_us = c.real("dissipation_block_us");
    p.include_noise = noisy;
    if (noisy) p.lindblad = evolution::LindbladConfig::from_t1(c.real("t1_us"), 2);
    p.ideal = drives::two_qubit_effective(s, s, j);
    return p;
  };
  auto go = [&](const evolution::ProcessRun& p, std::size_t n, const std::string& label) {
    const auto t0 = std::chrono::steady_clock::now();
    evolution::ProcessResult r = evolution::run_process_ensemble(p, n, x.seed, x.threads);
    say(x, label, ": N=", n, " dt=", r.grid.dt, " us (", seconds_since(t0), " s)");
    return r;
  };
  const drives::SchemeConfig two = scheme_from(c);
  const drives::SchemeConfig one = scheme_from(c, 1);
  const auto clean = go(make(two, false), 1, "noiseless");
  const auto noisy2 = go(make(two, true), x.n, "two-drive");
  const auto noisy1 = go(make(one, true), x.n, "single-drive");

  io::Table t;
  t.name = "two-qubit-fidelity";
  t.add("time_us", clean.times);
  t.add("fidelity_noiseless", clean.fidelity);
  t.add("fidelity_two_drive", noisy2.fidelity);
  t.add("fidelity_two_drive_stderr", noisy2.fidelity_stderr);
  t.add("fidelity_single_drive", noisy1.fidelity);
  t.add("fidelity_single_drive_stderr", noisy1.fidelity_stderr);
  out.tables.push_back(t);
  out.references = preset_two_qubit_fidelity().references;
  out.references.push_back({"two_drive_over_single_drive", 0.0, "", 0.0, "property", "at J t = 0.5"});

  const double target = 0.5 / j;
  std::size_t idx = clean.times.size() - 1;
  for (std::size_t i = 0; i < clean.times.size(); ++i)
    if (clean.times[i] <= target + 1e-9) idx = i;
  double fmin = 1.0;
  for (std::size_t i = 0; i <= idx; ++i) fmin = std::min(fmin, clean.fidelity[i]);
  out.results["grid"] = grid_json(clean.grid);
  out.results["evaluation_time_us"] = clean.times[idx];
  out.results["j_t"] = j * clean.times[idx];
  out.results["noiseless_min_fidelity"] = fmin;
  out.checks.push_back(bound_check("noiseless_min_fidelity", fmin, 0.99, true, "min F for J t <= 0.5"));

  // Paired bootstrap of the mean fidelity gain (common noise seeds).
  const std::size_t n = x.n;
  std::vector<double> d(n);
  for (std::size_t l = 0; l < n; ++l)
    d[l] = noisy2.fidelity_samples[idx * n + l] - noisy1.fidelity_samples[idx * n + l];
  double mean = 0.0;
  for (double v : d) mean += v;
  mean /= static_cast<double>(n);
  std::mt19937_64 rng(x.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means(std::max<std::size_t>(x.boot.resamples, 1));
  for (double& m : means) {
    double s = 0.0;
    for (std::size_t l = 0; l < n; ++l) s += d[pick(rng)];
    m = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = 0.5 * (1.0 - x.boot.confidence);
  const double low = means[static_cast<std::size_t>(std::floor(alpha * (means.size() - 1)))];
  out.results["fidelity_two_drive"] = noisy2.fidelity[idx];
  out.results["fidelity_single_drive"] = noisy1.fidelity[idx];
  out.results["fidelity_gain"] = mean;
  out.results["fidelity_gain_low"] = low;
  out.checks.push_back(bound_check("two_drive_beats_single_drive", low, 0.0, true,
                                   "lower bootstrap bound of F(two drives) - F(single drive) > 0"));
  out.checks.back().pass = low > 0.0;
  return out;
}

Outcome selfcheck(const Ctx& x) {
  Outcome out;
  const std::uint64_t seed = x.c.unsigned64("seed");
  const auto steps = static_cast<std::size_t>(x.c.integer("chain_steps"));
  const auto t0 = std::chrono::steady_clock::now();
  const noise::SelfCheckReport rep = noise::run_noise_selfcheck(seed, steps);
  say(x, "noise-selfcheck: ", rep.items.size(), " items (", seconds_since(t0), " s)");
  for (const auto& item : rep.items) {
    Check k;
    k.name = item.name;
    k.value = item.value;
    k.expected = item.expected;
    k.tolerance = item.tolerance;
    k.pass = item.pass;
    out.checks.push_back(k);
  }
  std::vector<double> grid;
  for (int i = 0; i <= 1000; ++i) grid.push_back(0.01 * i);
  const noise::NoiseTrajectory tr = noise::sample_trajectory(grid, {1.0, 1.0, seed});
  io::Table t;
  t.name = "noise-selfcheck";
  t.add("time_us", grid);
  t.add("value", tr.values);
  out.tables.push_back(t);
  out.results["sample"] = "unit OU process, tau = 1 us";
  return out;
}

}  // namespace

Outcome run(const Config& cfg, std::ostream* log) {
  const Ctx x = make_ctx(cfg, log);
  const std::string& s = cfg.name();
  if (s == "rabi") return rabi(x);
  if (s == "persistent-rabi") return persistent_rabi(x);
  if (s == "dressed-ramsey") return dressed_ramsey(x);
  if (s == "t2-sweep") return t2_sweep(x);
  if (s == "order-scaling") return order_scaling(x);
  if (s == "dressed-control") return dressed_control(x);
  if (s == "two-qubit-fidelity") return two_qubit(x);
  if (s == "noise-selfcheck") return selfcheck(x);
  throw io::ConfigError("unknown subcommand '" + s + "'");
}

}  // namespace ccd::experiments
