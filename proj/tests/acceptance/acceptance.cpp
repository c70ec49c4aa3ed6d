// End-to-end gate: one PASS/FAIL line per criterion, exit 1 if any fails.
// Runs at desk scale with all available threads (results do not depend on
// the thread count).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ccd/core/units.hpp"
#include "ccd/evolution/engine.hpp"
#include "ccd/evolution/lindblad.hpp"
#include "ccd/evolution/process.hpp"
#include "ccd/experiments/experiments.hpp"
#include "ccd/noise/selfcheck.hpp"

using namespace ccd;
using experiments::Check;
using experiments::Outcome;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> lines;

  void add(bool ok, const std::string& what) {
    pass = pass && ok;
    lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
  void add(const Check& c) {
    std::ostringstream os;
    os << c.name << " = " << c.value << " (expected " << c.expected;
    if (c.tolerance > 0) os << ", tol " << c.tolerance;
    os << ")";
    if (!c.detail.empty()) os << " " << c.detail;
    add(c.pass, os.str());
  }
};

unsigned threads() { return std::max(1u, std::thread::hardware_concurrency()); }

Outcome run_preset(const std::string& sub, const std::map<std::string, std::string>& overrides) {
  io::Config c = experiments::default_config(sub);
  c.set("threads", std::to_string(threads()));
  c.set("mode", "desk");
  for (const auto& [k, v] : overrides) c.set(k, v);
  experiments::resolve(c);
  return experiments::run(c);
}

const Check* find(const Outcome& o, const std::string& name) {
  for (const auto& c : o.checks)
    if (c.name == name) return &c;
  return nullptr;
}

void require(Verdict& v, const Outcome& o, const std::string& name) {
  if (const Check* c = find(o, name)) v.add(*c);
  else v.add(false, name + " missing from the recipe output");
}

Verdict c1() {
  Verdict v;
  const Outcome o = run_preset("rabi", {{"realizations", "200"}});
  require(v, o, "b1_khz");
  require(v, o, "t2_us");
  return v;
}

Verdict c2() {
  Verdict v;
  for (const char* w : {"20", "40"}) {
    const Outcome o = run_preset("rabi", {{"realizations", "1000"}, {"sigma_b", "0"}, {"omega1_mhz", w}});
    const double got = o.results.value("b1_khz", NAN);
    const double want = o.results.value("quasi_static_b1_khz", NAN);
    const double t2 = o.results["fit"].value("t2_us", NAN);
    const bool slow = 1000.0 >= 100.0 * t2;  // tau_m preset
    std::ostringstream os;
    os << "omega1 " << w << " MHz: b1 " << got << " kHz vs " << want << " kHz, T2 " << t2 << " us";
    v.add(std::abs(got / want - 1.0) <= 0.10 && slow, os.str());
  }
  return v;
}

Verdict c3() {
  Verdict v;
  const Outcome o = run_preset("persistent-rabi", {{"realizations", "100"}});
  require(v, o, "rabi_contrast_ratio");
  require(v, o, "control_decay_time_us");
  if (o.results.contains("control_same_omega1"))
    v.lines.push_back("info 20 MHz control: " + o.results["control_same_omega1"].dump());
  if (o.results.contains("cross_validation")) {
    double worst = 1.0;
    for (const auto& [k, j] : o.results["cross_validation"].items())
      worst = std::min(worst, j.value("min_fidelity", 0.0));
    std::ostringstream os;
    os << "frame cross-validation min overlap " << worst;
    v.add(worst >= 0.999, os.str());
  } else {
    v.add(false, "cross-validation did not run");
  }
  return v;
}

Verdict c4() {
  Verdict v;
  const Outcome o = run_preset("dressed-ramsey", {});
  require(v, o, "t2_gain_refined");
  require(v, o, "t2_gain_simplified");
  return v;
}

Verdict c5() {
  Verdict v;
  const Outcome o = run_preset("t2-sweep", {});
  require(v, o, "interior_maximum_refined");
  require(v, o, "interior_maximum_simplified");
  return v;
}

Verdict c6() {
  Verdict v;
  const Outcome o = run_preset("order-scaling", {});
  require(v, o, "t2_strictly_increasing");
  require(v, o, "t2_top_over_t1");
  require(v, o, "envelope_flips_between_k2_and_k3");
  return v;
}

Verdict c7() {
  Verdict v;
  const Outcome o = run_preset("dressed-control", {});
  require(v, o, "oscillation_frequency_mhz");
  return v;
}

Verdict c8() {
  Verdict v;
  const Outcome o = run_preset("two-qubit-fidelity", {});
  require(v, o, "noiseless_min_fidelity");
  require(v, o, "two_drive_beats_single_drive");
  return v;
}

double dist(const Bloch& a, const Bloch& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

evolution::TrajectoryRun ccd_run(int order) {
  evolution::TrajectoryRun run;
  run.scheme = drives::make_ladder(40.0, 1.0 / 30, order, {2.4e-3, 1000.0, 0}, {angular_from_mhz(0.05), 25.0, 0});
  run.lindblad = evolution::LindbladConfig::from_t1(1500.0, 1);
  run.horizon_us = 2.0;
  run.output_interval_us = 0.05;
  return run;
}

Verdict c9() {
  using namespace evolution;
  Verdict v;

  {  // positivity on a noisy ensemble, both frames
    for (int order : {1, 2}) {
      TrajectoryRun run = ccd_run(order);
      run.horizon_us = 20.0;
      const EnsembleResult r = run_ensemble(run, 64, 3, threads());
      std::ostringstream os;
      os << "order " << order << " max Bloch radius " << r.max_radius;
      v.add(r.max_radius <= 1.0 + 1e-9, os.str());
    }
  }
  {  // unitary limit
    TrajectoryRun run = ccd_run(2);
    run.lindblad = LindbladConfig{};
    run.horizon_us = 20.0;
    const EnsembleResult r = run_ensemble(run, 16, 3, threads());
    std::ostringstream os;
    os << "unitary limit radius in [" << r.min_radius << ", " << r.max_radius << "]";
    v.add(r.min_radius > 1.0 - 1e-8 && r.max_radius < 1.0 + 1e-8, os.str());
  }
  {  // trace of the two-qubit process map (throws on violation)
    ProcessRun pr;
    pr.a = pr.b = drives::make_ladder(40.0, 1.0 / 30, 2, {2.4e-3, 1000.0, 0}, {angular_from_mhz(0.05), 25.0, 0});
    pr.lindblad = LindbladConfig::from_t1(1500.0, 2);
    pr.horizon_us = 1.0;
    pr.output_interval_us = 0.5;
    bool ok = true;
    std::string what = "two-qubit process preserves the trace";
    try {
      run_process_ensemble(pr, 4, 5, threads());
    } catch (const std::exception& e) {
      ok = false;
      what += std::string(": ") + e.what();
    }
    v.add(ok, what);
  }
  {  // dissipator as printed vs the conventional ordering, trace zero
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    double worst = 0.0, trace = 0.0;
    for (int dim : {2, 4}) {
      const LindbladConfig lb{0.3, dim == 2 ? 1 : 2};
      for (int trial = 0; trial < 20; ++trial) {
        Matrix a(dim, dim), h(dim, dim);
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) {
            a(i, j) = cplx(g(rng), g(rng));
            h(i, j) = cplx(g(rng), g(rng));
          }
        Matrix rho = a * a.adjoint();
        rho /= rho.trace();
        const Operator hh = Operator(Matrix(0.5 * (h + h.adjoint()))).as_hamiltonian();
        const Matrix d = lindblad_rhs(rho, hh, lb);
        worst = std::max(worst, (d - lindblad_rhs_conventional(rho, hh, lb)).cwiseAbs().maxCoeff());
        trace = std::max(trace, std::abs(d.trace()));
      }
    }
    std::ostringstream os;
    os << "dissipator orderings differ by " << worst << ", |tr rhs| <= " << trace;
    v.add(worst < 1e-13 && trace < 1e-12, os.str());
  }
  {  // T1 calibration
    TrajectoryRun run;
    run.scheme = drives::make_ladder(40.0, 1.0 / 30, 0, {}, {});
    run.lindblad = LindbladConfig::from_t1(1500.0, 1);
    run.initial = {0.0, 0.0, 1.0};
    run.horizon_us = 4500.0;
    run.output_interval_us = 10.0;
    const EnsembleResult r = run_trajectory(run);
    double worst = 0.0;
    for (std::size_t j = 0; j < r.times.size(); ++j)
      worst = std::max(worst, std::abs(r.mean_sim[2][j] / std::exp(-r.times[j] / 1500.0) - 1.0));
    std::ostringstream os;
    os << "T1 law relative error " << worst;
    v.add(worst < 1e-4, os.str());
  }
  {  // OU statistics
    const noise::SelfCheckReport rep = noise::run_noise_selfcheck(20240601);
    for (const auto& item : rep.items) {
      std::ostringstream os;
      os << "ou " << item.name << " = " << item.value << " (expected " << item.expected << ", tol " << item.tolerance
         << ")";
      v.add(item.pass, os.str());
    }
  }
  {  // dt halving
    TrajectoryRun run = ccd_run(2);
    run.horizon_us = 5.0;
    run.output_interval_us = 0.5;
    run.noise_spacing_us = 0.05;
    run.seed = 4;
    run.kernel = KernelKind::portable;
    const double dt0 = resolve_grid(run).dt_max;
    const double base = 0.05 / std::ceil(0.05 / dt0);
    std::vector<Bloch> finals;
    for (int level = 0; level < 3; ++level) {
      run.dt_us = base / std::ldexp(1.0, level);
      const EnsembleResult r = run_trajectory(run);
      finals.push_back({r.mean_sim[0].back(), r.mean_sim[1].back(), r.mean_sim[2].back()});
    }
    const double ratio = dist(finals[0], finals[1]) / dist(finals[1], finals[2]);
    std::ostringstream os;
    os << "dt halving error ratio " << ratio;
    v.add(ratio >= 3.5, os.str());
  }
  {  // kernels agree
    if (avx2_available()) {
      TrajectoryRun run = ccd_run(2);
      run.kernel = KernelKind::portable;
      const EnsembleResult a = run_ensemble(run, 32, 9, threads());
      run.kernel = KernelKind::avx2;
      const EnsembleResult b = run_ensemble(run, 32, 9, threads());
      double worst = 0.0;
      for (std::size_t j = 0; j < a.contrast.size(); ++j)
        worst = std::max(worst, std::abs(a.contrast[j] - b.contrast[j]));
      std::ostringstream os;
      os << "avx2 vs portable contrast difference " << worst;
      v.add(worst < 1e-9, os.str());
    }
  }
  return v;
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* title;
    Verdict (*fn)();
  };
  const Item items[] = {
      {1, "single-drive rabi decay", c1},     {2, "quasi-static law", c2},
      {3, "persistent rabi", c3},             {4, "t2 gain at omega1/1000", c4},
      {5, "t2 sweep interior maximum", c5},   {6, "order scaling", c6},
      {7, "dressed control frequency", c7},   {8, "two-qubit fidelity", c8},
      {9, "numerical hygiene", c9},
  };
  int failed = 0;
  for (const Item& it : items) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = it.fn();
    } catch (const std::exception& e) {
      v.add(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << it.id << ": " << it.title << " (" << secs << " s)\n";
    for (const auto& l : v.lines) std::cout << "    " << l << "\n";
    std::cout.flush();
    failed += !v.pass;
  }
  std::cout << (failed ? "FAIL" : "PASS") << " acceptance: " << (9 - failed) << "/9 criteria met\n";
  return failed ? 1 : 0;
}
