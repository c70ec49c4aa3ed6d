#include "ccd/evolution/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ccd/core/units.hpp"
#include "ccd/noise/ou.hpp"

namespace ccd::evolution {
namespace {

using drives::FrameLabel;
using drives::TermSet;

struct CompiledTerm {
  int axis;  // 0..2
  int slot;  // -1 nominal
  double nu, re, im;
};

struct Compiled {
  std::vector<CompiledTerm> terms;
  int slots = 0;
  std::array<int, kMaxSlots> channel{};
  std::array<noise::OUParams, kMaxSlots> params{};
};

noise::OUParams channel_params(const drives::SchemeConfig& s, int ch) {
  if (ch == drives::kMagneticChannel) return s.magnetic;
  if (ch >= 0 && ch < s.order()) return s.drives[ch].noise;
  throw std::invalid_argument("unknown noise channel " + std::to_string(ch));
}

Compiled compile(const TermSet& ts, const drives::SchemeConfig& s) {
  if (ts.nqubits() != 1) throw std::invalid_argument("single-qubit engine needs a single-qubit term set");
  Compiled c;
  for (const auto& t : ts.terms()) {
    if (t.op.a == 0) continue;
    int slot = -1;
    if (t.channel != drives::kNominal) {
      for (int k = 0; k < c.slots; ++k)
        if (c.channel[k] == t.channel) slot = k;
      if (slot < 0) {
        if (c.slots == kMaxSlots) throw std::invalid_argument("too many noise channels");
        slot = c.slots++;
        c.channel[slot] = t.channel;
        c.params[slot] = channel_params(s, t.channel);
      }
      if (c.params[slot].sigma == 0.0) continue;
    }
    c.terms.push_back({t.op.a - 1, slot, t.nu, t.phasor.real(), t.phasor.imag()});
  }
  return c;
}

using Field = std::array<double, 3>;

void fill(const Compiled& c, double t, Field& h0, std::array<Field, kMaxSlots>& hc) {
  h0 = {0.0, 0.0, 0.0};
  for (int k = 0; k < c.slots; ++k) hc[k] = {0.0, 0.0, 0.0};
  for (const auto& term : c.terms) {
    const double v = term.nu == 0.0 ? term.re : term.re * std::cos(term.nu * t) - term.im * std::sin(term.nu * t);
    if (term.slot < 0)
      h0[term.axis] += v;
    else
      hc[term.slot][term.axis] += v;
  }
}

// Magnus coefficients of the step [t, t + dt].
void fill_step(const Compiled& c, double t, double dt, StepCoefficients& sc) {
  sc.slots = c.slots;
  sc.magnus = true;
  fill(c, t + kGauss1 * dt, sc.h0, sc.hc);
  fill(c, t + kGauss2 * dt, sc.h0b, sc.hcb);
}

Bloch dot_t(const Mat3& r, const Bloch& v) { return mat3_apply(mat3_transpose(r), v); }

double norm3(const Bloch& r) { return std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]); }

// Per output time: running mean and sum of squared deviations (Welford) of
// sim(3) obs(3) contrast zbare.
constexpr int kQty = 8;
constexpr int kAcc = 2 * kQty;

struct Context {
  const TrajectoryRun* run = nullptr;
  TimeGrid grid;
  Compiled model;
  Compiled reference;
  TermSet fast{1};
  KernelKind kernel = KernelKind::portable;
  Dissipator dissipator;
  bool frame2 = false;
  double omega1 = 0.0;
  std::size_t n = 0;
  std::uint64_t master = 0;
};

struct ChunkOut {
  std::size_t count = 0;
  std::vector<double> acc;
  double max_radius = 0.0;
  double min_radius = 1e300;
};

void simulate_chunk(const Context& ctx, std::size_t lane0, std::size_t count, ChunkOut& out, EnsembleResult& res) {
  const TrajectoryRun& run = *ctx.run;
  const TimeGrid& g = ctx.grid;
  const int slots = ctx.model.slots;
  BlochBatch b(count, slots);

  Bloch r0_eff = run.initial;
  if (ctx.frame2 && run.micromotion) {
    auto k0 = bloch_kick(ctx.fast, 0.0);
    r0_eff = rotate_exact(run.initial, {-k0[0], -k0[1], -k0[2]}, 1.0);
  }
  for (std::size_t i = 0; i < count; ++i) b.set_lane(i, r0_eff);

  std::vector<noise::OUProcess> procs;
  procs.reserve(count * static_cast<std::size_t>(slots));
  for (int s = 0; s < slots; ++s) {
    for (std::size_t i = 0; i < count; ++i) {
      noise::OUParams p = ctx.model.params[s];
      p.seed = noise::derive_seed(ctx.master, static_cast<std::uint64_t>(ctx.model.channel[s]), lane0 + i);
      procs.emplace_back(p, g.noise_spacing());
      b.noise[static_cast<std::size_t>(s) * count + i] = procs.back().value();
    }
  }

  out.count = count;
  out.acc.assign(g.outputs * kAcc, 0.0);
  Mat3 ref = mat3_identity();

  auto record = [&](std::size_t j) {
    const double t = static_cast<double>(j) * run.output_interval_us;
    Mat3 kick = mat3_identity();
    if (ctx.frame2 && run.micromotion) kick = rotation_matrix(bloch_kick(ctx.fast, t), 1.0);
    const double th = ctx.omega1 * t;
    const double c = std::cos(th), s = std::sin(th);
    double* a = &out.acc[j * kAcc];
    for (std::size_t i = 0; i < count; ++i) {
      const Bloch r = mat3_apply(kick, b.lane(i));
      const double rad = norm3(r);
      if (!std::isfinite(rad) || rad > 1.0 + 2e-8) {
        std::ostringstream os;
        os << "positivity violated: |r| = " << rad << " at t = " << t << " us, lane " << lane0 + i;
        throw InvariantViolation(os.str());
      }
      out.max_radius = std::max(out.max_radius, rad);
      out.min_radius = std::min(out.min_radius, rad);
      const Bloch ro = dot_t(ref, r);
      const double con = ro[0] * run.initial[0] + ro[1] * run.initial[1] + ro[2] * run.initial[2];
      const double zbare = ctx.frame2 ? s * r[1] + c * r[2] : r[2];
      const double q[kQty] = {r[0], r[1], r[2], ro[0], ro[1], ro[2], con, zbare};
      const double w = 1.0 / static_cast<double>(i + 1);
      for (int k = 0; k < kQty; ++k) {
        const double d = q[k] - a[k];
        a[k] += d * w;
        a[kQty + k] += d * (q[k] - a[k]);
      }
      const std::size_t idx = j * ctx.n + lane0 + i;
      res.contrast_samples[idx] = static_cast<float>(con);
      if (run.keep_lanes) res.lane_states[idx] = r;
    }
  };

  record(0);
  StepCoefficients sc;
  sc.dt = g.dt;
  sc.damping = ctx.dissipator.active();
  if (sc.damping && !ctx.frame2) {
    sc.pre = ctx.dissipator.transfer(0, 0.0, 0.5 * g.dt);
    sc.post = sc.pre;
  }
  StepCoefficients rc;
  const std::size_t total = (g.outputs - 1) * g.steps_per_output;
  for (std::size_t step = 0; step < total; ++step) {
    const double t = static_cast<double>(step) * g.dt;
    if (step > 0 && step % g.noise_every == 0) {
      for (int s = 0; s < slots; ++s)
        for (std::size_t i = 0; i < count; ++i)
          b.noise[static_cast<std::size_t>(s) * count + i] = procs[static_cast<std::size_t>(s) * count + i].advance();
    }
    fill_step(ctx.model, t, g.dt, sc);
    if (sc.damping && ctx.frame2) {
      sc.pre = ctx.dissipator.transfer(0, t + 0.25 * g.dt, 0.5 * g.dt);
      sc.post = ctx.dissipator.transfer(0, t + 0.75 * g.dt, 0.5 * g.dt);
    }
    step_batch(ctx.kernel, b, sc);
    if (!ctx.reference.terms.empty()) {
      fill_step(ctx.reference, t, g.dt, rc);
      ref = mat3_multiply(rotation_matrix(magnus_field(rc.h0, rc.h0b, g.dt), g.dt), ref);
    }
    if ((step + 1) % g.steps_per_output == 0) record((step + 1) / g.steps_per_output);
  }
}

drives::FrameModel reference_model(const TrajectoryRun& run) {
  const int order = run.reference_order < 0 ? run.scheme.order() - 1 : run.reference_order;
  drives::ModelOptions opt;
  opt.include_noise = false;
  opt.include_rf = false;
  opt.include_carrier = false;
  if (order <= 0) return drives::FrameModel{run.scheme.frame, TermSet(1), TermSet(1), 0.0};
  opt.max_order = order;
  return drives::frame_model(run.scheme, run.scheme.frame, opt);
}

}  // namespace

std::array<double, 3> bloch_field(const TermSet& ts, double t, std::span<const double> noise) {
  std::array<double, 3> h{0.0, 0.0, 0.0};
  for (const auto& term : ts.terms()) {
    if (term.op.a == 0) continue;
    double c = 1.0;
    if (term.channel != drives::kNominal)
      c = static_cast<std::size_t>(term.channel) < noise.size() ? noise[term.channel] : 0.0;
    h[term.op.a - 1] += c * term.envelope(t);
  }
  return h;
}

std::array<double, 3> bloch_kick(const TermSet& fast, double t) {
  std::array<double, 3> k{0.0, 0.0, 0.0};
  for (const auto& term : fast.terms()) {
    if (term.op.a == 0 || term.channel != drives::kNominal || term.nu == 0.0) continue;
    const drives::HarmonicTerm integral{term.op, term.nu, cplx(0.0, -1.0) * term.phasor / term.nu, drives::kNominal};
    k[term.op.a - 1] += integral.envelope(t);
  }
  return k;
}

double bloch_fidelity(const Bloch& a, const Bloch& b) {
  const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
  const double ma = std::max(0.0, 1.0 - (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]));
  const double mb = std::max(0.0, 1.0 - (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]));
  return 0.5 * (1.0 + dot + std::sqrt(ma * mb));
}

TimeGrid resolve_grid(const TrajectoryRun& run) {
  if (!(run.horizon_us > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (!(run.output_interval_us > 0.0)) throw std::invalid_argument("output interval must be > 0");
  const drives::FrameModel m = drives::frame_model(run.scheme, run.scheme.frame);
  std::vector<double> bound(drives::kChannelsPerQubit, 0.0);
  for (int ch = 0; ch < drives::kChannelsPerQubit; ++ch) {
    if (ch < run.scheme.order()) bound[ch] = 3.0 * run.scheme.drives[ch].noise.sigma;
    if (ch == drives::kMagneticChannel) bound[ch] = 3.0 * run.scheme.magnetic.sigma;
  }
  TimeGrid g;
  const double w_max = std::max(m.slow.max_frequency(), 2.0 * m.slow.norm_bound(bound));
  g.f_max_mhz = mhz_from_angular(w_max);
  g.dt_max = g.f_max_mhz > 0.0 ? 1.0 / (50.0 * g.f_max_mhz) : run.output_interval_us;

  const double base = run.noise_spacing_us > 0.0 ? run.noise_spacing_us : run.output_interval_us;
  auto integral = [](double ratio) { return std::abs(ratio - std::round(ratio)) <= 1e-6 * std::max(1.0, ratio); };
  if (run.dt_us > 0.0) {
    if (run.dt_us > g.dt_max * (1.0 + 1e-9)) {
      std::ostringstream os;
      os << "dt = " << run.dt_us << " us violates dt <= 1/(50 f_max) = " << g.dt_max << " us";
      throw InvariantViolation(os.str());
    }
    g.dt = run.dt_us;
  } else {
    g.dt = base / std::ceil(base / g.dt_max - 1e-9);
  }
  if (!integral(run.output_interval_us / g.dt))
    throw std::invalid_argument("output interval must be an integer multiple of dt");
  g.steps_per_output = static_cast<std::size_t>(std::llround(run.output_interval_us / g.dt));
  g.outputs = static_cast<std::size_t>(std::llround(run.horizon_us / run.output_interval_us)) + 1;

  if (run.noise_spacing_us > 0.0) {
    if (!integral(run.noise_spacing_us / g.dt)) throw std::invalid_argument("noise spacing must be a multiple of dt");
    g.noise_every = static_cast<std::size_t>(std::llround(run.noise_spacing_us / g.dt));
  } else {
    double spacing = 50.0 * g.dt;
    for (int k = 0; k < run.scheme.order(); ++k)
      if (run.scheme.drives[k].noise.sigma > 0.0) spacing = std::min(spacing, run.scheme.drives[k].noise.tau / 100.0);
    if (run.scheme.magnetic.sigma > 0.0) spacing = std::min(spacing, run.scheme.magnetic.tau / 100.0);
    g.noise_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(spacing / g.dt + 1e-9)));
  }
  return g;
}

EnsembleResult run_trajectory(const TrajectoryRun& run) { return run_ensemble(run, 1, run.seed, 1); }

EnsembleResult run_ensemble(const TrajectoryRun& run, std::size_t n, std::uint64_t master_seed, unsigned threads) {
  if (n == 0) throw std::invalid_argument("run_ensemble: N must be >= 1");
  run.scheme.validate();
  if (run.lindblad.nqubits != 1) throw std::invalid_argument("run_ensemble: single-qubit runs only");
  if (norm3(run.initial) > 1.0 + 1e-12) throw std::invalid_argument("initial Bloch vector outside the unit ball");

  Context ctx;
  ctx.run = &run;
  ctx.grid = resolve_grid(run);
  const drives::FrameModel model = drives::frame_model(run.scheme, run.scheme.frame);
  TermSet simulated = model.slow;
  simulated += model.correction;
  simulated.simplify();
  ctx.model = compile(simulated, run.scheme);
  const drives::FrameModel ref = reference_model(run);
  TermSet reference = ref.slow;
  reference += ref.correction;
  reference.simplify();
  ctx.reference = compile(reference, run.scheme);
  ctx.fast = model.fast;
  ctx.kernel = resolve_kernel(run.kernel);
  ctx.frame2 = run.scheme.frame == FrameLabel::interaction2;
  ctx.omega1 = ctx.frame2 ? run.scheme.omega(1) : 0.0;
  ctx.dissipator = Dissipator(run.lindblad, run.scheme.frame, {ctx.omega1, 0.0});
  ctx.n = n;
  ctx.master = master_seed;

  const TimeGrid& g = ctx.grid;
  EnsembleResult res;
  res.grid = g;
  res.kernel = ctx.kernel;
  res.realizations = n;
  res.contrast_samples.assign(g.outputs * n, 0.0f);
  if (run.keep_lanes) res.lane_states.assign(g.outputs * n, Bloch{0, 0, 0});

  const std::size_t chunks = (n + kChunkLanes - 1) / kChunkLanes;
  std::vector<ChunkOut> outs(chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        const std::size_t lane0 = c * kChunkLanes;
        simulate_chunk(ctx, lane0, std::min(kChunkLanes, n - lane0), outs[c], res);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };
  const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < nt; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Chan et al. pairwise merge, in chunk order.
  std::vector<double> acc(g.outputs * kAcc, 0.0);
  double merged = 0.0;
  for (const auto& o : outs) {
    const double nb = static_cast<double>(o.count);
    const double tot = merged + nb;
    for (std::size_t j = 0; j < g.outputs; ++j) {
      double* a = &acc[j * kAcc];
      const double* b = &o.acc[j * kAcc];
      for (int k = 0; k < kQty; ++k) {
        const double d = b[k] - a[k];
        a[k] += d * nb / tot;
        a[kQty + k] += b[kQty + k] + d * d * merged * nb / tot;
      }
    }
    merged = tot;
    res.max_radius = std::max(res.max_radius, o.max_radius);
    res.min_radius = std::min(res.min_radius, o.min_radius);
  }
  const double nn = static_cast<double>(n);
  auto stderr_of = [&](double m2) { return n < 2 ? 0.0 : std::sqrt(std::max(0.0, m2) / (nn - 1.0) / nn); };
  for (int k = 0; k < 3; ++k) {
    res.mean_sim[k].resize(g.outputs);
    res.stderr_sim[k].resize(g.outputs);
    res.mean_obs[k].resize(g.outputs);
    res.stderr_obs[k].resize(g.outputs);
  }
  res.times.resize(g.outputs);
  res.population_down.resize(g.outputs);
  res.contrast.resize(g.outputs);
  res.contrast_stderr.resize(g.outputs);
  res.coherence.resize(g.outputs);
  for (std::size_t j = 0; j < g.outputs; ++j) {
    const double* a = &acc[j * kAcc];
    res.times[j] = static_cast<double>(j) * run.output_interval_us;
    for (int k = 0; k < 3; ++k) {
      res.mean_sim[k][j] = a[k];
      res.stderr_sim[k][j] = stderr_of(a[kQty + k]);
      res.mean_obs[k][j] = a[3 + k];
      res.stderr_obs[k][j] = stderr_of(a[kQty + 3 + k]);
    }
    res.contrast[j] = a[6];
    res.contrast_stderr[j] = stderr_of(a[kQty + 6]);
    res.population_down[j] = 0.5 * (1.0 - a[7]);
    // <psi0|rho|psi0> = (1 + rbar . r0)/2 for a pure initial state
    res.coherence[j] = std::sqrt(std::clamp(0.5 * (1.0 + res.contrast[j]), 0.0, 1.0));
  }
  return res;
}

CrossValidation cross_validate(const TrajectoryRun& run, std::size_t lanes, std::uint64_t master_seed,
                               double window_us, unsigned threads) {
  if (run.scheme.order() < 1) throw std::invalid_argument("cross_validate: scheme needs a first-order drive");
  TrajectoryRun r1 = run, r2 = run;
  r1.scheme.frame = FrameLabel::interaction1;
  r2.scheme.frame = FrameLabel::interaction2;
  r2.micromotion = true;
  for (TrajectoryRun* r : {&r1, &r2}) {
    r->horizon_us = window_us;
    r->output_interval_us = window_us / 100.0;
    r->keep_lanes = true;
    r->dt_us = 0.0;
    r->noise_spacing_us = 0.0;
  }
  // One noise grid for both frames.
  const TimeGrid g1 = resolve_grid(r1);
  const TimeGrid g2 = resolve_grid(r2);
  const double interval = r1.output_interval_us;
  const double s = std::min(g1.noise_spacing(), g2.noise_spacing());
  const double spacing = interval / std::ceil(interval / s - 1e-9);
  r1.noise_spacing_us = spacing;
  r2.noise_spacing_us = spacing;

  const EnsembleResult e1 = run_ensemble(r1, lanes, master_seed, threads);
  const EnsembleResult e2 = run_ensemble(r2, lanes, master_seed, threads);
  CrossValidation cv;
  cv.lanes = lanes;
  cv.window_us = window_us;
  const double w1 = run.scheme.omega(1);
  for (std::size_t j = 0; j < e1.times.size(); ++j) {
    const double th = w1 * e1.times[j];
    const double c = std::cos(th), sn = std::sin(th);
    for (std::size_t i = 0; i < lanes; ++i) {
      const Bloch a = e1.lane_state(j, i);
      const Bloch a2{a[0], c * a[1] + sn * a[2], -sn * a[1] + c * a[2]};
      const double f = bloch_fidelity(a2, e2.lane_state(j, i));
      if (f < cv.min_fidelity) {
        cv.min_fidelity = f;
        cv.worst_time = e1.times[j];
      }
    }
  }
  return cv;
}

}  // namespace ccd::evolution
