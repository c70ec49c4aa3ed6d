#include "ccd/evolution/process.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "ccd/core/units.hpp"
#include "ccd/drives/hamiltonians.hpp"
#include "ccd/evolution/kernels.hpp"
#include "ccd/noise/ou.hpp"

namespace ccd::evolution {
namespace {

using drives::TermSet;
using Field = std::array<double, 3>;
using Mat2 = Eigen::Matrix2cd;

constexpr std::size_t kProcessChunk = 8;
constexpr int kChannels = 2 * drives::kChannelsPerQubit;

struct QubitTerm {
  int axis;
  int channel;  // global channel, -1 nominal
  double nu, re, im;
};

struct Model {
  std::array<std::vector<QubitTerm>, 2> terms;
  Matrix coupling_half;  // exp(-i Hc dt / 2)
  std::array<noise::OUParams, kChannels> params{};
  std::array<bool, kChannels> active{};
};

noise::OUParams params_of(const ProcessRun& run, int ch) {
  const drives::SchemeConfig& s = ch < drives::kChannelsPerQubit ? run.a : run.b;
  const int local = ch % drives::kChannelsPerQubit;
  if (local == drives::kMagneticChannel) return s.magnetic;
  if (local < s.order()) return s.drives[local].noise;
  throw std::invalid_argument("process: unknown noise channel " + std::to_string(ch));
}

drives::FrameModel frame1_model(const ProcessRun& run) {
  drives::ModelOptions opt;
  opt.include_noise = run.include_noise;
  return drives::two_qubit_model(run.a, run.b, run.j_mhz, drives::FrameLabel::interaction1, opt);
}

Model build(const ProcessRun& run, double dt) {
  Model m;
  const TermSet ts = frame1_model(run).slow;
  Matrix hc = Matrix::Zero(4, 4);
  for (const auto& t : ts.terms()) {
    if (t.op.a == 0 && t.op.b == 0) continue;
    if (t.op.a != 0 && t.op.b != 0) {
      if (t.nu != 0.0 || t.channel != drives::kNominal)
        throw std::invalid_argument("process: coupling terms must be static and noise free");
      hc += t.phasor.real() * drives::pauli_string(t.op, 2).matrix();
      continue;
    }
    const int q = t.op.a != 0 ? 0 : 1;
    const int axis = (q == 0 ? t.op.a : t.op.b) - 1;
    if (t.channel != drives::kNominal) {
      if (t.channel < 0 || t.channel >= kChannels) throw std::invalid_argument("process: channel out of range");
      m.params[t.channel] = params_of(run, t.channel);
      if (m.params[t.channel].sigma == 0.0) continue;
      m.active[t.channel] = true;
    }
    m.terms[q].push_back({axis, t.channel, t.nu, t.phasor.real(), t.phasor.imag()});
  }
  m.coupling_half = propagator(Operator(hc).as_hamiltonian(), 0.5 * dt).matrix();
  return m;
}

double envelope(const QubitTerm& t, double time) {
  return t.nu == 0.0 ? t.re : t.re * std::cos(t.nu * time) - t.im * std::sin(t.nu * time);
}

// exp(-i dt h.sigma)
Mat2 su2(const Field& h, double dt) {
  const double n = std::sqrt(h[0] * h[0] + h[1] * h[1] + h[2] * h[2]);
  const double th = n * dt;
  const double c = std::cos(th);
  const double s = n > 0.0 ? std::sin(th) / n : dt;
  const cplx mi(0.0, -1.0);
  Mat2 u;
  u(0, 0) = c + mi * s * h[2];
  u(1, 1) = c - mi * s * h[2];
  u(0, 1) = mi * s * cplx(h[0], -h[1]);
  u(1, 0) = mi * s * cplx(h[0], h[1]);
  return u;
}

Matrix kron2(const Mat2& a, const Mat2& b) {
  Matrix k(4, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) k.block(2 * i, 2 * j, 2, 2) = a(i, j) * b;
  return k;
}

// O^T diag(l) O with O row-major.
Mat3 congruence(const Mat3& o, const std::array<double, 3>& l) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += o[3 * k + i] * l[k] * o[3 * k + j];
      r[3 * i + j] = s;
    }
  return r;
}

Eigen::Matrix4d relaxation_block(const Mat3& g) {
  Eigen::Matrix3d gm;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) gm(i, j) = g[3 * i + j];
  const Eigen::Matrix3d e = gm.exp();
  Eigen::Matrix4d out = Eigen::Matrix4d::Identity();
  out.block<3, 3>(1, 1) = e;
  return out;
}

Eigen::Matrix4d x_rotation(double th) {
  Eigen::Matrix4d o = Eigen::Matrix4d::Identity();
  const double c = std::cos(th), s = std::sin(th);
  o(2, 2) = c;
  o(2, 3) = s;
  o(3, 2) = -s;
  o(3, 3) = c;
  return o;
}

struct Shared {
  const ProcessRun* run;
  TimeGrid grid;
  Model model;
  std::size_t block_steps;
  std::vector<PauliTransfer> ideal;  // per output
  std::vector<Eigen::Matrix4d> frame_a, frame_b;
  std::size_t n;
  std::uint64_t master;
};

struct ChunkSum {
  std::vector<PauliTransfer> sum;
};

void simulate_lanes(const Shared& sh, std::size_t lane0, std::size_t count, ChunkSum& out, ProcessResult& res) {
  const ProcessRun& run = *sh.run;
  const TimeGrid& g = sh.grid;
  const Model& m = sh.model;
  const double gamma = run.lindblad.gamma;
  const std::array<double, 3> rates{-gamma, -gamma, -2.0 * gamma};
  out.sum.assign(g.outputs, PauliTransfer::Zero());

  for (std::size_t lane = lane0; lane < lane0 + count; ++lane) {
    std::array<noise::OUProcess, kChannels> procs;
    std::array<double, kChannels> delta{};
    for (int ch = 0; ch < kChannels; ++ch) {
      if (!m.active[ch]) continue;
      noise::OUParams p = m.params[ch];
      p.seed = noise::derive_seed(sh.master, static_cast<std::uint64_t>(ch), lane);
      procs[ch] = noise::OUProcess(p, g.noise_spacing());
      delta[ch] = procs[ch].value();
    }
    PauliTransfer r = PauliTransfer::Identity();
    Matrix ublock = Matrix::Identity(4, 4);
    std::array<Mat3, 2> rot{mat3_identity(), mat3_identity()};
    std::array<Mat3, 2> gen{};

    auto flush = [&] {
      PauliTransfer step = transfer_of_unitary(Operator(ublock));
      if (gamma > 0.0) step = step * transfer_kron(relaxation_block(gen[0]), relaxation_block(gen[1]));
      r = step * r;
      ublock = Matrix::Identity(4, 4);
      rot = {mat3_identity(), mat3_identity()};
      gen = {};
    };
    auto record = [&](std::size_t j) {
      for (int k = 1; k < 16; ++k)
        if (std::abs(r(0, k)) > 1e-9 || std::abs(r(0, 0) - 1.0) > 1e-9) {
          std::ostringstream os;
          os << "process: trace not preserved at output " << j << ", lane " << lane;
          throw InvariantViolation(os.str());
        }
      const PauliTransfer r2 = transfer_kron(sh.frame_a[j], sh.frame_b[j]) * r;
      out.sum[j] += r2;
      if (!sh.ideal.empty()) res.fidelity_samples[j * sh.n + lane] = transfer_fidelity(r2, sh.ideal[j]);
    };

    record(0);
    const std::size_t total = (g.outputs - 1) * g.steps_per_output;
    for (std::size_t step = 0; step < total; ++step) {
      const double t = static_cast<double>(step) * g.dt;
      if (step > 0 && step % g.noise_every == 0)
        for (int ch = 0; ch < kChannels; ++ch)
          if (m.active[ch]) delta[ch] = procs[ch].advance();
      std::array<Mat2, 2> u;
      for (int q = 0; q < 2; ++q) {
        Field h1{0, 0, 0}, h2{0, 0, 0};
        for (const auto& term : m.terms[q]) {
          const double c = term.channel < 0 ? 1.0 : delta[term.channel];
          h1[term.axis] += c * envelope(term, t + kGauss1 * g.dt);
          h2[term.axis] += c * envelope(term, t + kGauss2 * g.dt);
        }
        const Field h = magnus_field(h1, h2, g.dt);
        u[q] = su2(h, g.dt);
        if (gamma > 0.0) {
          const Mat3 next = mat3_multiply(rotation_matrix(h, g.dt), rot[q]);
          const Mat3 a = congruence(rot[q], rates), b = congruence(next, rates);
          for (int k = 0; k < 9; ++k) gen[q][k] += 0.5 * g.dt * (a[k] + b[k]);
          rot[q] = next;
        }
      }
      ublock = m.coupling_half * kron2(u[0], u[1]) * m.coupling_half * ublock;
      const bool output = (step + 1) % g.steps_per_output == 0;
      if (output || (step + 1) % sh.block_steps == 0) flush();
      if (output) record((step + 1) / g.steps_per_output);
    }
  }
}

}  // namespace

double transfer_fidelity(const PauliTransfer& channel, const PauliTransfer& ideal) {
  double s = 0.0;
  for (int j = 1; j < 16; ++j)
    for (int i = 0; i < 16; ++i) s += channel(i, j) * ideal(i, j);
  return (4.0 + 0.8 * s) / 16.0;
}

TimeGrid resolve_process_grid(const ProcessRun& run) {
  if (!(run.horizon_us > 0.0)) throw std::invalid_argument("horizon must be > 0");
  if (!(run.output_interval_us > 0.0)) throw std::invalid_argument("output interval must be > 0");
  const TermSet ts = frame1_model(run).slow;
  std::vector<double> bound(kChannels, 0.0);
  for (int ch = 0; ch < kChannels; ++ch) {
    const drives::SchemeConfig& s = ch < drives::kChannelsPerQubit ? run.a : run.b;
    const int local = ch % drives::kChannelsPerQubit;
    if (local < s.order()) bound[ch] = 3.0 * s.drives[local].noise.sigma;
    if (local == drives::kMagneticChannel) bound[ch] = 3.0 * s.magnetic.sigma;
  }
  TimeGrid g;
  const double w_max = std::max(ts.max_frequency(), 2.0 * ts.norm_bound(bound));
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
  if (!integral(run.output_interval_us / g.dt)) throw std::invalid_argument("output interval must be an integer multiple of dt");
  g.steps_per_output = static_cast<std::size_t>(std::llround(run.output_interval_us / g.dt));
  g.outputs = static_cast<std::size_t>(std::llround(run.horizon_us / run.output_interval_us)) + 1;
  if (run.noise_spacing_us > 0.0) {
    if (!integral(run.noise_spacing_us / g.dt)) throw std::invalid_argument("noise spacing must be a multiple of dt");
    g.noise_every = static_cast<std::size_t>(std::llround(run.noise_spacing_us / g.dt));
  } else {
    double spacing = 50.0 * g.dt;
    for (const auto* s : {&run.a, &run.b}) {
      for (const auto& d : s->drives)
        if (d.noise.sigma > 0.0) spacing = std::min(spacing, d.noise.tau / 100.0);
      if (s->magnetic.sigma > 0.0) spacing = std::min(spacing, s->magnetic.tau / 100.0);
    }
    g.noise_every = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(spacing / g.dt + 1e-9)));
  }
  return g;
}

ProcessResult run_process_ensemble(const ProcessRun& run, std::size_t n, std::uint64_t master_seed, unsigned threads) {
  if (n == 0) throw std::invalid_argument("run_process_ensemble: N must be >= 1");
  run.a.validate();
  run.b.validate();
  if (run.a.order() < 1 || run.b.order() < 1) throw std::invalid_argument("process: both qubits need a first drive");
  if (!(run.dissipation_block_us > 0.0)) throw std::invalid_argument("process: dissipation block must be > 0");

  Shared sh;
  sh.run = &run;
  sh.grid = resolve_process_grid(run);
  const TimeGrid& g = sh.grid;
  sh.model = build(run, g.dt);
  sh.block_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(run.dissipation_block_us / g.dt)));
  sh.n = n;
  sh.master = master_seed;
  for (std::size_t j = 0; j < g.outputs; ++j) {
    const double t = static_cast<double>(j) * run.output_interval_us;
    sh.frame_a.push_back(x_rotation(run.a.omega(1) * t));
    sh.frame_b.push_back(x_rotation(run.b.omega(1) * t));
    if (run.ideal) {
      const Operator u = t > 0.0 ? propagator(run.ideal->as_hamiltonian(), t) : Operator::identity(4);
      sh.ideal.push_back(transfer_of_unitary(u));
    }
  }

  ProcessResult res;
  res.grid = g;
  res.realizations = n;
  if (run.ideal) res.fidelity_samples.assign(g.outputs * n, 0.0);

  const std::size_t chunks = (n + kProcessChunk - 1) / kProcessChunk;
  std::vector<ChunkSum> outs(chunks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        const std::size_t lane0 = c * kProcessChunk;
        simulate_lanes(sh, lane0, std::min(kProcessChunk, n - lane0), outs[c], res);
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

  res.times.resize(g.outputs);
  res.mean_transfer.assign(g.outputs, PauliTransfer::Zero());
  for (std::size_t j = 0; j < g.outputs; ++j) {
    res.times[j] = static_cast<double>(j) * run.output_interval_us;
    for (const auto& o : outs) res.mean_transfer[j] += o.sum[j];
    res.mean_transfer[j] /= static_cast<double>(n);
  }
  if (run.ideal) {
    res.fidelity.resize(g.outputs);
    res.fidelity_stderr.resize(g.outputs);
    for (std::size_t j = 0; j < g.outputs; ++j) {
      const double* f = &res.fidelity_samples[j * n];
      double mean = 0.0;
      for (std::size_t k = 0; k < n; ++k) mean += f[k];
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t k = 0; k < n; ++k) var += (f[k] - mean) * (f[k] - mean);
      res.fidelity[j] = mean;
      res.fidelity_stderr[j] = n < 2 ? 0.0 : std::sqrt(var / static_cast<double>(n - 1) / static_cast<double>(n));
    }
  }
  return res;
}

}  // namespace ccd::evolution
