#include <cmath>
#include <random>

#include "ccd/core/units.hpp"
#include "ccd/evolution/engine.hpp"
#include "ccd/noise/ou.hpp"
#include "doctest.h"

using namespace ccd;
using namespace ccd::evolution;
using drives::FrameLabel;

namespace {

Matrix random_density(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g;
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = cplx(g(rng), g(rng));
  Matrix rho = a * a.adjoint();
  return Matrix(rho / rho.trace());
}

Operator random_hamiltonian(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> g;
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = cplx(g(rng), g(rng));
  return Operator(Matrix(0.5 * (a + a.adjoint()))).as_hamiltonian();
}

double dist(const Bloch& a, const Bloch& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

TrajectoryRun rabi_run(double omega1_mhz, double sigma_rel) {
  TrajectoryRun run;
  run.scheme = drives::make_ladder(omega1_mhz, 1.0 / 30, 1, {sigma_rel, 1000.0, 0}, {0.0, 25.0, 0});
  run.lindblad = LindbladConfig::from_t1(1500.0, 1);
  run.horizon_us = 2.0;
  run.output_interval_us = 0.01;
  return run;
}

TrajectoryRun ccd_run(int order) {
  TrajectoryRun run;
  run.scheme = drives::make_ladder(40.0, 1.0 / 30, order, {2.4e-3, 1000.0, 0}, {angular_from_mhz(0.05), 25.0, 0});
  run.lindblad = LindbladConfig::from_t1(1500.0, 1);
  run.horizon_us = 2.0;
  run.output_interval_us = 0.05;
  return run;
}

}  // namespace

TEST_CASE("lindblad rhs") {
  std::mt19937_64 rng(1);
  const LindbladConfig off{0.0, 1};
  const Matrix rho = random_density(rng, 2);
  CHECK(lindblad_rhs(rho, Operator::zero(2).as_hamiltonian(), off).cwiseAbs().maxCoeff() == 0.0);
  const Operator h = random_hamiltonian(rng, 2);
  const Matrix comm = cplx(0, -1) * (h.matrix() * rho - rho * h.matrix());
  CHECK((lindblad_rhs(rho, h, off) - comm).cwiseAbs().maxCoeff() < 1e-15);

  const LindbladConfig lb = LindbladConfig::from_t1(1.5, 1);
  CHECK(lb.gamma == doctest::Approx(1.0 / 3.0));
  CHECK(lb.t1() == doctest::Approx(1.5));
  for (int dim : {2, 4}) {
    const LindbladConfig l{0.3, dim == 2 ? 1 : 2};
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix r = random_density(rng, dim);
      const Operator hh = random_hamiltonian(rng, dim);
      const Matrix d = lindblad_rhs(r, hh, l);
      CHECK(std::abs(d.trace()) < 1e-12);
      CHECK((d - lindblad_rhs_conventional(r, hh, l)).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
  // d<sz>/dt = -2 Gamma <sz> on |up><up|
  const Matrix up = QuantumState::pure(ket_up()).rho();
  const Matrix d = lindblad_rhs(up, Operator::zero(2).as_hamiltonian(), lb);
  const cplx dz = (pauli(PauliAxis::z).matrix() * d).trace();
  CHECK(dz.real() == doctest::Approx(-2.0 * lb.gamma));
}

TEST_CASE("strang step") {
  std::mt19937_64 rng(2);
  const Operator h = random_hamiltonian(rng, 2);
  const QuantumState rho(random_density(rng, 2));
  const Dissipator none(LindbladConfig{0.0, 1}, FrameLabel::interaction1);
  const Matrix u = propagator(h, 0.1).matrix();
  CHECK((step(rho, h, 0.0, 0.1, none).rho() - u * rho.rho() * u.adjoint()).cwiseAbs().maxCoeff() < 1e-10);

  // pure relaxation over 1 us at T1 = 1.5 ms
  const LindbladConfig lb = LindbladConfig::from_t1(1500.0, 1);
  const Dissipator d(lb, FrameLabel::interaction1);
  const QuantumState up = QuantumState::pure(ket_up());
  const QuantumState out = step(up, Operator::zero(2).as_hamiltonian(), 0.0, 1.0, d);
  CHECK(std::abs(out.bloch()[2] - std::exp(-1.0 / 1500.0)) < 1e-8);

  // two-qubit transfer matches the rk4 reference path
  const LindbladConfig lb2{0.05, 2};
  const Dissipator d2(lb2, FrameLabel::interaction1);
  const Operator h4 = random_hamiltonian(rng, 4);
  const QuantumState r4(random_density(rng, 4));
  QuantumState a = r4, b = r4;
  const double dt = 1e-3;
  for (int i = 0; i < 100; ++i) {
    a = step(a, h4, i * dt, dt, d2);
    b = rk4_step(b, [&](double) { return h4; }, i * dt, dt, lb2);
  }
  CHECK((a.rho() - b.rho()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("second-frame dissipator is the rotated first-frame map") {
  const LindbladConfig lb{0.01, 1};
  const double w1 = 3.0;
  const Dissipator d2(lb, FrameLabel::interaction2, {w1, 0.0});
  const Dissipator d1(lb, FrameLabel::interaction1);
  const double t = 0.7, dur = 0.4;
  // frame-2 Bloch = R_x(-th) frame-1 Bloch with th = w1 t
  const std::array<double, 3> gen{0.5 * w1, 0.0, 0.0};
  const Mat3 to1 = rotation_matrix(gen, t);
  const Mat3 expect = mat3_multiply(mat3_transpose(to1), mat3_multiply(d1.transfer(0, t, dur), to1));
  const Mat3 got = d2.transfer(0, t, dur);
  for (int k = 0; k < 9; ++k) CHECK(got[k] == doctest::Approx(expect[k]).epsilon(1e-12));
}

TEST_CASE("rotation series") {
  for (double u : {0.0, 1e-6, 0.1, 0.5, 1.0}) {
    const RotationSeries rs = rotation_series(u);
    const double th = std::sqrt(u);
    const double c = std::cos(th);
    const double s = th == 0.0 ? 1.0 : std::sin(th) / th;
    const double v = u < 1e-3 ? 0.5 - u / 24.0 + u * u / 720.0 : (1.0 - c) / u;
    CHECK(rs.c == doctest::Approx(c).epsilon(1e-15));
    CHECK(rs.s == doctest::Approx(s).epsilon(1e-15));
    CHECK(rs.v == doctest::Approx(v).epsilon(1e-14));
  }
}

TEST_CASE("kernel equivalence") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const std::size_t lanes = 37;
  BlochBatch base(lanes, 3);
  for (std::size_t i = 0; i < lanes; ++i) {
    Bloch r{g(rng), g(rng), g(rng)};
    const double n = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]) * 1.01;
    base.set_lane(i, {r[0] / n, r[1] / n, r[2] / n});
  }
  for (double& v : base.noise) v = 0.1 * g(rng);
  base.noise[5] = 40.0;  // pushes one lane past the series domain
  StepCoefficients c;
  c.dt = 0.01;
  c.h0 = {3.0, -1.0, 2.0};
  c.slots = 3;
  for (int s = 0; s < 3; ++s) c.hc[s] = {g(rng), g(rng), g(rng)};
  c.damping = true;
  const Dissipator d(LindbladConfig{0.2, 1}, FrameLabel::interaction2, {5.0, 0.0});
  c.pre = d.transfer(0, 0.3, 0.005);
  c.post = d.transfer(0, 0.31, 0.005);

  BlochBatch ref = base, portable = base, avx = base;
  step_reference(ref, c);
  step_portable(portable, c);
  if (avx2_available()) step_avx2(avx, c);
  else step_portable(avx, c);
  for (std::size_t i = 0; i < lanes; ++i) {
    CHECK(dist(ref.lane(i), portable.lane(i)) < 1e-12);
    CHECK(dist(avx.lane(i), portable.lane(i)) < 1e-13);
  }
  CHECK(resolve_kernel(KernelKind::automatic) == (avx2_available() ? KernelKind::avx2 : KernelKind::portable));
  CHECK(parse_kernel("portable") == KernelKind::portable);
  CHECK_THROWS(parse_kernel("neon"));
}

TEST_CASE("time grid and dt rule") {
  TrajectoryRun run = rabi_run(40.0, 2.4e-3);
  const TimeGrid g = resolve_grid(run);
  CHECK(g.dt <= g.dt_max);
  CHECK(g.f_max_mhz == doctest::Approx(40.0 * (1.0 + 3 * 2.4e-3)).epsilon(1e-9));
  CHECK(g.outputs == 201);
  run.dt_us = 1.0 / (50.0 * 40.0);  // ignores the noise headroom
  CHECK_THROWS_AS(resolve_grid(run), InvariantViolation);
  run.dt_us = 0.0;
  run.output_interval_us = 0.0;
  CHECK_THROWS_AS(resolve_grid(run), std::invalid_argument);
}

TEST_CASE("ideal rabi oscillation") {
  TrajectoryRun run = rabi_run(40.0, 0.0);
  run.lindblad = LindbladConfig{};
  const EnsembleResult r = run_trajectory(run);
  double worst = 0.0;
  for (std::size_t j = 0; j < r.times.size(); ++j) {
    const double expect = std::pow(std::cos(kTwoPi * 40.0 * r.times[j] / 2.0), 2);
    worst = std::max(worst, std::abs(r.population_down[j] - expect));
  }
  CHECK(worst < 1e-9);
  // unitary limit: pure throughout
  CHECK(r.min_radius > 1.0 - 1e-8);
  CHECK(r.max_radius < 1.0 + 1e-8);
}

TEST_CASE("phase drift follows the integrated drive noise") {
  TrajectoryRun run = rabi_run(40.0, 2.4e-3);
  run.lindblad = LindbladConfig{};
  run.horizon_us = 10.0;
  run.output_interval_us = 0.1;
  run.seed = 99;
  const EnsembleResult r = run_trajectory(run);
  const double spacing = r.grid.noise_spacing();
  noise::OUParams p = run.scheme.drives[0].noise;
  p.seed = noise::derive_seed(run.seed, 0, 0);
  noise::OUProcess proc(p, spacing);
  const double w1 = run.scheme.omega(1);
  auto blocks = static_cast<std::size_t>(std::llround(run.horizon_us / spacing));
  double phase = 0.0;
  for (std::size_t k = 0; k < blocks; ++k) {
    phase += w1 * (1.0 + proc.value()) * spacing;
    proc.advance();
  }
  const double drift = phase - w1 * run.horizon_us;
  MESSAGE("phase drift at 10 us: " << drift << " rad");
  CHECK(std::abs(drift) > 0.0);
  CHECK(r.population_down.back() == doctest::Approx(std::pow(std::cos(0.5 * phase), 2)).epsilon(1e-6));
}

TEST_CASE("T1 calibration") {
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
  CHECK(worst < 1e-4);
}

TEST_CASE("richardson dt halving") {
  TrajectoryRun run = ccd_run(2);
  run.horizon_us = 5.0;
  run.output_interval_us = 0.5;
  run.noise_spacing_us = 0.05;
  run.seed = 4;
  run.kernel = KernelKind::portable;
  const double dt0 = resolve_grid(run).dt_max;
  std::vector<Bloch> finals;
  for (int level = 0; level < 3; ++level) {
    // largest dt of the form 0.05/n below dt0
    const double base = 0.05 / std::ceil(0.05 / dt0);
    run.dt_us = base / std::ldexp(1.0, level);
    const EnsembleResult r = run_trajectory(run);
    finals.push_back({r.mean_sim[0].back(), r.mean_sim[1].back(), r.mean_sim[2].back()});
  }
  const double e1 = dist(finals[0], finals[1]);
  const double e2 = dist(finals[1], finals[2]);
  MESSAGE("richardson ratio " << e1 / e2);
  CHECK(e1 / e2 >= 3.5);
}

TEST_CASE("ensemble reproducibility and statistics") {
  TrajectoryRun run = ccd_run(2);
  SUBCASE("N = 1 equals run_trajectory") {
    run.seed = 8;
    const EnsembleResult a = run_trajectory(run);
    const EnsembleResult b = run_ensemble(run, 1, 8);
    CHECK(a.contrast == b.contrast);
  }
  SUBCASE("thread count does not change results") {
    const EnsembleResult a = run_ensemble(run, 150, 5, 1);
    const EnsembleResult b = run_ensemble(run, 150, 5, 3);
    CHECK(a.contrast == b.contrast);
    CHECK(a.mean_sim[1] == b.mean_sim[1]);
    const EnsembleResult c = run_ensemble(run, 150, 5, 1);
    CHECK(a.contrast == c.contrast);
  }
  SUBCASE("kernels agree on a full ensemble") {
    run.kernel = KernelKind::portable;
    const EnsembleResult a = run_ensemble(run, 70, 5);
    run.kernel = KernelKind::reference;
    const EnsembleResult b = run_ensemble(run, 70, 5);
    for (std::size_t j = 0; j < a.contrast.size(); ++j) CHECK(std::abs(a.contrast[j] - b.contrast[j]) < 1e-9);
  }
  SUBCASE("noise-free ensemble has no spread") {
    run.scheme.drives[0].noise.sigma = 0.0;
    run.scheme.drives[1].noise.sigma = 0.0;
    run.scheme.magnetic.sigma = 0.0;
    const EnsembleResult a = run_ensemble(run, 20, 5);
    for (double s : a.contrast_stderr) CHECK(s == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("standard errors scale as 1/sqrt(N)") {
    run.horizon_us = 10.0;
    run.output_interval_us = 1.0;
    const EnsembleResult a = run_ensemble(run, 200, 6);
    const EnsembleResult b = run_ensemble(run, 800, 7);
    double sa = 0.0, sb = 0.0;
    for (std::size_t j = 1; j < a.times.size(); ++j) {
      sa += a.stderr_sim[2][j];
      sb += b.stderr_sim[2][j];
    }
    MESSAGE("stderr ratio N=200/N=800: " << sa / sb);
    CHECK(sa / sb == doctest::Approx(2.0).epsilon(0.2));
  }
  SUBCASE("coherence starts at one and stays in range") {
    const EnsembleResult a = run_ensemble(run, 64, 9);
    CHECK(a.coherence[0] == doctest::Approx(1.0));
    for (double f : a.coherence) {
      CHECK(f >= 0.0);
      CHECK(f <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("second-frame integrator agrees with the first frame") {
  for (int order : {2, 3}) {
    TrajectoryRun run = ccd_run(order);
    const CrossValidation cv = cross_validate(run, 8, 21, 20.0);
    MESSAGE("order " << order << " min fidelity " << cv.min_fidelity << " at " << cv.worst_time);
    CHECK(cv.min_fidelity >= 0.999);
  }
  SUBCASE("strong simplified second drive with static amplitude offset") {
    // W2 = W1/10 with a slow first-drive error tilts the frame-2 axis; the
    // averaged Hamiltonian must carry the K^2 terms to stay within budget.
    TrajectoryRun run;
    run.scheme = drives::make_ladder(20.0, 0.1, 2, {1e-2, 1e7, 0}, {angular_from_mhz(0.05), 25.0, 0});
    run.scheme.drives[1].variant = drives::Variant::simplified;
    const CrossValidation cv = cross_validate(run, 16, 21, 50.0);
    MESSAGE("simplified min fidelity " << cv.min_fidelity);
    CHECK(cv.min_fidelity >= 0.999);
  }
}

TEST_CASE("bloch helpers") {
  CHECK(bloch_fidelity({0, 0, 1}, {0, 0, 1}) == doctest::Approx(1.0));
  CHECK(bloch_fidelity({0, 0, 1}, {0, 0, -1}) == doctest::Approx(0.0));
  CHECK(bloch_fidelity({0, 0, 0}, {0.3, 0.1, 0}) ==
        doctest::Approx(state_fidelity(QuantumState::maximally_mixed(2), QuantumState::from_bloch({0.3, 0.1, 0}))));
  const QuantumState a = QuantumState::from_bloch({0.1, 0.2, 0.3});
  const QuantumState b = QuantumState::from_bloch({-0.4, 0.1, 0.5});
  CHECK(bloch_fidelity({0.1, 0.2, 0.3}, {-0.4, 0.1, 0.5}) == doctest::Approx(state_fidelity(a, b)));
}
