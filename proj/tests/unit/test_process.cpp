#include <cmath>

#include "ccd/core/pauli_transfer.hpp"
#include "ccd/core/units.hpp"
#include "ccd/drives/hamiltonians.hpp"
#include "ccd/evolution/process.hpp"
#include "doctest.h"

using namespace ccd;
using namespace ccd::evolution;

namespace {

ProcessRun gate_run(double sigma_rel, double sigma_b) {
  ProcessRun run;
  run.a = drives::make_ladder(40.0, 1.0 / 30, 2, {sigma_rel, 1000.0, 0}, {sigma_b, 25.0, 0});
  run.b = run.a;
  run.j_mhz = 0.05;
  run.horizon_us = 2.0;
  run.output_interval_us = 0.5;
  run.ideal = drives::two_qubit_effective(run.a, run.b, run.j_mhz);
  return run;
}

double max_abs(const PauliTransfer& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("process engine matches a direct 4x4 propagation") {
  ProcessRun run = gate_run(0.0, 0.0);
  run.horizon_us = 0.5;
  run.output_interval_us = 0.25;
  run.ideal.reset();
  const ProcessResult res = run_process_ensemble(run, 1, 3);
  REQUIRE(res.mean_transfer.size() == 3);

  // Midpoint products of exp(-i H dt) from the frame-1 term set.
  const drives::FrameModel m = drives::two_qubit_model(run.a, run.b, run.j_mhz, drives::FrameLabel::interaction1);
  const double h = 2.5e-5;
  Operator u = Operator::identity(4);
  const int steps = static_cast<int>(std::lround(run.horizon_us / h));
  for (int k = 0; k < steps; ++k) u = propagator(m.slow.evaluate((k + 0.5) * h, {}).as_hamiltonian(), h) * u;
  // Second-frame output: exp(+i W1 t (x1 + x2)/2)
  const Operator to2 = propagator(drives::frame_generator(drives::FrameLabel::interaction2, run.a, 2), run.horizon_us).adjoint();
  const PauliTransfer ref = transfer_of_unitary(to2 * u);
  CHECK(max_abs(res.mean_transfer.back() - ref) < 1e-5);
}

TEST_CASE("noiseless gate fidelity and dt convergence") {
  ProcessRun run = gate_run(0.0, 0.0);
  run.horizon_us = 10.0;
  run.output_interval_us = 2.5;
  const ProcessResult a = run_process_ensemble(run, 1, 1);
  MESSAGE("F(10 us) = " << a.fidelity.back());
  CHECK(a.fidelity.back() >= 0.99);
  run.dt_us = 0.5 * a.grid.dt;
  const ProcessResult b = run_process_ensemble(run, 1, 1);
  CHECK(std::abs(a.fidelity.back() - b.fidelity.back()) < 1e-6);
  run.dt_us = 2.0 * a.grid.dt_max;
  CHECK_THROWS_AS(run_process_ensemble(run, 1, 1), InvariantViolation);
}

TEST_CASE("strong relaxation drives the gate fidelity to 1/4") {
  ProcessRun run = gate_run(0.0, 0.0);
  run.lindblad = LindbladConfig::from_t1(0.05, 2);
  run.horizon_us = 4.0;
  run.output_interval_us = 2.0;
  const ProcessResult res = run_process_ensemble(run, 1, 1);
  CHECK(res.fidelity.back() == doctest::Approx(0.25).epsilon(1e-3));
  CHECK(res.fidelity.front() == doctest::Approx(1.0));
}

TEST_CASE("relaxation block against the single-qubit T1 law") {
  // Undriven pair: Bloch components decay as exp(-G t), exp(-2G t).
  ProcessRun run;
  run.a = drives::make_ladder(40.0, 1.0 / 30, 1, {}, {});
  run.a.drives[0].amplitude_mhz = 0.0;
  run.b = run.a;
  run.j_mhz = 0.0;
  run.lindblad = LindbladConfig::from_t1(2.0, 2);
  run.horizon_us = 1.0;
  run.output_interval_us = 1.0;
  run.dt_us = 0.001;
  const ProcessResult res = run_process_ensemble(run, 1, 1);
  const double g = run.lindblad.gamma;
  const PauliTransfer& r = res.mean_transfer.back();
  CHECK(r(1, 1) == doctest::Approx(std::exp(-g)).epsilon(1e-9));
  CHECK(r(3, 3) == doctest::Approx(std::exp(-2 * g)).epsilon(1e-9));
  CHECK(r(15, 15) == doctest::Approx(std::exp(-4 * g)).epsilon(1e-9));
}

TEST_CASE("noisy ensemble: linearity and thread invariance") {
  ProcessRun run = gate_run(2.4e-3, angular_from_mhz(0.05));
  run.lindblad = LindbladConfig::from_t1(1500.0, 2);
  const ProcessResult one = run_process_ensemble(run, 20, 11, 1);
  const ProcessResult four = run_process_ensemble(run, 20, 11, 4);
  for (std::size_t j = 0; j < one.times.size(); ++j) {
    CHECK(one.fidelity[j] == four.fidelity[j]);
    CHECK(max_abs(one.mean_transfer[j] - four.mean_transfer[j]) == 0.0);
    const Operator u = j == 0 ? Operator::identity(4) : propagator(run.ideal->as_hamiltonian(), one.times[j]);
    CHECK(transfer_fidelity(one.mean_transfer[j], transfer_of_unitary(u)) ==
          doctest::Approx(one.fidelity[j]).epsilon(1e-12));
  }
  CHECK(one.fidelity_stderr.back() > 0.0);
  const ProcessResult other = run_process_ensemble(run, 20, 12, 1);
  CHECK(other.fidelity.back() != one.fidelity.back());
}
