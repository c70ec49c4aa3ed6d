#include <cmath>
#include <numbers>
#include <random>

#include "ccd/analysis/coherence.hpp"
#include "ccd/analysis/fidelity.hpp"
#include "ccd/analysis/fit.hpp"
#include "ccd/analysis/spectrum.hpp"
#include "ccd/core/units.hpp"
#include "doctest.h"

using namespace ccd;
using namespace ccd::analysis;
using evolution::EnsembleResult;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return t;
}

// Quasi-static ensemble: lane k oscillates at w (1 + sigma g_k).
EnsembleResult synthetic_ensemble(std::size_t n, double w, double sigma, std::size_t nt, double horizon,
                                  std::uint64_t seed) {
  EnsembleResult r;
  r.times = linspace(0.0, horizon, nt);
  r.realizations = n;
  r.contrast.assign(nt, 0.0);
  r.contrast_stderr.assign(nt, 0.0);
  r.contrast_samples.assign(nt * n, 0.0f);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> d(n);
  for (auto& x : d) x = sigma * g(rng);
  for (std::size_t j = 0; j < nt; ++j) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double c = std::cos(w * (1.0 + d[k]) * r.times[j]);
      r.contrast_samples[j * n + k] = static_cast<float>(c);
      s += c;
      s2 += c * c;
    }
    const double m = s / static_cast<double>(n);
    r.contrast[j] = m;
    const double var = std::max(0.0, (s2 - n * m * m) / static_cast<double>(n - 1));
    r.contrast_stderr[j] = std::sqrt(var / static_cast<double>(n));
  }
  return r;
}

Matrix random_unitary(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a(i, j) = cplx(g(rng), g(rng));
  const Eigen::Matrix4cd am = a;
  Eigen::HouseholderQR<Eigen::Matrix4cd> qr(am);
  return Matrix(Eigen::Matrix4cd(qr.householderQ()));
}

}  // namespace

TEST_CASE("coherence") {
  EnsembleResult r;
  r.times = {0.0, 1.0};
  for (int a = 0; a < 3; ++a) r.mean_obs[a] = {0.0, 0.0};
  r.mean_obs[2] = {-1.0, 0.0};
  const QuantumState down = QuantumState::pure(ket_down());
  const auto f = coherence(r, down);
  CHECK(f[0] == doctest::Approx(1.0));
  CHECK(f[1] == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(coherence(r, QuantumState::maximally_mixed(2)), std::invalid_argument);

  SUBCASE("exact Rabi overlap") {
    evolution::TrajectoryRun run;
    run.scheme = drives::make_ladder(10.0, 0.1, 1, {0.0, 1.0, 0}, {0.0, 1.0, 0});
    run.horizon_us = 0.5;
    run.output_interval_us = 0.005;
    const EnsembleResult e = evolution::run_ensemble(run, 1, 1);
    const auto fr = coherence(e, down);
    const double w = angular_from_mhz(10.0);
    for (std::size_t j = 0; j < fr.size(); ++j) {
      CHECK(fr[j] == doctest::Approx(std::abs(std::cos(0.5 * w * e.times[j]))).epsilon(1e-6));
      CHECK(fr[j] <= 1.0);
    }
  }
}

TEST_CASE("envelope fits on synthetic data") {
  const double b = angular_from_mhz(0.098);
  const auto t = linspace(0.0, 10.0, 8001);
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = std::exp(-0.5 * b * b * t[i] * t[i]) * std::cos(kTwoPi * 40.0 * t[i]);

  const FitResult g = fit_envelope(t, v, DecayModel::gaussian);
  CHECK(g.parameter == doctest::Approx(b).epsilon(0.02));
  CHECK(g.t2 == doctest::Approx(std::sqrt(2.0) / g.parameter));
  CHECK_FALSE(g.t2_infinite);

  SUBCASE("time scaling") {
    std::vector<double> ts(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) ts[i] = 3.0 * t[i];
    const FitResult gs = fit_envelope(ts, v, DecayModel::gaussian);
    CHECK(gs.parameter == doctest::Approx(g.parameter / 3.0).epsilon(1e-6));
  }
  SUBCASE("no decay") {
    std::vector<double> c(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) c[i] = std::cos(kTwoPi * 4.0 * t[i]);
    const FitResult f = fit_envelope(t, c, DecayModel::gaussian);
    CHECK(f.t2_infinite);
    CHECK(f.parameter == 0.0);
    CHECK(f.t2_lower_bound == doctest::Approx(10.0));
  }
  SUBCASE("exponential") {
    std::vector<double> c(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) c[i] = std::exp(-0.37 * t[i]) * std::cos(kTwoPi * 3.0 * t[i]);
    CHECK(fit_envelope(t, c, DecayModel::exponential).parameter == doctest::Approx(0.37).epsilon(1e-3));
  }
  SUBCASE("monotone series without extrema") {
    std::vector<double> c(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) c[i] = std::exp(-0.2 * t[i]);
    const Envelope e = extract_envelope(t, c);
    CHECK_FALSE(e.from_peaks);
    CHECK(fit_decay(e, DecayModel::exponential).parameter == doctest::Approx(0.2).epsilon(1e-6));
  }
  SUBCASE("insufficient extrema") {
    std::vector<double> c(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) c[i] = std::sin(0.5 * t[i]);
    CHECK_THROWS_AS(extract_envelope(t, c), FitError);
  }
  SUBCASE("floor cut") {
    std::vector<double> floor(t.size(), 0.5);
    const Envelope e = extract_envelope(t, v, floor);
    for (double s : e.s) CHECK(s >= 0.5);
  }
  SUBCASE("decay faster than the peak spacing") {
    // exp(-t) riding on a slow cosine plus small ripple after the decay:
    // the only surviving peak is t = 0, so the pre-floor samples are used.
    std::vector<double> c(t.size()), floor(t.size(), 0.02);
    for (std::size_t i = 0; i < t.size(); ++i)
      c[i] = std::exp(-t[i]) * std::cos(0.2 * t[i]) + 0.01 * std::sin(kTwoPi * 2.0 * t[i]) * (t[i] > 5.0);
    const Envelope e = extract_envelope(t, c, floor, 1e-9);
    CHECK_FALSE(e.from_peaks);
    CHECK(e.t.back() < 4.0);
    CHECK(fit_decay(e, DecayModel::exponential).parameter == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("bootstrap over realizations") {
  // Quasi-static amplitude noise: mean contrast cos(wt) exp(-(w sigma t)^2 / 2).
  const double w = angular_from_mhz(40.0), sigma = 2.4e-3;
  const EnsembleResult r = synthetic_ensemble(200, w, sigma, 4001, 6.0, 17);
  BootstrapOptions opt;
  opt.resamples = 300;
  const FitResult f = fit_ensemble(r, DecayModel::gaussian, opt);
  MESSAGE("b = " << f.parameter << " [" << f.parameter_low << ", " << f.parameter_high << "], expected " << w * sigma);
  CHECK(f.parameter_low <= f.parameter);
  CHECK(f.parameter <= f.parameter_high);
  CHECK(f.parameter == doctest::Approx(w * sigma).epsilon(0.15));
  // relative spread of a sample standard deviation is about 1/sqrt(2N) = 5%
  const double rel = f.parameter_stderr / f.parameter;
  CHECK(rel > 0.02);
  CHECK(rel < 0.1);
  CHECK(f.t2_low <= f.t2);
  CHECK(f.t2 <= f.t2_high);
  CHECK(f.resamples == 300);

  const ModelSelection sel = select_model(r, opt);
  CHECK(sel.best == DecayModel::gaussian);
}

TEST_CASE("model selection picks the exponential for exponential data") {
  EnsembleResult r;
  r.times = linspace(0.0, 20.0, 2001);
  r.realizations = 1;
  for (double t : r.times) {
    r.contrast.push_back(std::exp(-0.15 * t) * std::cos(kTwoPi * 2.0 * t));
    r.contrast_stderr.push_back(0.0);
  }
  BootstrapOptions opt;
  opt.resamples = 0;
  const ModelSelection sel = select_model(r, opt);
  CHECK(sel.best == DecayModel::exponential);
  CHECK(sel.chosen().parameter == doctest::Approx(0.15).epsilon(1e-3));
}

TEST_CASE("dressed rabi frequency") {
  const auto t = linspace(0.0, 1.0, 4001);
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = 0.5 * (1.0 + std::cos(kTwoPi * 40.0 * t[i]));
  CHECK(dressed_rabi_frequency(t, v).frequency_mhz == doctest::Approx(40.0).epsilon(1e-3));

  SUBCASE("frame-2 dressed oscillation: refined at W2, simplified at W2/2") {
    // Generator (W2/2) sy for the refined field and (W2/4) sy for the
    // simplified one at phase pi/2; a y rotation of |down> oscillates at the
    // generator's full angular rate.
    const double w2 = 1.333;
    double f[2];
    for (int var = 0; var < 2; ++var) {
      evolution::TrajectoryRun run;
      run.scheme = drives::make_ladder(40.0, w2 / 40.0, 2, {0.0, 1.0, 0}, {0.0, 1.0, 0});
      run.scheme.frame = drives::FrameLabel::interaction2;
      if (var == 1) {
        run.scheme.drives[1].variant = drives::Variant::simplified;
        run.scheme.drives[1].phase = std::numbers::pi / 2.0;
      }
      run.horizon_us = 15.0;
      run.output_interval_us = 0.01;
      const EnsembleResult e = evolution::run_ensemble(run, 1, 1);
      std::vector<double> pop(e.times.size());
      for (std::size_t j = 0; j < pop.size(); ++j) pop[j] = 0.5 * (1.0 - e.mean_sim[2][j]);
      f[var] = dressed_rabi_frequency(e.times, pop).frequency_mhz;
    }
    CHECK(f[0] == doctest::Approx(w2).epsilon(0.005));
    CHECK(f[1] == doctest::Approx(0.5 * w2).epsilon(0.005));
  }
  SUBCASE("rejections") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    std::vector<double> noise(t.size());
    for (auto& x : noise) x = g(rng);
    CHECK_THROWS_AS(dressed_rabi_frequency(t, noise), FitError);
    std::vector<double> slow(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) slow[i] = std::cos(kTwoPi * 4.0 * t[i]);
    CHECK_THROWS_AS(dressed_rabi_frequency(t, slow), FitError);
  }
}

TEST_CASE("pauli transfer matrices") {
  std::mt19937_64 rng(8);
  const Operator u(random_unitary(rng)), v(random_unitary(rng));
  CHECK((transfer_of_unitary(Operator::identity(4)) - PauliTransfer::Identity()).cwiseAbs().maxCoeff() < 1e-14);
  const PauliTransfer ru = transfer_of_unitary(u), rv = transfer_of_unitary(v);
  CHECK((transfer_of_unitary(u * v) - ru * rv).cwiseAbs().maxCoeff() < 1e-12);
  for (int j = 0; j < 16; ++j) {
    const Matrix ref = u.matrix() * pauli_basis(j).matrix() * u.matrix().adjoint();
    CHECK((transfer_output(ru, j) - ref).cwiseAbs().maxCoeff() < 1e-12);
  }
  const Operator ua = propagator(Operator(0.4 * pauli(PauliAxis::y).matrix()).as_hamiltonian(), 1.0);
  const std::array<double, 9> m = {std::cos(0.8), 0.0, std::sin(0.8), 0.0, 1.0, 0.0, -std::sin(0.8), 0.0, std::cos(0.8)};
  CHECK((transfer_of_qubit(0, m) - transfer_of_unitary(tensor(ua, Operator::identity(2)))).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gate fidelity") {
  std::mt19937_64 rng(4);
  const Operator u(random_unitary(rng));
  const auto ident = samples_from_transfer(transfer_of_unitary(u));
  CHECK(gate_fidelity(u, ident) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(gate_fidelity(u, ident) - 1.0) < 1e-9);

  PauliTransfer dep = PauliTransfer::Zero();
  dep(0, 0) = 1.0;
  CHECK(gate_fidelity(u, samples_from_transfer(dep)) == doctest::Approx(0.25));

  // unitary channel V: F = (4 + |tr(U^dagger V)|^2) / 20
  for (int trial = 0; trial < 5; ++trial) {
    const Operator v(random_unitary(rng));
    const double tr = std::norm((u.matrix().adjoint() * v.matrix()).trace());
    const double f = gate_fidelity(u, samples_from_transfer(transfer_of_unitary(v)));
    CHECK(f == doctest::Approx((4.0 + tr) / 20.0).epsilon(1e-12));
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
  }

  auto missing = ident;
  missing.pop_back();
  CHECK_THROWS_AS(gate_fidelity(u, missing), std::invalid_argument);
  auto dup = ident;
  dup.back() = dup.front();
  CHECK_THROWS_AS(gate_fidelity(u, dup), std::invalid_argument);
  auto leaky = ident;
  leaky[3].output += Matrix(Matrix::Identity(4, 4)) * 1e-3;
  CHECK_THROWS_AS(gate_fidelity(u, leaky), InvariantViolation);
}
