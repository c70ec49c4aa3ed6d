#pragma once

// Monte-Carlo integration of single-qubit runs.
//
// Every lane owns one OU realization per noise channel (seeded by
// derive_seed(master, channel, lane)), held piecewise constant on a noise
// sub-grid. Lanes are processed in fixed chunks of kChunkLanes and partial
// sums are merged in chunk order, so results do not depend on the thread
// count.
//
// Observation frame: the interaction picture of the noise-free, loss-free
// evolution generated by drives 1..reference_order in the simulation frame.
// With reference_order = K-1 this removes all lower drives, leaving the
// oscillation of the highest drive; the contrast r_obs . r0 is the quantity
// whose envelope defines T2, and the coherence is sqrt((1 + contrast)/2).

#include <array>
#include <cstdint>
#include <vector>

#include "ccd/core/state.hpp"
#include "ccd/drives/hamiltonians.hpp"
#include "ccd/evolution/kernels.hpp"
#include "ccd/evolution/lindblad.hpp"

namespace ccd::evolution {

inline constexpr std::size_t kChunkLanes = 64;

struct TrajectoryRun {
  drives::SchemeConfig scheme;
  LindbladConfig lindblad;
  Bloch initial{0.0, 0.0, -1.0};
  double horizon_us = 10.0;
  double output_interval_us = 0.01;
  double dt_us = 0.0;             ///< 0 selects the largest admissible step
  double noise_spacing_us = 0.0;  ///< 0 selects min(tau/100, 50 dt)
  int reference_order = -1;       ///< -1 means order - 1
  bool micromotion = true;        ///< second frame only: map states with the first-order kick
  std::uint64_t seed = 0;
  KernelKind kernel = KernelKind::automatic;
  bool keep_lanes = false;
};

struct TimeGrid {
  double dt = 0.0;
  double dt_max = 0.0;
  double f_max_mhz = 0.0;
  std::size_t steps_per_output = 1;
  std::size_t outputs = 0;
  std::size_t noise_every = 1;
  double noise_spacing() const { return dt * static_cast<double>(noise_every); }
};

/// dt rule: dt <= 1/(50 f_max) with f_max the larger of the fastest term
/// frequency and the precession rate bound 2|h| (noise at 3 sigma), in
/// cyclic units. Throws InvariantViolation for an explicit dt that breaks it.
TimeGrid resolve_grid(const TrajectoryRun& run);

struct EnsembleResult {
  std::vector<double> times;
  std::size_t realizations = 0;
  std::array<std::vector<double>, 3> mean_sim, stderr_sim;  ///< Bloch vector in the simulation frame
  std::array<std::vector<double>, 3> mean_obs, stderr_obs;  ///< Bloch vector in the observation frame
  std::vector<double> population_down;  ///< ms = 0 population in the bare (first-frame) basis
  std::vector<double> contrast, contrast_stderr;
  std::vector<double> coherence;
  /// contrast of every lane, [time * realizations + lane]
  std::vector<float> contrast_samples;
  /// simulation-frame Bloch vector of every lane, when keep_lanes
  std::vector<Bloch> lane_states;
  TimeGrid grid;
  KernelKind kernel = KernelKind::portable;
  double max_radius = 0.0;
  double min_radius = 1.0;

  Bloch lane_state(std::size_t t, std::size_t lane) const { return lane_states[t * realizations + lane]; }
  double contrast_sample(std::size_t t, std::size_t lane) const { return contrast_samples[t * realizations + lane]; }
  Bloch mean_obs_at(std::size_t t) const { return {mean_obs[0][t], mean_obs[1][t], mean_obs[2][t]}; }
};

/// One realization (lane 0 of master seed run.seed).
EnsembleResult run_trajectory(const TrajectoryRun& run);

EnsembleResult run_ensemble(const TrajectoryRun& run, std::size_t n, std::uint64_t master_seed, unsigned threads = 1);

struct CrossValidation {
  double min_fidelity = 1.0;
  double worst_time = 0.0;
  std::size_t lanes = 0;
  double window_us = 0.0;
};

/// Runs the scheme in the first and (with micromotion) second frame on the
/// same noise realizations and returns the minimum per-lane state fidelity.
CrossValidation cross_validate(const TrajectoryRun& run, std::size_t lanes, std::uint64_t master_seed,
                               double window_us = 50.0, unsigned threads = 1);

/// Uhlmann fidelity of two qubit states given by Bloch vectors.
double bloch_fidelity(const Bloch& a, const Bloch& b);

/// Hamiltonian field h (H = h . sigma, identity dropped) of a single-qubit term set.
std::array<double, 3> bloch_field(const drives::TermSet& ts, double t, std::span<const double> noise);
/// Bloch-vector form of the kick generator of a term set.
std::array<double, 3> bloch_kick(const drives::TermSet& fast, double t);

}  // namespace ccd::evolution
