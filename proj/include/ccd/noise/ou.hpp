#pragma once

// Ornstein-Uhlenbeck noise with the exact (Gillespie) update
//   x(t+dt) = x e^{-dt/tau} + sigma sqrt(1 - e^{-2dt/tau}) g,   g ~ N(0,1)
// which preserves the stationary variance sigma^2 for any dt.
//
// Generator identity: std::mt19937_64 seeded with a splitmix64-derived seed,
// std::normal_distribution<double> for the Gaussian draws.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace ccd::noise {

struct OUParams {
  double sigma = 0.0;   ///< stationary std (relative for drives, rad/us for magnetic noise)
  double tau = 1.0;     ///< correlation time, us
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless sigma >= 0 and tau > 0.
  void validate() const;
};

double ou_step(double x, double dt, const OUParams& p, double gauss);

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x);

/// Seed of realization `index` on noise channel `channel`. Independent of
/// evaluation order, so ensembles can be split across threads freely.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t channel, std::uint64_t index);

/// Streaming OU process. Starts from the stationary distribution and
/// advances on a fixed spacing; produces the same values as
/// sample_trajectory on the uniform grid k*spacing.
class OUProcess {
 public:
  OUProcess() = default;
  OUProcess(const OUParams& p, double spacing);

  double value() const { return value_; }
  double advance();

 private:
  double value_ = 0.0;
  double decay_ = 0.0;
  double kick_ = 0.0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_;
};

struct NoiseTrajectory {
  std::vector<double> times;
  std::vector<double> values;
};

/// Exact OU chain on an arbitrary strictly increasing grid. The first value is
/// drawn from N(0, sigma^2). Throws on an empty or non-monotone grid.
NoiseTrajectory sample_trajectory(std::span<const double> grid, const OUParams& p);

/// Debug dump: "time_us,value" header then one row per sample.
void write_csv(std::ostream& os, const NoiseTrajectory& traj);

}  // namespace ccd::noise
