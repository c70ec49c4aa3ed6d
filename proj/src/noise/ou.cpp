#include "ccd/noise/ou.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace ccd::noise {

void OUParams::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("OUParams: sigma must be >= 0");
  if (!(tau > 0.0)) throw std::invalid_argument("OUParams: tau must be > 0");
}

double ou_step(double x, double dt, const OUParams& p, double gauss) {
  if (!(dt > 0.0)) throw std::invalid_argument("ou_step: dt must be > 0");
  const double decay = std::exp(-dt / p.tau);
  return x * decay + p.sigma * std::sqrt(-std::expm1(-2.0 * dt / p.tau)) * gauss;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t channel, std::uint64_t index) {
  return mix64(mix64(mix64(master) ^ (channel * 0xd1b54a32d192ed03ULL + 1)) ^ index);
}

OUProcess::OUProcess(const OUParams& p, double spacing) : rng_(p.seed) {
  p.validate();
  if (!(spacing > 0.0)) throw std::invalid_argument("OUProcess: spacing must be > 0");
  decay_ = std::exp(-spacing / p.tau);
  kick_ = p.sigma * std::sqrt(-std::expm1(-2.0 * spacing / p.tau));
  value_ = p.sigma * gauss_(rng_);
}

double OUProcess::advance() {
  value_ = value_ * decay_ + kick_ * gauss_(rng_);
  return value_;
}

NoiseTrajectory sample_trajectory(std::span<const double> grid, const OUParams& p) {
  p.validate();
  if (grid.empty()) throw std::invalid_argument("sample_trajectory: empty grid");
  NoiseTrajectory out;
  out.times.assign(grid.begin(), grid.end());
  out.values.resize(grid.size());
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> gauss;
  out.values[0] = p.sigma * gauss(rng);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double dt = grid[k] - grid[k - 1];
    if (!(dt > 0.0)) throw std::invalid_argument("sample_trajectory: grid must be strictly increasing");
    out.values[k] = ou_step(out.values[k - 1], dt, p, gauss(rng));
  }
  return out;
}

void write_csv(std::ostream& os, const NoiseTrajectory& traj) {
  os.imbue(std::locale::classic());
  os << "time_us,value\n" << std::setprecision(17);
  for (std::size_t k = 0; k < traj.times.size(); ++k) os << traj.times[k] << ',' << traj.values[k] << '\n';
}

}  // namespace ccd::noise
