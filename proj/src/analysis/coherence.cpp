#include "ccd/analysis/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ccd::analysis {
namespace {

Bloch pure_direction(const QuantumState& reference) {
  if (reference.dim() != 2) throw std::invalid_argument("coherence: single-qubit reference expected");
  if (!reference.is_pure()) throw std::invalid_argument("coherence: reference state must be pure");
  return reference.bloch();
}

}  // namespace

double coherence(const Bloch& mean, const QuantumState& reference) {
  const Bloch r0 = pure_direction(reference);
  const double p = 0.5 * (1.0 + mean[0] * r0[0] + mean[1] * r0[1] + mean[2] * r0[2]);
  return std::sqrt(std::clamp(p, 0.0, 1.0));
}

std::vector<double> coherence(const evolution::EnsembleResult& series, const QuantumState& reference) {
  pure_direction(reference);
  std::vector<double> f(series.times.size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = coherence(series.mean_obs_at(j), reference);
  return f;
}

}  // namespace ccd::analysis
