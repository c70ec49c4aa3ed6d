#pragma once

#include <span>
#include <vector>

#include "ccd/core/operator.hpp"
#include "ccd/core/pauli_transfer.hpp"

namespace ccd::analysis {

/// Channel output M(sigma_mu (x) sigma_nu) for one basis input.
struct ProcessSample {
  int mu = 0, nu = 0;
  Matrix output;
};

/// F = (1/16) [4 + (1/5) sum tr(U X U^dagger M(X))] over the 15 non-identity
/// Pauli pairs X. Throws std::invalid_argument when a pair is missing,
/// duplicated or the identity, and InvariantViolation when a sample is not
/// trace preserving within 1e-6.
double gate_fidelity(const Operator& ideal, std::span<const ProcessSample> samples);

/// The 15 samples of a channel given by its Pauli transfer matrix.
std::vector<ProcessSample> samples_from_transfer(const PauliTransfer& r);

}  // namespace ccd::analysis
