#pragma once

#include <vector>

#include "ccd/core/state.hpp"
#include "ccd/evolution/engine.hpp"

namespace ccd::analysis {

/// f = sqrt(<psi0| rho |psi0>) per output time, with rho the ensemble-mean
/// state in the observation frame. Equals |<psi0|psi>| for pure rho; the
/// maximally mixed floor is sqrt(1/2). Throws std::invalid_argument for a
/// mixed reference.
std::vector<double> coherence(const evolution::EnsembleResult& series, const QuantumState& reference);

/// Same quantity from a single Bloch vector.
double coherence(const Bloch& mean, const QuantumState& reference);

}  // namespace ccd::analysis
