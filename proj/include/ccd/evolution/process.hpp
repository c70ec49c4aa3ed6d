#pragma once

// Two-qubit channel engine. Each realization evolves the full Pauli transfer
// matrix of the dipolar-coupled pair in the first frame:
//
//   step:  D(dt/2) (Ua (x) Ub) D(dt/2),  D = exp(-i Hc t) for the static
//          zz coupling, Ua/Ub fourth-order Magnus steps of each qubit
//   block: the relaxation of both qubits is applied once per short block in
//          the interaction picture of the block's single-qubit rotations,
//          E = exp(int O^T L O ds), so fast Rabi rotation does not alias the
//          anisotropic (G, G, 2G) rates.
//
// Outputs are mapped to the second frame (rotation about x at W1 per qubit).

#include <cstdint>
#include <optional>
#include <vector>

#include "ccd/core/pauli_transfer.hpp"
#include "ccd/drives/scheme.hpp"
#include "ccd/evolution/engine.hpp"
#include "ccd/evolution/lindblad.hpp"

namespace ccd::evolution {

struct ProcessRun {
  drives::SchemeConfig a, b;
  double j_mhz = 0.05;
  /// Relaxation rate shared by both qubits (nqubits is ignored).
  LindbladConfig lindblad;
  double horizon_us = 10.0;
  double output_interval_us = 0.1;
  double dt_us = 0.0;
  double noise_spacing_us = 0.0;
  double dissipation_block_us = 0.02;
  bool include_noise = true;
  /// Second-frame gate generator; per-realization fidelities are recorded when set.
  std::optional<Operator> ideal;
};

struct ProcessResult {
  std::vector<double> times;
  std::size_t realizations = 0;
  /// Ensemble-mean channel in the second frame per output time.
  std::vector<PauliTransfer> mean_transfer;
  /// [time * realizations + lane]
  std::vector<double> fidelity_samples;
  std::vector<double> fidelity, fidelity_stderr;
  TimeGrid grid;
};

TimeGrid resolve_process_grid(const ProcessRun& run);

ProcessResult run_process_ensemble(const ProcessRun& run, std::size_t n, std::uint64_t master_seed,
                                   unsigned threads = 1);

/// F = (1/16)[4 + (4/5) sum_{i, j>0} R_ij R^ideal_ij]: the gate fidelity
/// written through the ideal transfer matrix.
double transfer_fidelity(const PauliTransfer& channel, const PauliTransfer& ideal);

}  // namespace ccd::evolution
