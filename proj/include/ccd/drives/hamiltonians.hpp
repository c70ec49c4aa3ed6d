#pragma once

// Hamiltonians of the drive hierarchy.
//
// Two independent routes exist: closed-form builders below (one function per
// frame, written out term by term), and the harmonic term engine
// (frame_model), which derives every frame from the lab fields by rotation
// and truncation. The simulators use the engine; tests check that both agree.

#include <span>
#include <string>
#include <vector>

#include "ccd/core/operator.hpp"
#include "ccd/core/state.hpp"
#include "ccd/drives/scheme.hpp"
#include "ccd/drives/terms.hpp"

namespace ccd::drives {

/// Sum of the exact lab-frame drive fields with amplitudes W_k (1 + delta_k).
/// drive_noise holds one delta per drive.
Operator lab_drive_hamiltonian(const SchemeConfig& s, double t, std::span<const double> drive_noise);

/// First interaction picture after dropping the 2w terms, plus (delta_b/2) sz.
Operator interaction1_hamiltonian(const SchemeConfig& s, double t, std::span<const double> drive_noise,
                                  double delta_b);

/// Second interaction picture after both rotating-wave steps (scheme order >= 2).
Operator effective_hamiltonian_order2(const SchemeConfig& s, double t, std::span<const double> drive_noise);

/// Lab-frame RF field W prod_k cos(W_k t + phi_k) sz over all scheme drives.
Operator rf_control_hamiltonian(const SchemeConfig& s, double t);
/// Second-order effective form (W2/2) sy + (W/2) cos(W2 t + phi2) sz.
Operator rf_control_effective(const SchemeConfig& s, double t);

/// First-interaction-picture two-qubit Hamiltonian (static ZZ coupling) with both
/// drive sets. Noise spans are per-drive deltas of each qubit.
Operator two_qubit_hamiltonian(const SchemeConfig& a, const SchemeConfig& b, double j_mhz, double t,
                               std::span<const double> noise_a, std::span<const double> noise_b);
/// Double-RWA gate generator (J/4)(yy + zz) + (W2a/2) y1 + (W2b/2) y2.
/// Appends a warning when the first-order amplitudes differ.
Operator two_qubit_effective(const SchemeConfig& a, const SchemeConfig& b, double j_mhz,
                             std::vector<std::string>* warnings = nullptr);

/// H0 of a frame level (zero for the lab).
Operator frame_generator(FrameLabel level, const SchemeConfig& s, int nqubits = 1);

/// One-level (or identity) change of picture at time t:
/// X -> U X U^dagger with U = exp(+i H0 t) going up a level, inverse going down.
/// Throws std::invalid_argument for frames two levels apart.
Operator transform_frame(const Operator& x, FrameLabel from, FrameLabel to, double t, const SchemeConfig& s);
QuantumState transform_frame(const QuantumState& rho, FrameLabel from, FrameLabel to, double t,
                             const SchemeConfig& s);
Vector transform_frame(const Vector& psi, FrameLabel from, FrameLabel to, double t, const SchemeConfig& s);

/// Term-engine description of a scheme in one frame.
struct FrameModel {
  FrameLabel frame = FrameLabel::interaction1;
  TermSet slow{1};       ///< Hamiltonian that is simulated
  TermSet fast{1};       ///< terms discarded by the last rotating-wave step
  double rwa_cutoff = 0.0;
  /// Second frame only: slow terms generated by the discarded fast terms
  /// (see averaging_correction). Simulations add it to `slow`.
  TermSet correction{1};
};

struct ModelOptions {
  /// Only drives 1..max_order contribute (0 = all).
  int max_order = 0;
  bool include_noise = true;
  bool include_rf = true;
  /// Lab frame only: add the static (w/2) sz.
  bool include_carrier = true;
};

FrameModel frame_model(const SchemeConfig& s, FrameLabel frame, const ModelOptions& opt = {});

/// Two-qubit model in frame 1 or 2 (lab not supported). Qubit b channels are
/// offset by kChannelsPerQubit.
FrameModel two_qubit_model(const SchemeConfig& a, const SchemeConfig& b, double j_mhz, FrameLabel frame,
                           const ModelOptions& opt = {});

/// Static effective axis of every drive in its own hierarchy level, derived by
/// successive rotations with the term engine. Each axis is a unit-norm
/// combination of Pauli matrices.
std::vector<Operator> effective_axes(const SchemeConfig& s);

}  // namespace ccd::drives
