#pragma once

// Harmonic expansion of a time-dependent Hamiltonian:
//
//   H(t) = sum_terms  c_channel(t) * Re[P e^{i nu t}] * sigma_string
//
// with nu >= 0, a complex phasor P and a coefficient c that is 1 for nominal
// terms or the current noise value delta_channel(t) otherwise. Products of
// cosines, frame rotations and rotating-wave truncation are all closed under
// this representation, which lets every frame be derived from the lab-frame
// drive fields instead of being typed in by hand.

#include <cstdint>
#include <span>
#include <vector>

#include "ccd/core/operator.hpp"

namespace ccd::drives {

inline constexpr int kNominal = -1;

/// Pauli axes per qubit: 0 = I, 1 = x, 2 = y, 3 = z. Qubit b is unused for
/// single-qubit sets.
struct PauliString {
  std::uint8_t a = 0;
  std::uint8_t b = 0;
  auto operator<=>(const PauliString&) const = default;
};

struct HarmonicTerm {
  PauliString op;
  double nu = 0.0;
  cplx phasor{0.0, 0.0};
  int channel = kNominal;

  /// Re[P e^{i nu t}] (without the channel coefficient).
  double envelope(double t) const;
};

Operator pauli_string(PauliString s, int nqubits);

class TermSet {
 public:
  explicit TermSet(int nqubits = 1);

  int nqubits() const { return nqubits_; }
  const std::vector<HarmonicTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add(PauliString op, double nu, cplx phasor, int channel = kNominal);
  TermSet& operator+=(const TermSet& other);

  /// Every term multiplied by cos(nu t + phase).
  TermSet times_cos(double nu, double phase = 0.0) const;
  TermSet scaled(double s) const;

  /// Conjugation X -> U X U^dagger with U = exp(+i (rate t / 2) sigma_axis)
  /// acting on one qubit (0 = a, 1 = b).
  TermSet rotated(int qubit, int axis, double rate) const;

  /// Terms with nu below / at-or-above the cutoff.
  TermSet slow(double cutoff) const;
  TermSet fast(double cutoff) const;

  /// Terms on one channel only.
  TermSet channel(int ch) const;
  /// Copy with every term moved to channel `ch`.
  TermSet on_channel(int ch) const;

  /// Merge terms with equal (string, channel, frequency) and drop zeros.
  void simplify(double tol = 1e-13);

  double max_frequency() const;
  /// Upper bound of the operator norm with noise coefficients bounded by
  /// noise_bound[channel].
  double norm_bound(std::span<const double> noise_bound) const;
  /// Largest channel id referenced, or -1.
  int max_channel() const;

  /// noise[ch] supplies delta_ch; channels beyond the span are treated as 0.
  Operator evaluate(double t, std::span<const double> noise) const;

  /// First-order micromotion generator of the (fast) terms:
  /// K(t) = sum Re[-i P e^{i nu t}] / nu sigma, nominal terms only.
  Operator kick(double t) const;

  /// Antiderivative of the oscillating terms (static terms dropped).
  TermSet integral() const;

 private:
  int nqubits_;
  std::vector<HarmonicTerm> terms_;
};

/// i[K, X] for single-qubit sets. Products of two noise channels are dropped.
TermSet i_commutator(const TermSet& k, const TermSet& x);

/// Slow (below cutoff) terms left behind when `fast` is averaged out of
/// slow + fast: the change of picture exp(i K), dK/dt = fast, expanded to
/// second order in K, plus one further pass over the remaining fast part.
TermSet averaging_correction(const TermSet& slow, const TermSet& fast, double cutoff);

}  // namespace ccd::drives
