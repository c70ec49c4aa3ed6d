#pragma once

#include <array>
#include <span>

#include "ccd/core/bloch.hpp"
#include "ccd/core/operator.hpp"

namespace ccd {

using Vector = Eigen::Matrix<cplx, Eigen::Dynamic, 1, Eigen::ColMajor, 4, 1>;

inline constexpr double kTraceTol = 1e-9;
inline constexpr double kStateHermiticityTol = 1e-10;
inline constexpr double kPositivityTol = 1e-8;

/// Density matrix with trace / Hermiticity / positivity invariants.
class QuantumState {
 public:
  QuantumState() = default;
  /// Validates on construction.
  explicit QuantumState(Matrix rho);

  static QuantumState pure(const Vector& psi);
  static QuantumState from_bloch(const Bloch& r);
  static QuantumState maximally_mixed(int dim);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const Matrix& rho() const { return rho_; }
  Operator as_operator() const { return Operator(rho_); }

  double trace_error() const;
  double min_eigenvalue() const;
  double purity() const;
  bool is_pure(double tol = 1e-9) const { return std::abs(purity() - 1.0) < tol; }
  cplx expectation(const Operator& op) const;
  /// Single qubit only.
  Bloch bloch() const;

  /// Throws InvariantViolation with a diagnostic when any invariant fails.
  void validate() const;

 private:
  Matrix rho_;
};

Vector ket_up();
Vector ket_down();
/// Tensor product of state vectors.
Vector kron(const Vector& a, const Vector& b);

/// Pure-state overlap |<a|b>|^2 or Uhlmann fidelity for general single-qubit
/// states (closed form tr(ab) + 2 sqrt(det a det b)).
double state_fidelity(const QuantumState& a, const QuantumState& b);

}  // namespace ccd
