#pragma once

// Small dense complex operators for one and two qubits.
//
// Basis order is fixed everywhere: index 0 = |up> = |ms=-1>, index 1 =
// |down> = |ms=0>. Two-qubit operators use the Kronecker order a (x) b,
// so index 2*i_a + i_b.
//
// Hamiltonians carry angular-frequency coefficients in rad/us.

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ccd {

using cplx = std::complex<double>;

/// Dense matrix with a compile-time upper bound of 4x4 (no heap allocation).
using Matrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 4, 4>;

/// Thrown whenever a numerical invariant (Hermiticity, unitarity, trace,
/// positivity) is violated. The CLI maps this to exit code 3.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kHamiltonianHermiticityTol = 1e-12;
inline constexpr double kPropagatorUnitarityTol = 1e-10;

enum class OperatorKind { generic, hamiltonian, propagator };

class Operator {
 public:
  Operator() = default;
  explicit Operator(Matrix m, OperatorKind kind = OperatorKind::generic);

  static Operator zero(int dim);
  static Operator identity(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  OperatorKind kind() const { return kind_; }
  cplx operator()(int r, int c) const { return m_(r, c); }

  /// Re-tags as a Hamiltonian. Throws InvariantViolation unless Hermitian
  /// within kHamiltonianHermiticityTol (max elementwise |H - H^dagger|).
  Operator as_hamiltonian() const;

  Operator adjoint() const;
  cplx trace() const { return m_.trace(); }

  double hermiticity_error() const;
  double unitarity_error() const;
  /// Max elementwise difference.
  double distance(const Operator& other) const;

  Operator operator+(const Operator& o) const;
  Operator operator-(const Operator& o) const;
  Operator operator*(const Operator& o) const;
  Operator operator*(cplx s) const;
  friend Operator operator*(cplx s, const Operator& o) { return o * s; }

 private:
  Matrix m_;
  OperatorKind kind_ = OperatorKind::generic;
};

enum class PauliAxis { x, y, z, plus, minus };

/// 2x2 Pauli matrix in the {|up>, |down>} basis. plus = |up><down|.
Operator pauli(PauliAxis axis);

Operator tensor(const Operator& a, const Operator& b);

Operator commutator(const Operator& a, const Operator& b);

/// exp(-i h dt) via eigendecomposition of the Hermitian input
/// (closed form for 2x2, self-adjoint solver for 4x4).
/// Throws std::invalid_argument for dt <= 0 and InvariantViolation when h is
/// not Hermitian.
Operator propagator(const Operator& h, double dt);

}  // namespace ccd
