#include "ccd/core/state.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ccd {

QuantumState::QuantumState(Matrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols()) throw std::invalid_argument("QuantumState: matrix must be square");
  validate();
}

QuantumState QuantumState::pure(const Vector& psi) {
  const double n = psi.norm();
  if (!(n > 0.0)) throw std::invalid_argument("QuantumState::pure: zero vector");
  const Vector v = psi / n;
  return QuantumState(Matrix(v * v.adjoint()));
}

QuantumState QuantumState::from_bloch(const Bloch& r) {
  Matrix m(2, 2);
  m(0, 0) = 0.5 * (1.0 + r[2]);
  m(1, 1) = 0.5 * (1.0 - r[2]);
  m(0, 1) = 0.5 * cplx(r[0], -r[1]);
  m(1, 0) = 0.5 * cplx(r[0], r[1]);
  return QuantumState(m);
}

QuantumState QuantumState::maximally_mixed(int dim) {
  return QuantumState(Matrix(Matrix::Identity(dim, dim) / static_cast<double>(dim)));
}

double QuantumState::trace_error() const { return std::abs(rho_.trace() - 1.0); }

double QuantumState::min_eigenvalue() const {
  const Matrix herm = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double QuantumState::purity() const { return (rho_ * rho_).trace().real(); }

cplx QuantumState::expectation(const Operator& op) const { return (rho_ * op.matrix()).trace(); }

Bloch QuantumState::bloch() const {
  if (dim() != 2) throw std::invalid_argument("QuantumState::bloch: single qubit only");
  return {2.0 * rho_(1, 0).real(), 2.0 * rho_(1, 0).imag(), (rho_(0, 0) - rho_(1, 1)).real()};
}

void QuantumState::validate() const {
  const double tr = trace_error();
  const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  const double lmin = min_eigenvalue();
  if (tr > kTraceTol || herm > kStateHermiticityTol || lmin < -kPositivityTol) {
    std::ostringstream os;
    os << "density matrix invariant violated: |tr-1|=" << tr << " hermiticity=" << herm
       << " min eigenvalue=" << lmin;
    throw InvariantViolation(os.str());
  }
}

Vector ket_up() {
  Vector v = Vector::Zero(2);
  v(0) = 1.0;
  return v;
}

Vector ket_down() {
  Vector v = Vector::Zero(2);
  v(1) = 1.0;
  return v;
}

Vector kron(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

double state_fidelity(const QuantumState& a, const QuantumState& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("state_fidelity: dimension mismatch");
  const double overlap = (a.rho() * b.rho()).trace().real();
  if (a.dim() == 2) {
    const double da = std::max(0.0, a.rho().determinant().real());
    const double db = std::max(0.0, b.rho().determinant().real());
    return std::clamp(overlap + 2.0 * std::sqrt(da * db), 0.0, 1.0);
  }
  if (a.is_pure() || b.is_pure()) return std::clamp(overlap, 0.0, 1.0);
  throw std::invalid_argument("state_fidelity: mixed 4x4 states not supported");
}

}  // namespace ccd
