#include "ccd/core/operator.hpp"

#include <algorithm>
#include <cmath>

namespace ccd {

Operator::Operator(Matrix m, OperatorKind kind) : m_(std::move(m)), kind_(kind) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("Operator: matrix must be square");
}

Operator Operator::zero(int dim) { return Operator(Matrix::Zero(dim, dim)); }

Operator Operator::identity(int dim) { return Operator(Matrix::Identity(dim, dim)); }

Operator Operator::as_hamiltonian() const {
  const double err = hermiticity_error();
  if (err > kHamiltonianHermiticityTol) {
    throw InvariantViolation("Hamiltonian is not Hermitian: max |H - H^dagger| = " +
                             std::to_string(err));
  }
  return Operator(m_, OperatorKind::hamiltonian);
}

Operator Operator::adjoint() const { return Operator(m_.adjoint(), kind_); }

double Operator::hermiticity_error() const {
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

double Operator::unitarity_error() const {
  const Matrix id = Matrix::Identity(dim(), dim());
  return (m_.adjoint() * m_ - id).cwiseAbs().maxCoeff();
}

double Operator::distance(const Operator& other) const {
  if (other.dim() != dim()) throw std::invalid_argument("Operator::distance: dimension mismatch");
  return (m_ - other.m_).cwiseAbs().maxCoeff();
}

namespace {
void require_same_dim(const Operator& a, const Operator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("Operator: dimension mismatch");
}
OperatorKind combined(OperatorKind a, OperatorKind b) {
  return (a == OperatorKind::hamiltonian && b == OperatorKind::hamiltonian) ? OperatorKind::hamiltonian
                                                                              : OperatorKind::generic;
}
}  // namespace

Operator Operator::operator+(const Operator& o) const {
  require_same_dim(*this, o);
  return Operator(m_ + o.m_, combined(kind_, o.kind_));
}

Operator Operator::operator-(const Operator& o) const {
  require_same_dim(*this, o);
  return Operator(m_ - o.m_, combined(kind_, o.kind_));
}

Operator Operator::operator*(const Operator& o) const {
  require_same_dim(*this, o);
  const bool unitary = kind_ == OperatorKind::propagator && o.kind_ == OperatorKind::propagator;
  return Operator(m_ * o.m_, unitary ? OperatorKind::propagator : OperatorKind::generic);
}

Operator Operator::operator*(cplx s) const {
  const bool real = s.imag() == 0.0;
  return Operator(m_ * s, (real && kind_ == OperatorKind::hamiltonian) ? kind_ : OperatorKind::generic);
}

Operator pauli(PauliAxis axis) {
  const cplx i{0.0, 1.0};
  Matrix m = Matrix::Zero(2, 2);
  switch (axis) {
    case PauliAxis::x:
      m(0, 1) = 1.0;
      m(1, 0) = 1.0;
      return Operator(m, OperatorKind::hamiltonian);
    case PauliAxis::y:
      m(0, 1) = -i;
      m(1, 0) = i;
      return Operator(m, OperatorKind::hamiltonian);
    case PauliAxis::z:
      m(0, 0) = 1.0;
      m(1, 1) = -1.0;
      return Operator(m, OperatorKind::hamiltonian);
    case PauliAxis::plus:
      m(0, 1) = 1.0;
      return Operator(m);
    case PauliAxis::minus:
      m(1, 0) = 1.0;
      return Operator(m);
  }
  throw std::invalid_argument("pauli: unknown axis");
}

Operator tensor(const Operator& a, const Operator& b) {
  const int da = a.dim();
  const int db = b.dim();
  if (da * db > 4) throw std::invalid_argument("tensor: result exceeds 4x4");
  Matrix m(da * db, da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j) m.block(i * db, j * db, db, db) = a(i, j) * b.matrix();
  return Operator(m, combined(a.kind(), b.kind()));
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Operator propagator(const Operator& h, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("propagator: dt must be positive");
  const Matrix& m = h.matrix();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (h.hermiticity_error() > kHamiltonianHermiticityTol * scale) {
    throw InvariantViolation("propagator: input is not Hermitian");
  }
  const cplx i{0.0, 1.0};
  if (h.dim() == 2) {
    // H = h0 I + h.sigma has eigenvalues h0 +- |h|.
    const double h0 = 0.5 * (m(0, 0).real() + m(1, 1).real());
    const double hz = 0.5 * (m(0, 0).real() - m(1, 1).real());
    const double hx = m(1, 0).real();
    const double hy = m(1, 0).imag();
    const double norm = std::sqrt(hx * hx + hy * hy + hz * hz);
    const double c = std::cos(norm * dt);
    // sin(|h| dt) / |h|, continuous at |h| = 0.
    const double s = norm > 0.0 ? std::sin(norm * dt) / norm : dt;
    const cplx phase = std::exp(-i * (h0 * dt));
    Matrix u(2, 2);
    u(0, 0) = phase * (c - i * s * hz);
    u(1, 1) = phase * (c + i * s * hz);
    u(0, 1) = phase * (-i * s * cplx(hx, -hy));
    u(1, 0) = phase * (-i * s * cplx(hx, hy));
    return Operator(u, OperatorKind::propagator);
  }
  const Matrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(herm);
  if (solver.info() != Eigen::Success) throw InvariantViolation("propagator: eigensolver failed");
  const auto& vals = solver.eigenvalues();
  const Matrix& vecs = solver.eigenvectors();
  Matrix diag = Matrix::Zero(h.dim(), h.dim());
  for (int k = 0; k < h.dim(); ++k) diag(k, k) = std::exp(-i * (vals(k) * dt));
  return Operator(vecs * diag * vecs.adjoint(), OperatorKind::propagator);
}

}  // namespace ccd
