#include "ccd/core/pauli_transfer.hpp"

#include <array>
#include <stdexcept>

namespace ccd {
namespace {

Operator single(int m) {
  switch (m) {
    case 0: return Operator::identity(2);
    case 1: return pauli(PauliAxis::x);
    case 2: return pauli(PauliAxis::y);
    case 3: return pauli(PauliAxis::z);
  }
  throw std::invalid_argument("pauli index must be 0..3");
}

const std::array<Operator, 16>& basis() {
  static const std::array<Operator, 16> b = [] {
    std::array<Operator, 16> out;
    for (int i = 0; i < 16; ++i) out[i] = tensor(single(i / 4), single(i % 4));
    return out;
  }();
  return b;
}

}  // namespace

Operator pauli_pair(int mu, int nu) { return tensor(single(mu), single(nu)); }

const Operator& pauli_basis(int i) {
  if (i < 0 || i >= 16) throw std::invalid_argument("pauli_basis: index 0..15");
  return basis()[i];
}

PauliTransfer transfer_of_unitary(const Operator& u) {
  if (u.dim() != 4) throw std::invalid_argument("transfer_of_unitary: 4x4 only");
  const Matrix& um = u.matrix();
  const Matrix ud = um.adjoint();
  PauliTransfer r;
  for (int j = 0; j < 16; ++j) {
    const Matrix c = um * basis()[j].matrix() * ud;
    for (int i = 0; i < 16; ++i) r(i, j) = 0.25 * (basis()[i].matrix() * c).trace().real();
  }
  return r;
}

PauliTransfer transfer_kron(const Eigen::Matrix4d& a, const Eigen::Matrix4d& b) {
  PauliTransfer r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
  return r;
}

PauliTransfer transfer_of_qubit(int qubit, const std::array<double, 9>& m) {
  Eigen::Matrix4d q = Eigen::Matrix4d::Identity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q(i + 1, j + 1) = m[3 * i + j];
  const Eigen::Matrix4d id = Eigen::Matrix4d::Identity();
  return qubit == 0 ? transfer_kron(q, id) : transfer_kron(id, q);
}

Matrix transfer_output(const PauliTransfer& r, int j) {
  Matrix out = Matrix::Zero(4, 4);
  for (int i = 0; i < 16; ++i)
    if (r(i, j) != 0.0) out += r(i, j) * basis()[i].matrix();
  return out;
}

}  // namespace ccd
