#pragma once

// Two-qubit Pauli transfer matrices. Index i = 4 mu + nu labels
// sigma_mu (x) sigma_nu with 0 = I, 1 = x, 2 = y, 3 = z, and
//
//   R_ij = tr(P_i M(P_j)) / 4,   M(P_j) = sum_i R_ij P_i.

#include <array>

#include <Eigen/Dense>

#include "ccd/core/operator.hpp"

namespace ccd {

using PauliTransfer = Eigen::Matrix<double, 16, 16>;

/// sigma_mu (x) sigma_nu.
Operator pauli_pair(int mu, int nu);
const Operator& pauli_basis(int i);

/// Transfer matrix of X -> U X U^dagger.
PauliTransfer transfer_of_unitary(const Operator& u);
/// Transfer matrix of a single-qubit Bloch map m (row-major 3x3, identity
/// component kept) on qubit q, tensored with the identity on the other qubit.
PauliTransfer transfer_of_qubit(int qubit, const std::array<double, 9>& m);
/// Kronecker product of two single-qubit 4x4 transfer blocks.
PauliTransfer transfer_kron(const Eigen::Matrix4d& a, const Eigen::Matrix4d& b);

/// M(P_j) as a matrix.
Matrix transfer_output(const PauliTransfer& r, int j);

}  // namespace ccd
