#include "ccd/analysis/fidelity.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace ccd::analysis {

double gate_fidelity(const Operator& ideal, std::span<const ProcessSample> samples) {
  if (ideal.dim() != 4) throw std::invalid_argument("gate_fidelity: two-qubit unitary expected");
  std::array<bool, 16> seen{};
  const Matrix& u = ideal.matrix();
  const Matrix ud = u.adjoint();
  double sum = 0.0;
  for (const auto& s : samples) {
    if (s.mu < 0 || s.mu > 3 || s.nu < 0 || s.nu > 3) throw std::invalid_argument("gate_fidelity: pauli index out of range");
    if (s.mu == 0 && s.nu == 0) throw std::invalid_argument("gate_fidelity: identity input is excluded");
    const int i = 4 * s.mu + s.nu;
    if (seen[i]) throw std::invalid_argument("gate_fidelity: duplicate basis sample");
    seen[i] = true;
    if (s.output.rows() != 4 || s.output.cols() != 4) throw std::invalid_argument("gate_fidelity: 4x4 outputs expected");
    if (std::abs(s.output.trace()) > 1e-6) throw InvariantViolation("gate_fidelity: channel is not trace preserving");
    const Matrix x = pauli_pair(s.mu, s.nu).matrix();
    sum += (u * x * ud * s.output).trace().real();
  }
  for (int i = 1; i < 16; ++i)
    if (!seen[i]) throw std::invalid_argument("gate_fidelity: missing basis sample");
  return (4.0 + sum / 5.0) / 16.0;
}

std::vector<ProcessSample> samples_from_transfer(const PauliTransfer& r) {
  std::vector<ProcessSample> out;
  out.reserve(15);
  for (int j = 1; j < 16; ++j) out.push_back({j / 4, j % 4, transfer_output(r, j)});
  return out;
}

}  // namespace ccd::analysis
