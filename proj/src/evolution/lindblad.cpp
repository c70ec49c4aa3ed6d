#include "ccd/evolution/lindblad.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ccd::evolution {

Mat3 mat3_identity() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }

Mat3 mat3_multiply(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[3 * i + j] += a[3 * i + k] * b[3 * k + j];
  return c;
}

Bloch mat3_apply(const Mat3& m, const Bloch& r) {
  return {m[0] * r[0] + m[1] * r[1] + m[2] * r[2], m[3] * r[0] + m[4] * r[1] + m[5] * r[2],
          m[6] * r[0] + m[7] * r[1] + m[8] * r[2]};
}

Mat3 mat3_transpose(const Mat3& m) { return {m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]}; }

LindbladConfig LindbladConfig::from_t1(double t1_us, int nqubits) {
  if (!(t1_us > 0.0)) throw std::invalid_argument("T1 must be > 0");
  LindbladConfig lb;
  lb.gamma = std::isinf(t1_us) ? 0.0 : 1.0 / (2.0 * t1_us);
  lb.nqubits = nqubits;
  return lb;
}

double LindbladConfig::t1() const {
  return gamma > 0.0 ? 1.0 / (2.0 * gamma) : std::numeric_limits<double>::infinity();
}

namespace {

std::vector<Matrix> jump_operators(int nqubits) {
  const Operator id = Operator::identity(2);
  std::vector<Matrix> ops;
  for (PauliAxis ax : {PauliAxis::plus, PauliAxis::minus}) {
    const Operator a = pauli(ax);
    if (nqubits == 1) {
      ops.push_back(a.matrix());
    } else {
      ops.push_back(tensor(a, id).matrix());
      ops.push_back(tensor(id, a).matrix());
    }
  }
  return ops;
}

void check_dims(const Matrix& rho, const Operator& h, const LindbladConfig& lb) {
  const int dim = lb.nqubits == 1 ? 2 : 4;
  if (rho.rows() != dim || h.dim() != dim) throw std::invalid_argument("lindblad_rhs: dimension mismatch");
}

}  // namespace

Matrix lindblad_rhs(const Matrix& rho, const Operator& h, const LindbladConfig& lb) {
  check_dims(rho, h, lb);
  const cplx i{0.0, 1.0};
  Matrix out = -i * (h.matrix() * rho - rho * h.matrix());
  if (lb.gamma == 0.0) return out;
  for (const Matrix& a : jump_operators(lb.nqubits)) {
    const Matrix ad = a.adjoint();
    out += (0.5 * lb.gamma) * (2.0 * ad * rho * a - rho * a * ad - a * ad * rho);
  }
  return out;
}

Matrix lindblad_rhs(const QuantumState& rho, const Operator& h, const LindbladConfig& lb) {
  return lindblad_rhs(rho.rho(), h, lb);
}

Matrix lindblad_rhs_conventional(const Matrix& rho, const Operator& h, const LindbladConfig& lb) {
  check_dims(rho, h, lb);
  const cplx i{0.0, 1.0};
  Matrix out = -i * (h.matrix() * rho - rho * h.matrix());
  if (lb.gamma == 0.0) return out;
  for (const Matrix& a : jump_operators(lb.nqubits)) {
    const Matrix ad = a.adjoint();
    out += (0.5 * lb.gamma) * (2.0 * a * rho * ad - ad * a * rho - rho * ad * a);
  }
  return out;
}

Dissipator::Dissipator(const LindbladConfig& lb, drives::FrameLabel frame, std::array<double, 2> frame_rates)
    : lb_(lb), frame_(frame), rates_(frame_rates) {
  if (lb.nqubits != 1 && lb.nqubits != 2) throw std::invalid_argument("Dissipator: 1 or 2 qubits");
  if (!(lb.gamma >= 0.0)) throw std::invalid_argument("Dissipator: gamma must be >= 0");
}

Mat3 Dissipator::transfer(int qubit, double t_mid, double duration) const {
  const double ex = std::exp(-lb_.gamma * duration);
  const double ez = std::exp(-2.0 * lb_.gamma * duration);
  if (frame_ != drives::FrameLabel::interaction2) return {ex, 0, 0, 0, ex, 0, 0, 0, ez};
  // Frame-2 Bloch axes are the first-frame axes rotated about x by W1 t.
  const double th = rates_[qubit] * t_mid;
  const double c = std::cos(th), s = std::sin(th);
  const double yy = c * c * ex + s * s * ez;
  const double yz = c * s * (ez - ex);
  const double zz = s * s * ex + c * c * ez;
  return {ex, 0, 0, 0, yy, yz, 0, yz, zz};
}

void apply_qubit_transfer(Matrix& x, int nqubits, int qubit, const Mat3& m) {
  const cplx i{0.0, 1.0};
  auto block = [&](int r0, int r1, int c0, int c1) {
    const cplx a = x(r0, c0), b = x(r0, c1), c = x(r1, c0), d = x(r1, c1);
    const cplx id = 0.5 * (a + d);
    const cplx px = 0.5 * (b + c);
    const cplx py = 0.5 * i * (b - c);
    const cplx pz = 0.5 * (a - d);
    const cplx qx = m[0] * px + m[1] * py + m[2] * pz;
    const cplx qy = m[3] * px + m[4] * py + m[5] * pz;
    const cplx qz = m[6] * px + m[7] * py + m[8] * pz;
    x(r0, c0) = id + qz;
    x(r1, c1) = id - qz;
    x(r0, c1) = qx - i * qy;
    x(r1, c0) = qx + i * qy;
  };
  if (nqubits == 1) {
    block(0, 1, 0, 1);
    return;
  }
  for (int u = 0; u < 2; ++u)
    for (int v = 0; v < 2; ++v) {
      if (qubit == 0)
        block(u, 2 + u, v, 2 + v);
      else
        block(2 * u, 2 * u + 1, 2 * v, 2 * v + 1);
    }
}

void Dissipator::apply(Matrix& x, double t_mid, double duration) const {
  if (!active()) return;
  for (int q = 0; q < lb_.nqubits; ++q) apply_qubit_transfer(x, lb_.nqubits, q, transfer(q, t_mid, duration));
}

Matrix strang_step(const Matrix& x, const Operator& h_mid, double t, double dt, const Dissipator& d) {
  Matrix y = x;
  d.apply(y, t + 0.25 * dt, 0.5 * dt);
  const Matrix u = propagator(h_mid, dt).matrix();
  y = u * y * u.adjoint();
  d.apply(y, t + 0.75 * dt, 0.5 * dt);
  return y;
}

QuantumState step(const QuantumState& rho, const Operator& h_mid, double t, double dt, const Dissipator& d) {
  return QuantumState(strang_step(rho.rho(), h_mid, t, dt, d));
}

QuantumState rk4_step(const QuantumState& rho, const std::function<Operator(double)>& h, double t, double dt,
                      const LindbladConfig& lb) {
  const Matrix& r = rho.rho();
  const Operator hm = h(t + 0.5 * dt);
  const Matrix k1 = lindblad_rhs(r, h(t), lb);
  const Matrix k2 = lindblad_rhs(Matrix(r + 0.5 * dt * k1), hm, lb);
  const Matrix k3 = lindblad_rhs(Matrix(r + 0.5 * dt * k2), hm, lb);
  const Matrix k4 = lindblad_rhs(Matrix(r + dt * k3), h(t + dt), lb);
  return QuantumState(Matrix(r + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)));
}

}  // namespace ccd::evolution
