#include <random>

#include "ccd/core/dipolar.hpp"
#include "ccd/core/operator.hpp"
#include "ccd/core/state.hpp"
#include "doctest.h"

using namespace ccd;

namespace {

Matrix random_hermitian(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = cplx(g(rng), g(rng));
  return Matrix(0.5 * (a + a.adjoint()));
}

// exp(-i h dt) by Taylor series at dt / 2^k, squared k times.
Matrix expm_oracle(const Matrix& h, double dt) {
  const int dim = static_cast<int>(h.rows());
  const Matrix a0 = cplx(0.0, -dt) * h;
  int k = 0;
  double norm = a0.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.5) {
    norm *= 0.5;
    ++k;
  }
  const Matrix a = a0 / std::ldexp(1.0, k);
  Matrix sum = Matrix::Identity(dim, dim);
  Matrix term = Matrix::Identity(dim, dim);
  for (int n = 1; n < 40; ++n) {
    term = Matrix(term * a / static_cast<double>(n));
    sum += term;
  }
  for (int i = 0; i < k; ++i) sum = Matrix(sum * sum);
  return sum;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix spin1_sz_restricted() {
  // Spin-1 Sz = diag(+1, 0, -1) on (ms=+1, 0, -1); keep {ms=-1, ms=0} in the
  // qubit order |up> = ms=-1, |down> = ms=0.
  Eigen::Matrix3d sz = Eigen::Vector3d(1.0, 0.0, -1.0).asDiagonal();
  Matrix q(2, 2);
  q << sz(2, 2), sz(2, 1), sz(1, 2), sz(1, 1);
  return q;
}

}  // namespace

TEST_CASE("pauli algebra") {
  const Operator x = pauli(PauliAxis::x), y = pauli(PauliAxis::y), z = pauli(PauliAxis::z);
  CHECK(x(0, 1) == cplx(1, 0));
  CHECK(x(1, 0) == cplx(1, 0));
  CHECK(x(0, 0) == cplx(0, 0));
  CHECK((y * y).distance(Operator::identity(2)) < 1e-15);
  CHECK((x * y - y * x).distance(cplx(0, 2) * z) < 1e-15);
  // sigma+ = |up><down|
  CHECK(pauli(PauliAxis::plus)(0, 1) == cplx(1, 0));
  CHECK(pauli(PauliAxis::minus)(1, 0) == cplx(1, 0));
}

TEST_CASE("tensor products") {
  const Operator i2 = Operator::identity(2);
  CHECK(tensor(i2, i2).distance(Operator::identity(4)) < 1e-15);
  const Vector ud = kron(ket_up(), ket_down());
  const Vector out = tensor(pauli(PauliAxis::z), i2).matrix() * ud;
  CHECK((out - ud).norm() < 1e-15);
  std::mt19937_64 rng(3);
  const Operator a(random_hermitian(2, rng)), b(random_hermitian(2, rng));
  CHECK(std::abs(tensor(a, b).trace() - a.trace() * b.trace()) < 1e-12);
}

TEST_CASE("propagator") {
  CHECK(propagator(Operator::zero(2).as_hamiltonian(), 0.3).distance(Operator::identity(2)) < 1e-15);

  const double w = 2.0;
  const Operator u = propagator(Operator(0.5 * w * pauli(PauliAxis::x).matrix()).as_hamiltonian(), M_PI / w);
  CHECK(u.distance(cplx(0, -1) * pauli(PauliAxis::x)) < 1e-12);
  const QuantumState flipped = QuantumState::pure(u.matrix() * ket_up());
  CHECK(std::abs(flipped.rho()(1, 1).real() - 1.0) < 1e-12);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix h = random_hermitian(4, rng);
    const double dt = 0.1 + 0.2 * trial;
    const Operator p = propagator(Operator(h).as_hamiltonian(), dt);
    CHECK(max_abs(p.matrix() - expm_oracle(h, dt)) < 1e-10);
    CHECK(p.unitarity_error() < 1e-10);
    const Operator p1 = propagator(Operator(h).as_hamiltonian(), 0.37 * dt);
    const Operator p2 = propagator(Operator(h).as_hamiltonian(), 0.63 * dt);
    CHECK((p1 * p2).distance(p) < 1e-9);
  }
  CHECK_THROWS_AS(propagator(Operator(random_hermitian(2, rng)).as_hamiltonian(), 0.0), std::invalid_argument);
  Matrix nh = Matrix::Zero(2, 2);
  nh(0, 1) = 1.0;
  CHECK_THROWS_AS(propagator(Operator(nh), 1.0), InvariantViolation);
}

TEST_CASE("hamiltonian tag rejects non-hermitian input") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = cplx(0.0, 1e-11);
  CHECK_THROWS_AS(Operator(m).as_hamiltonian(), InvariantViolation);
}

TEST_CASE("dipolar projection equals restricted spin-1 interaction modulo identity") {
  CHECK(project_dipolar_to_qubit(0.0).distance(Operator::zero(4)) < 1e-15);
  const Matrix sz = spin1_sz_restricted();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double j = u(rng);
    const Operator h = project_dipolar_to_qubit(j);
    CHECK(h.hermiticity_error() < 1e-15);
    Matrix ref(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) ref(i, k) = 2.0 * j * sz(i / 2, k / 2) * sz(i % 2, k % 2);
    const Matrix diff = h.matrix() - ref;
    const cplx shift = diff(0, 0);
    CHECK(max_abs(diff - shift * Matrix(Matrix::Identity(4, 4))) < 1e-12);
    CHECK(std::abs(h(0, 0) - cplx(1.5 * j, 0)) < 1e-12);
    const Operator zz = tensor(pauli(PauliAxis::z), pauli(PauliAxis::z));
    CHECK(commutator(h, zz).distance(Operator::zero(4)) < 1e-15);
  }
}

TEST_CASE("quantum state invariants") {
  const QuantumState s = QuantumState::from_bloch({0.3, -0.2, 0.5});
  const Bloch b = s.bloch();
  CHECK(b[0] == doctest::Approx(0.3));
  CHECK(b[1] == doctest::Approx(-0.2));
  CHECK(b[2] == doctest::Approx(0.5));
  CHECK(QuantumState::pure(ket_down()).is_pure());
  CHECK(QuantumState::maximally_mixed(4).purity() == doctest::Approx(0.25));
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = 1.1;
  bad(1, 1) = -0.1;
  CHECK_THROWS_AS(QuantumState{bad}, InvariantViolation);
  Matrix tr = Matrix::Zero(2, 2);
  tr(0, 0) = 0.5;
  CHECK_THROWS_AS(QuantumState{tr}, InvariantViolation);
  CHECK(state_fidelity(QuantumState::pure(ket_up()), QuantumState::pure(ket_down())) == doctest::Approx(0.0));
  CHECK(state_fidelity(s, s) == doctest::Approx(1.0));
}
