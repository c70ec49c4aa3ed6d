#include "ccd/core/state.hpp"
#include "ccd/evolution/kernels.hpp"
#include "ccd/evolution/lindblad.hpp"

namespace ccd::evolution {

// Density-matrix path: every lane is rebuilt as a validated QuantumState and
// propagated with the closed-form 2x2 propagator. The Magnus generator is
// formed from matrix commutators here, independently of the Bloch formula.
void step_reference(BlochBatch& b, const StepCoefficients& c) {
  const std::size_t n = b.lanes;
  const Operator px = pauli(PauliAxis::x), py = pauli(PauliAxis::y), pz = pauli(PauliAxis::z);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix rho = QuantumState::from_bloch(b.lane(i)).rho();
    if (c.damping) apply_qubit_transfer(rho, 1, 0, c.pre);
    std::array<double, 3> h = c.h0, h2 = c.h0b;
    for (int s = 0; s < c.slots; ++s) {
      const double d = b.noise[static_cast<std::size_t>(s) * n + i];
      for (int k = 0; k < 3; ++k) {
        h[k] += d * c.hc[s][k];
        h2[k] += d * c.hcb[s][k];
      }
    }
    Operator hop = (px * cplx(h[0]) + py * cplx(h[1]) + pz * cplx(h[2])).as_hamiltonian();
    if (c.magnus) {
      // exp(Omega), Omega = -i dt (H1 + H2)/2 + (sqrt(3)/12) dt^2 [H1, H2] = -i dt Heff
      const Operator hb = px * cplx(h2[0]) + py * cplx(h2[1]) + pz * cplx(h2[2]);
      const Operator comm = commutator(hop, hb);
      hop = ((hop + hb) * cplx(0.5) + comm * cplx(0.0, 0.5 * kMagnusCross * c.dt)).as_hamiltonian();
    }
    const Matrix u = propagator(hop, c.dt).matrix();
    rho = u * rho * u.adjoint();
    if (c.damping) apply_qubit_transfer(rho, 1, 0, c.post);
    b.set_lane(i, QuantumState(rho).bloch());
  }
}

}  // namespace ccd::evolution
