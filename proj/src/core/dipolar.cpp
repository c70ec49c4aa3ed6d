#include "ccd/core/dipolar.hpp"

namespace ccd {

Operator project_dipolar_to_qubit(double j_angular) {
  const Operator z = pauli(PauliAxis::z);
  const Operator id = Operator::identity(2);
  const Operator h = tensor(z, z) + tensor(z, id) + tensor(id, z);
  return (h * cplx(0.5 * j_angular)).as_hamiltonian();
}

}  // namespace ccd
