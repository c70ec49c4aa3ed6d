#pragma once

#include "ccd/core/operator.hpp"

namespace ccd {

/// Secular dipolar coupling projected onto the {ms=-1, ms=0} qubit pair of
/// two spin-1 centres: (J/2)(sz sz + sz I + I sz), J in rad/us.
Operator project_dipolar_to_qubit(double j_angular);

}  // namespace ccd
