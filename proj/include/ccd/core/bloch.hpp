#pragma once

#include <array>

namespace ccd {

using Bloch = std::array<double, 3>;

}  // namespace ccd
