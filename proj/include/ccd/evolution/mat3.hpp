#pragma once

// Kept free of Eigen so the AVX2 translation unit does not instantiate
// Eigen templates with a different instruction set.

#include <array>

#include "ccd/core/bloch.hpp"

namespace ccd::evolution {

/// Row-major 3x3 real matrix acting on Bloch vectors.
using Mat3 = std::array<double, 9>;

Mat3 mat3_identity();
Mat3 mat3_multiply(const Mat3& a, const Mat3& b);
Bloch mat3_apply(const Mat3& m, const Bloch& r);
Mat3 mat3_transpose(const Mat3& m);

}  // namespace ccd::evolution
