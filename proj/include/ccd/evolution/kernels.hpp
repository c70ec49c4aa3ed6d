#pragma once

// Batched single-qubit Bloch propagation. Lanes are independent noise
// realizations that share the same time grid, so every step is
//
//   r <- E_post * Rot(2 dt h) * E_pre * r,   h = h0 + sum_c delta_c h_c
//
// with h0, h_c and the damping transfers E shared by all lanes. With the
// fourth-order Magnus option the field is sampled at the two Gauss points,
// h = (h1 + h2)/2 - (sqrt(3)/6) dt h1 x h2. Three
// interchangeable kernels exist: a density-matrix reference, a portable
// scalar loop, and an AVX2 variant selected at run time.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "ccd/evolution/mat3.hpp"

namespace ccd::evolution {

inline constexpr int kMaxSlots = 5;

struct StepCoefficients {
  double dt = 0.0;
  std::array<double, 3> h0{};
  int slots = 0;  ///< active noise channels
  std::array<std::array<double, 3>, kMaxSlots> hc{};
  /// Second Gauss-point field, used when magnus is set.
  bool magnus = false;
  std::array<double, 3> h0b{};
  std::array<std::array<double, 3>, kMaxSlots> hcb{};
  Mat3 pre = mat3_identity();
  Mat3 post = mat3_identity();
  bool damping = false;
};

/// Structure-of-arrays lane storage. noise[slot * lanes + lane] holds the
/// current value of the noise channel bound to `slot`.
struct BlochBatch {
  std::size_t lanes = 0;
  std::vector<double> x, y, z;
  std::vector<double> noise;

  explicit BlochBatch(std::size_t n = 0, int slots = 0);
  Bloch lane(std::size_t i) const { return {x[i], y[i], z[i]}; }
  void set_lane(std::size_t i, const Bloch& r);
};

enum class KernelKind { automatic, reference, portable, avx2 };

std::string to_string(KernelKind k);
KernelKind parse_kernel(const std::string& s);

bool avx2_available();
/// automatic resolves to avx2 when the CPU supports it, else portable.
KernelKind resolve_kernel(KernelKind k);

/// Rotation parameters C = cos(th), S = sin(th)/th, V = (1 - cos(th))/th^2 as
/// functions of u = th^2, by truncated Taylor series (valid for u <= 1).
struct RotationSeries {
  double c, s, v;
};
RotationSeries rotation_series(double u);

void step_reference(BlochBatch& b, const StepCoefficients& c);
void step_portable(BlochBatch& b, const StepCoefficients& c);
void step_avx2(BlochBatch& b, const StepCoefficients& c);
void step_batch(KernelKind k, BlochBatch& b, const StepCoefficients& c);

/// Exact Bloch rotation (with trig) used for the shared reference frame and
/// for out-of-range lanes.
Bloch rotate_exact(const Bloch& r, const std::array<double, 3>& h, double dt);
Mat3 rotation_matrix(const std::array<double, 3>& h, double dt);

/// Gauss nodes t + (1/2 -+ sqrt(3)/6) dt of the fourth-order Magnus step.
inline constexpr double kGauss1 = 0.21132486540518711775;
inline constexpr double kGauss2 = 0.78867513459481288225;
/// sqrt(3)/6
inline constexpr double kMagnusCross = 0.28867513459481288225;

/// Effective field of one Magnus step from the Gauss-point fields.
std::array<double, 3> magnus_field(const std::array<double, 3>& h1, const std::array<double, 3>& h2, double dt);

}  // namespace ccd::evolution
