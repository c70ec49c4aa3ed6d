#pragma once

#include <string>
#include <vector>

#include "ccd/noise/ou.hpp"

namespace ccd::drives {

enum class Variant { refined, simplified };

/// Simulation / observation frames. interaction1 removes the carrier with
/// H0 = (w/2) sz; interaction2 additionally removes the first drive with
/// H0 = (W1/2) sx.
enum class FrameLabel : int { lab = 0, interaction1 = 1, interaction2 = 2 };

std::string to_string(Variant v);
std::string to_string(FrameLabel f);
Variant parse_variant(const std::string& s);
/// Accepts "lab", "int1", "int2".
FrameLabel parse_frame(const std::string& s);

/// Noise channel layout: drive k uses channel k-1, the magnetic field uses
/// channel 4; a second qubit is offset by kChannelsPerQubit.
inline constexpr int kMaxOrder = 4;
inline constexpr int kMagneticChannel = 4;
inline constexpr int kChannelsPerQubit = 5;
constexpr int drive_channel(int order, int qubit = 0) { return qubit * kChannelsPerQubit + order - 1; }
constexpr int magnetic_channel(int qubit = 0) { return qubit * kChannelsPerQubit + kMagneticChannel; }

struct DriveSpec {
  int order = 1;
  double amplitude_mhz = 0.0;
  /// Only used by the simplified second-order field.
  double phase = 0.0;
  Variant variant = Variant::refined;
  /// Relative amplitude noise delta_k (sigma dimensionless, tau in us).
  noise::OUParams noise;
};

/// Radio-frequency control W prod_k cos(W_k t + phi_k) sz.
struct RfControl {
  double amplitude_mhz = 0.0;
  /// phases[k-1] belongs to drive k; missing entries are 0.
  std::vector<double> phases;
};

struct SchemeConfig {
  double carrier_mhz = 2042.0;
  std::vector<DriveSpec> drives;
  /// Magnetic noise delta_b with sigma in rad/us.
  noise::OUParams magnetic;
  FrameLabel frame = FrameLabel::interaction1;
  RfControl rf;

  int order() const { return static_cast<int>(drives.size()); }
  /// Angular amplitude of drive k (1-based), rad/us.
  double omega(int k) const;
  double carrier() const;

  /// Throws std::invalid_argument on structural errors (non-contiguous
  /// orders, simplified variant away from k = 2, order > 4, negative
  /// amplitudes, invalid noise); returns warnings for soft RWA-margin
  /// violations (ratio > 1/5, W1/w > 1/20, non-decreasing hierarchy).
  std::vector<std::string> validate() const;
};

/// Refined ladder W_k = W_1 * ratio^(k-1), all drives sharing one noise model.
SchemeConfig make_ladder(double omega1_mhz, double ratio, int order, const noise::OUParams& drive_noise,
                         const noise::OUParams& magnetic);

}  // namespace ccd::drives
