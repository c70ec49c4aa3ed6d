#pragma once

// Master equation with high-temperature relaxation through sigma+ and
// sigma- on every qubit:
//
//   drho/dt = -i[H, rho] + (G/2) sum_{a = s+, s-} (2 a^+ rho a - rho a a^+ - a a^+ rho)
//
// Summed over both channels this is the conventional a rho a^+ form, and for
// one qubit the Bloch components decay at (G, G, 2G) along (x, y, z). G is
// calibrated as 1/(2 T1) so that <sz> decays as exp(-t/T1).

#include <array>
#include <functional>

#include "ccd/core/operator.hpp"
#include "ccd/core/state.hpp"
#include "ccd/drives/scheme.hpp"
#include "ccd/evolution/mat3.hpp"

namespace ccd::evolution {

struct LindbladConfig {
  double gamma = 0.0;  ///< 1/us
  int nqubits = 1;

  static LindbladConfig from_t1(double t1_us, int nqubits = 1);
  /// Infinite for gamma = 0.
  double t1() const;
};

/// Right-hand side with the dissipator exactly as printed (a^+ rho a ordering).
Matrix lindblad_rhs(const Matrix& rho, const Operator& h, const LindbladConfig& lb);
Matrix lindblad_rhs(const QuantumState& rho, const Operator& h, const LindbladConfig& lb);
/// Same master equation written with a rho a^+ (regression comparison only).
Matrix lindblad_rhs_conventional(const Matrix& rho, const Operator& h, const LindbladConfig& lb);

/// Exact solution of the dissipative part over a short interval, expressed
/// for the simulation frame. In the lab and first frame the map is diagonal
/// in Bloch space; in the second frame the y/z rates rotate with the first
/// drive, so the rate matrix is evaluated at the interval midpoint.
class Dissipator {
 public:
  Dissipator() = default;
  /// frame_rates[q] is the first-drive angular amplitude of qubit q (used in
  /// the second frame only).
  Dissipator(const LindbladConfig& lb, drives::FrameLabel frame, std::array<double, 2> frame_rates = {0.0, 0.0});

  bool active() const { return lb_.gamma > 0.0; }
  const LindbladConfig& config() const { return lb_; }

  /// Bloch transfer of qubit q for an interval of length `duration` centred at t_mid.
  Mat3 transfer(int qubit, double t_mid, double duration) const;

  /// Apply to a density matrix or any operator (2x2 or 4x4).
  void apply(Matrix& x, double t_mid, double duration) const;

 private:
  LindbladConfig lb_;
  drives::FrameLabel frame_ = drives::FrameLabel::interaction1;
  std::array<double, 2> rates_{0.0, 0.0};
};

/// Apply a real Bloch transfer to one qubit of a 2x2 or 4x4 operator,
/// leaving identity components untouched.
void apply_qubit_transfer(Matrix& x, int nqubits, int qubit, const Mat3& m);

/// Strang step: half dissipation, exact propagator of h_mid over dt, half dissipation.
/// Works for density matrices and general operators alike.
Matrix strang_step(const Matrix& x, const Operator& h_mid, double t, double dt, const Dissipator& d);

/// State-level step with invariant validation of the output.
QuantumState step(const QuantumState& rho, const Operator& h_mid, double t, double dt, const Dissipator& d);

/// Classical RK4 on lindblad_rhs (lab / first frame reference path).
QuantumState rk4_step(const QuantumState& rho, const std::function<Operator(double)>& h, double t, double dt,
                      const LindbladConfig& lb);

}  // namespace ccd::evolution
