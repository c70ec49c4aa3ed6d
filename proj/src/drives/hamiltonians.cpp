#include "ccd/drives/hamiltonians.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ccd/core/units.hpp"

namespace ccd::drives {
namespace {

constexpr PauliString kX{1, 0};
constexpr PauliString kY{2, 0};
constexpr PauliString kZ{3, 0};

double delta(std::span<const double> noise, int k) {
  return static_cast<std::size_t>(k - 1) < noise.size() ? noise[k - 1] : 0.0;
}

double rf_phase(const SchemeConfig& s, int k) {
  return static_cast<std::size_t>(k - 1) < s.rf.phases.size() ? s.rf.phases[k - 1] : 0.0;
}

Operator sx() { return pauli(PauliAxis::x); }
Operator sy() { return pauli(PauliAxis::y); }
Operator sz() { return pauli(PauliAxis::z); }

// Nested cos(W_j t) modulation indices of drive k: even j for odd k, odd j
// for even k, all below k.
std::vector<int> modulation_orders(int k) {
  std::vector<int> js;
  for (int j = (k % 2 == 1) ? 2 : 1; j < k; j += 2) js.push_back(j);
  return js;
}

// exp(+i h t) for Hermitian h and any real t.
Operator expi(const Operator& h, double t) {
  if (t == 0.0) return Operator::identity(h.dim());
  if (t > 0.0) return propagator((h * cplx(-1.0)).as_hamiltonian(), t);
  return propagator(h, -t);
}

// Lab field of drive k as a term set (nominal amplitudes).
TermSet lab_drive_terms(const SchemeConfig& s, int k) {
  const DriveSpec& d = s.drives[k - 1];
  TermSet ts(1);
  const double w = s.carrier();
  if (d.variant == Variant::simplified) {
    ts.add(kX, 0.0, s.omega(2));
    return ts.times_cos(w + s.omega(1), d.phase);
  }
  const auto js = modulation_orders(k);
  ts.add(kX, 0.0, std::ldexp(s.omega(k), static_cast<int>(js.size())));
  for (int j : js) ts = ts.times_cos(s.omega(j));
  return ts.times_cos(w, k % 2 == 1 ? 0.0 : std::numbers::pi / 2.0);
}

TermSet rf_terms(const SchemeConfig& s) {
  TermSet ts(1);
  if (s.rf.amplitude_mhz == 0.0) return ts;
  ts.add(kZ, 0.0, angular_from_mhz(s.rf.amplitude_mhz));
  for (int k = 1; k <= s.order(); ++k) ts = ts.times_cos(s.omega(k), rf_phase(s, k));
  return ts;
}

TermSet lab_terms(const SchemeConfig& s, const ModelOptions& opt) {
  const int n = opt.max_order > 0 ? std::min(opt.max_order, s.order()) : s.order();
  TermSet ts(1);
  for (int k = 1; k <= n; ++k) {
    const TermSet drive = lab_drive_terms(s, k);
    ts += drive;
    if (opt.include_noise && s.drives[k - 1].noise.sigma > 0.0) ts += drive.on_channel(drive_channel(k));
  }
  if (opt.include_noise && s.magnetic.sigma > 0.0) ts.add(kZ, 0.0, 0.5, kMagneticChannel);
  if (opt.include_rf) ts += rf_terms(s);
  ts.simplify();
  return ts;
}

// Single-axis static coefficient of a term set: returns (axis, value).
std::pair<int, double> static_axis(const TermSet& ts) {
  int axis = 0;
  double value = 0.0;
  for (const auto& t : ts.terms()) {
    if (t.nu != 0.0 || t.channel != kNominal || t.op.a == 0) continue;
    if (axis != 0 && axis != t.op.a)
      throw std::domain_error("static drive term is not along a single Pauli axis");
    axis = t.op.a;
    value += t.phasor.real();
  }
  if (axis == 0) throw std::domain_error("drive has no static term in its own frame");
  return {axis, value};
}

TermSet lift(const TermSet& single, int qubit) {
  TermSet out(2);
  for (const auto& t : single.terms()) {
    PauliString op = qubit == 0 ? PauliString{t.op.a, 0} : PauliString{0, t.op.a};
    int ch = t.channel;
    if (ch != kNominal) ch += qubit * kChannelsPerQubit;
    out.add(op, t.nu, t.phasor, ch);
  }
  return out;
}

}  // namespace

Operator lab_drive_hamiltonian(const SchemeConfig& s, double t, std::span<const double> drive_noise) {
  if (drive_noise.size() != static_cast<std::size_t>(s.order()))
    throw std::invalid_argument("lab_drive_hamiltonian: need one noise value per drive");
  const double w = s.carrier();
  double coeff = 0.0;
  for (int k = 1; k <= s.order(); ++k) {
    const DriveSpec& d = s.drives[k - 1];
    const double amp = s.omega(k) * (1.0 + drive_noise[k - 1]);
    if (d.variant == Variant::simplified) {
      coeff += amp * std::cos((w + s.omega(1)) * t + d.phase);
      continue;
    }
    const auto js = modulation_orders(k);
    double c = std::ldexp(amp, static_cast<int>(js.size()));
    for (int j : js) c *= std::cos(s.omega(j) * t);
    c *= (k % 2 == 1) ? std::cos(w * t) : std::cos(w * t + std::numbers::pi / 2.0);
    coeff += c;
  }
  return (sx() * cplx(coeff)).as_hamiltonian();
}

Operator interaction1_hamiltonian(const SchemeConfig& s, double t, std::span<const double> drive_noise,
                                  double delta_b) {
  Matrix h = (0.5 * delta_b) * sz().matrix();
  for (int k = 1; k <= s.order(); ++k) {
    const DriveSpec& d = s.drives[k - 1];
    const double amp = s.omega(k) * (1.0 + delta(drive_noise, k));
    if (d.variant == Variant::simplified) {
      const double a = s.omega(1) * t + d.phase;
      h += 0.5 * amp * (std::cos(a) * sx().matrix() + std::sin(a) * sy().matrix());
      continue;
    }
    const auto js = modulation_orders(k);
    double c = std::ldexp(amp, static_cast<int>(js.size()) - 1);
    for (int j : js) c *= std::cos(s.omega(j) * t);
    h += c * ((k % 2 == 1) ? sx() : sy()).matrix();
  }
  return Operator(h).as_hamiltonian();
}

Operator effective_hamiltonian_order2(const SchemeConfig& s, double t, std::span<const double> drive_noise) {
  if (s.order() < 2) throw std::invalid_argument("effective_hamiltonian_order2: scheme order must be >= 2");
  Matrix h = (0.5 * s.omega(1) * delta(drive_noise, 1)) * sx().matrix();
  const DriveSpec& d2 = s.drives[1];
  const double a2 = s.omega(2) * (1.0 + delta(drive_noise, 2));
  if (d2.variant == Variant::simplified)
    h += 0.25 * a2 * (std::sin(d2.phase) * sy().matrix() - std::cos(d2.phase) * sz().matrix());
  else
    h += 0.5 * a2 * sy().matrix();
  if (s.order() >= 3) h += s.omega(3) * (1.0 + delta(drive_noise, 3)) * std::cos(s.omega(2) * t) * sx().matrix();
  if (s.order() >= 4) h += s.omega(4) * (1.0 + delta(drive_noise, 4)) * std::cos(s.omega(3) * t) * sy().matrix();
  return Operator(h).as_hamiltonian();
}

Operator rf_control_hamiltonian(const SchemeConfig& s, double t) {
  double c = angular_from_mhz(s.rf.amplitude_mhz);
  for (int k = 1; k <= s.order(); ++k) c *= std::cos(s.omega(k) * t + rf_phase(s, k));
  return (sz() * cplx(c)).as_hamiltonian();
}

Operator rf_control_effective(const SchemeConfig& s, double t) {
  if (s.order() != 2) throw std::invalid_argument("rf_control_effective: defined for second-order schemes");
  const double w = angular_from_mhz(s.rf.amplitude_mhz);
  const Matrix h = 0.5 * s.omega(2) * sy().matrix() + 0.5 * w * std::cos(s.omega(2) * t + rf_phase(s, 2)) * sz().matrix();
  return Operator(h).as_hamiltonian();
}

Operator two_qubit_hamiltonian(const SchemeConfig& a, const SchemeConfig& b, double j_mhz, double t,
                               std::span<const double> noise_a, std::span<const double> noise_b) {
  const Operator id = Operator::identity(2);
  const Operator ha = interaction1_hamiltonian(a, t, noise_a, 0.0);
  const Operator hb = interaction1_hamiltonian(b, t, noise_b, 0.0);
  const double j = angular_from_mhz(j_mhz);
  const Operator coupling = (tensor(sz(), sz()) + tensor(sz(), id) + tensor(id, sz())) * cplx(0.5 * j);
  return (coupling + tensor(ha, id) + tensor(id, hb)).as_hamiltonian();
}

Operator two_qubit_effective(const SchemeConfig& a, const SchemeConfig& b, double j_mhz,
                             std::vector<std::string>* warnings) {
  if (a.order() < 1 || b.order() < 1) throw std::invalid_argument("two_qubit_effective: both qubits need a drive");
  if (warnings && std::abs(a.drives[0].amplitude_mhz - b.drives[0].amplitude_mhz) > 1e-12)
    warnings->push_back("unequal first-order amplitudes: the double-RWA gate generator assumes W1a = W1b");
  const Operator id = Operator::identity(2);
  const double j = angular_from_mhz(j_mhz);
  const double w2a = a.order() >= 2 ? a.omega(2) : 0.0;
  const double w2b = b.order() >= 2 ? b.omega(2) : 0.0;
  const Operator h = (tensor(sy(), sy()) + tensor(sz(), sz())) * cplx(0.25 * j) + tensor(sy(), id) * cplx(0.5 * w2a) +
                     tensor(id, sy()) * cplx(0.5 * w2b);
  return h.as_hamiltonian();
}

Operator frame_generator(FrameLabel level, const SchemeConfig& s, int nqubits) {
  Operator single = Operator::zero(2);
  if (level == FrameLabel::interaction1) single = sz() * cplx(0.5 * s.carrier());
  if (level == FrameLabel::interaction2) single = sx() * cplx(0.5 * s.omega(1));
  if (nqubits == 1) return single.as_hamiltonian();
  const Operator id = Operator::identity(2);
  return (tensor(single, id) + tensor(id, single)).as_hamiltonian();
}

namespace {

// Unitary taking `from` to `to` (one level apart): exp(+i H0 t) going up.
Operator frame_unitary(FrameLabel from, FrameLabel to, double t, const SchemeConfig& s, int nqubits) {
  const int lf = static_cast<int>(from);
  const int lt = static_cast<int>(to);
  if (lf == lt) return Operator::identity(nqubits == 1 ? 2 : 4);
  if (std::abs(lf - lt) != 1) throw std::invalid_argument("transform_frame: frames must differ by one level");
  const FrameLabel upper = lt > lf ? to : from;
  const Operator u = expi(frame_generator(upper, s, nqubits), t);
  return lt > lf ? u : u.adjoint();
}

int qubits_of(int dim) {
  if (dim == 2) return 1;
  if (dim == 4) return 2;
  throw std::invalid_argument("transform_frame: dimension must be 2 or 4");
}

}  // namespace

Operator transform_frame(const Operator& x, FrameLabel from, FrameLabel to, double t, const SchemeConfig& s) {
  const Operator u = frame_unitary(from, to, t, s, qubits_of(x.dim()));
  Operator out = u * x * u.adjoint();
  if (x.kind() == OperatorKind::hamiltonian) return out.as_hamiltonian();
  return out;
}

QuantumState transform_frame(const QuantumState& rho, FrameLabel from, FrameLabel to, double t,
                             const SchemeConfig& s) {
  const Operator u = frame_unitary(from, to, t, s, qubits_of(rho.dim()));
  return QuantumState((u * rho.as_operator() * u.adjoint()).matrix());
}

Vector transform_frame(const Vector& psi, FrameLabel from, FrameLabel to, double t, const SchemeConfig& s) {
  const Operator u = frame_unitary(from, to, t, s, qubits_of(static_cast<int>(psi.size())));
  return u.matrix() * psi;
}

FrameModel frame_model(const SchemeConfig& s, FrameLabel frame, const ModelOptions& opt) {
  FrameModel m;
  m.frame = frame;
  TermSet lab = lab_terms(s, opt);
  if (frame == FrameLabel::lab) {
    if (opt.include_carrier) lab.add(kZ, 0.0, 0.5 * s.carrier());
    lab.simplify();
    m.slow = lab;
    m.rwa_cutoff = std::numeric_limits<double>::infinity();
    return m;
  }
  const double w = s.carrier();
  const TermSet f1 = lab.rotated(0, 3, w);
  m.slow = f1.slow(w);
  m.fast = f1.fast(w);
  m.rwa_cutoff = w;
  if (frame == FrameLabel::interaction1) return m;

  if (s.order() < 1) throw std::invalid_argument("frame 2 needs a first-order drive");
  const double w1 = s.omega(1);
  if (!(w1 > 0.0)) throw std::invalid_argument("frame 2 needs a nonzero first-order drive");
  TermSet f2 = m.slow.rotated(0, 1, w1);
  f2.add(kX, 0.0, -0.5 * w1);
  f2.simplify();
  m.slow = f2.slow(0.5 * w1);
  m.fast = f2.fast(0.5 * w1);
  m.rwa_cutoff = 0.5 * w1;
  m.correction = averaging_correction(m.slow, m.fast, 0.5 * w1);
  return m;
}

FrameModel two_qubit_model(const SchemeConfig& a, const SchemeConfig& b, double j_mhz, FrameLabel frame,
                           const ModelOptions& opt) {
  if (frame == FrameLabel::lab) throw std::invalid_argument("two_qubit_model: lab frame not supported");
  FrameModel m;
  m.frame = frame;
  TermSet f1 = lift(frame_model(a, FrameLabel::interaction1, opt).slow, 0);
  f1 += lift(frame_model(b, FrameLabel::interaction1, opt).slow, 1);
  const double j = angular_from_mhz(j_mhz);
  f1.add({3, 3}, 0.0, 0.5 * j);
  f1.add({3, 0}, 0.0, 0.5 * j);
  f1.add({0, 3}, 0.0, 0.5 * j);
  f1.simplify();
  m.slow = f1;
  m.fast = TermSet(2);
  m.correction = TermSet(2);
  m.rwa_cutoff = std::min(a.carrier(), b.carrier());
  if (frame == FrameLabel::interaction1) return m;

  const double wa = a.omega(1);
  const double wb = b.omega(1);
  TermSet f2 = f1.rotated(0, 1, wa).rotated(1, 1, wb);
  f2.add({1, 0}, 0.0, -0.5 * wa);
  f2.add({0, 1}, 0.0, -0.5 * wb);
  f2.simplify();
  const double cutoff = 0.5 * std::min(wa, wb);
  m.slow = f2.slow(cutoff);
  m.fast = f2.fast(cutoff);
  m.correction = TermSet(2);
  m.rwa_cutoff = cutoff;
  return m;
}

std::vector<Operator> effective_axes(const SchemeConfig& s) {
  ModelOptions nominal;
  nominal.include_noise = false;
  nominal.include_rf = false;
  std::vector<TermSet> pieces;
  for (int k = 1; k <= s.order(); ++k) {
    ModelOptions only = nominal;
    only.max_order = k;
    TermSet below(1);
    if (k > 1) {
      ModelOptions prev = nominal;
      prev.max_order = k - 1;
      below = frame_model(s, FrameLabel::interaction1, prev).slow;
    }
    // Drive k alone: difference of the cumulative models.
    TermSet piece = frame_model(s, FrameLabel::interaction1, only).slow;
    piece += below.scaled(-1.0);
    piece.simplify();
    pieces.push_back(piece);
  }
  std::vector<Operator> axes;
  for (int level = 1; level <= s.order(); ++level) {
    if (level > 1) {
      const auto [axis, value] = static_axis(pieces[level - 2]);
      const double rate = 2.0 * value;
      for (int j = level - 1; j < s.order(); ++j) {
        pieces[j] = pieces[j].rotated(0, axis, rate).slow(0.5 * std::abs(rate));
      }
    }
    Matrix a = Matrix::Zero(2, 2);
    double norm2 = 0.0;
    for (const auto& t : pieces[level - 1].terms()) {
      if (t.nu != 0.0 || t.op.a == 0) continue;
      a += t.phasor.real() * pauli_string(t.op, 1).matrix();
      norm2 += t.phasor.real() * t.phasor.real();
    }
    if (norm2 == 0.0) throw std::domain_error("drive has no static term in its own frame");
    axes.push_back(Operator(a / std::sqrt(norm2)).as_hamiltonian());
  }
  return axes;
}

}  // namespace ccd::drives
