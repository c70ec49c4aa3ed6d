#include "ccd/drives/terms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ccd::drives {
namespace {

Operator axis_operator(int axis) {
  switch (axis) {
    case 0: return Operator::identity(2);
    case 1: return pauli(PauliAxis::x);
    case 2: return pauli(PauliAxis::y);
    case 3: return pauli(PauliAxis::z);
  }
  throw std::invalid_argument("pauli axis out of range");
}

// epsilon_{n m k} for axes 1..3.
int levi_civita(int n, int m, int k) {
  if (n == m || m == k || n == k) return 0;
  const bool even = (n == 1 && m == 2 && k == 3) || (n == 2 && m == 3 && k == 1) || (n == 3 && m == 1 && k == 2);
  return even ? 1 : -1;
}

// Re[A e^{i a t}] Re[B e^{i b t}] = (1/2) Re[A B e^{i(a+b)t}] + (1/2) Re[A B* e^{i(a-b)t}].
void push_product(std::vector<HarmonicTerm>& out, const HarmonicTerm& t, double nu, cplx q, PauliString op) {
  for (HarmonicTerm h : {HarmonicTerm{op, t.nu + nu, 0.5 * t.phasor * q, t.channel},
                         HarmonicTerm{op, t.nu - nu, 0.5 * t.phasor * std::conj(q), t.channel}}) {
    // cancellation residue of equal frequencies is a static term
    if (std::abs(h.nu) <= 1e-9 * std::max(std::abs(t.nu), std::abs(nu))) h.nu = 0.0;
    if (h.nu < 0.0) {
      h.nu = -h.nu;
      h.phasor = std::conj(h.phasor);
    }
    out.push_back(h);
  }
}

}  // namespace

double HarmonicTerm::envelope(double t) const {
  if (nu == 0.0) return phasor.real();
  return phasor.real() * std::cos(nu * t) - phasor.imag() * std::sin(nu * t);
}

Operator pauli_string(PauliString s, int nqubits) {
  if (nqubits == 1) return axis_operator(s.a);
  return tensor(axis_operator(s.a), axis_operator(s.b));
}

TermSet::TermSet(int nqubits) : nqubits_(nqubits) {
  if (nqubits != 1 && nqubits != 2) throw std::invalid_argument("TermSet: 1 or 2 qubits");
}

void TermSet::add(PauliString op, double nu, cplx phasor, int channel) {
  if (nu < 0.0) {
    nu = -nu;
    phasor = std::conj(phasor);
  }
  if (nqubits_ == 1 && op.b != 0) throw std::invalid_argument("TermSet: qubit b used in single-qubit set");
  terms_.push_back({op, nu, phasor, channel});
}

TermSet& TermSet::operator+=(const TermSet& other) {
  if (other.nqubits_ != nqubits_) throw std::invalid_argument("TermSet: qubit count mismatch");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  return *this;
}

TermSet TermSet::times_cos(double nu, double phase) const {
  TermSet out(nqubits_);
  const cplx q = std::polar(1.0, phase);
  for (const auto& t : terms_) push_product(out.terms_, t, nu, q, t.op);
  out.simplify();
  return out;
}

TermSet TermSet::scaled(double s) const {
  TermSet out = *this;
  for (auto& t : out.terms_) t.phasor *= s;
  return out;
}

TermSet TermSet::rotated(int qubit, int axis, double rate) const {
  if (qubit < 0 || qubit >= nqubits_) throw std::invalid_argument("TermSet::rotated: bad qubit");
  if (axis < 1 || axis > 3) throw std::invalid_argument("TermSet::rotated: bad axis");
  TermSet out(nqubits_);
  for (const auto& t : terms_) {
    const int m = qubit == 0 ? t.op.a : t.op.b;
    if (m == 0 || m == axis) {
      out.terms_.push_back(t);
      continue;
    }
    const int k = 6 - axis - m;
    PauliString rot = t.op;
    (qubit == 0 ? rot.a : rot.b) = static_cast<std::uint8_t>(k);
    // sigma_m -> cos(theta) sigma_m - sin(theta) eps_{axis m k} sigma_k,
    // cos = Re[e^{i theta}], -sin = Re[i e^{i theta}].
    push_product(out.terms_, t, rate, cplx(1.0, 0.0), t.op);
    push_product(out.terms_, t, rate, cplx(0.0, levi_civita(axis, m, k)), rot);
  }
  out.simplify();
  return out;
}

TermSet TermSet::slow(double cutoff) const {
  TermSet out(nqubits_);
  for (const auto& t : terms_)
    if (t.nu < cutoff) out.terms_.push_back(t);
  return out;
}

TermSet TermSet::fast(double cutoff) const {
  TermSet out(nqubits_);
  for (const auto& t : terms_)
    if (t.nu >= cutoff) out.terms_.push_back(t);
  return out;
}

TermSet TermSet::channel(int ch) const {
  TermSet out(nqubits_);
  for (const auto& t : terms_)
    if (t.channel == ch) out.terms_.push_back(t);
  return out;
}

TermSet TermSet::on_channel(int ch) const {
  TermSet out = *this;
  for (auto& t : out.terms_) t.channel = ch;
  return out;
}

void TermSet::simplify(double tol) {
  for (auto& t : terms_)
    if (t.nu == 0.0) t.phasor = cplx(t.phasor.real(), 0.0);
  std::sort(terms_.begin(), terms_.end(), [](const HarmonicTerm& x, const HarmonicTerm& y) {
    if (x.op != y.op) return x.op < y.op;
    if (x.channel != y.channel) return x.channel < y.channel;
    return x.nu < y.nu;
  });
  std::vector<HarmonicTerm> merged;
  for (const auto& t : terms_) {
    if (!merged.empty()) {
      auto& last = merged.back();
      const double scale = std::max({1.0, std::abs(last.nu), std::abs(t.nu)});
      if (last.op == t.op && last.channel == t.channel && std::abs(last.nu - t.nu) <= 1e-9 * scale) {
        last.phasor += t.phasor;
        continue;
      }
    }
    merged.push_back(t);
  }
  double biggest = 0.0;
  for (const auto& t : merged) biggest = std::max(biggest, std::abs(t.phasor));
  std::erase_if(merged, [&](const HarmonicTerm& t) { return std::abs(t.phasor) <= tol * std::max(1.0, biggest); });
  terms_ = std::move(merged);
}

double TermSet::max_frequency() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, t.nu);
  return m;
}

double TermSet::norm_bound(std::span<const double> noise_bound) const {
  double s = 0.0;
  for (const auto& t : terms_) {
    if (t.op == PauliString{}) continue;
    double c = 1.0;
    if (t.channel != kNominal)
      c = static_cast<std::size_t>(t.channel) < noise_bound.size() ? noise_bound[t.channel] : 0.0;
    s += c * std::abs(t.phasor);
  }
  return s;
}

int TermSet::max_channel() const {
  int m = -1;
  for (const auto& t : terms_) m = std::max(m, t.channel);
  return m;
}

Operator TermSet::evaluate(double t, std::span<const double> noise) const {
  const int dim = nqubits_ == 1 ? 2 : 4;
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& term : terms_) {
    double c = 1.0;
    if (term.channel != kNominal) {
      if (static_cast<std::size_t>(term.channel) >= noise.size()) continue;
      c = noise[term.channel];
      if (c == 0.0) continue;
    }
    m += (c * term.envelope(t)) * pauli_string(term.op, nqubits_).matrix();
  }
  return Operator(m).as_hamiltonian();
}

Operator TermSet::kick(double t) const {
  const int dim = nqubits_ == 1 ? 2 : 4;
  Matrix m = Matrix::Zero(dim, dim);
  for (const auto& term : terms_) {
    if (term.channel != kNominal || term.nu == 0.0) continue;
    const HarmonicTerm integral{term.op, term.nu, cplx(0.0, -1.0) * term.phasor / term.nu, kNominal};
    m += integral.envelope(t) * pauli_string(term.op, nqubits_).matrix();
  }
  return Operator(m).as_hamiltonian();
}

TermSet TermSet::integral() const {
  TermSet out(nqubits_);
  for (const auto& t : terms_)
    if (t.nu != 0.0) out.terms_.push_back({t.op, t.nu, cplx(0.0, -1.0) * t.phasor / t.nu, t.channel});
  return out;
}

TermSet i_commutator(const TermSet& k, const TermSet& x) {
  if (k.nqubits() != 1 || x.nqubits() != 1) throw std::invalid_argument("i_commutator: single qubit only");
  std::vector<HarmonicTerm> acc;
  for (const auto& a : k.terms()) {
    if (a.op.a == 0) continue;
    for (const auto& b : x.terms()) {
      if (b.op.a == 0 || b.op.a == a.op.a) continue;
      // products of two noise channels are second order in the noise; dropped
      if (a.channel != kNominal && b.channel != kNominal) continue;
      // i[s_a, s_b] = -2 eps_abc s_c
      const int c = 6 - a.op.a - b.op.a;
      HarmonicTerm lhs = a;
      lhs.phasor *= -2.0 * levi_civita(a.op.a, b.op.a, c);
      lhs.channel = a.channel != kNominal ? a.channel : b.channel;
      push_product(acc, lhs, b.nu, b.phasor, PauliString{static_cast<std::uint8_t>(c), 0});
    }
  }
  TermSet out(1);
  for (const auto& h : acc) out.add(h.op, h.nu, h.phasor, h.channel);
  out.simplify();
  return out;
}

TermSet averaging_correction(const TermSet& slow, const TermSet& fast, double cutoff) {
  // U = exp(iK), K' = fast, expanded to second order in K:
  //   H' = S + C(S) + C(F)/2 + C(C(S))/2 + C(C(F))/3,  C(X) = i[K, X]
  // then one more pass on the fast remainder of H'.
  const TermSet k = fast.integral();
  const TermSet cs = i_commutator(k, slow);
  const TermSet cf = i_commutator(k, fast);
  TermSet first = cs;
  first += cf.scaled(0.5);
  first.simplify();
  TermSet out = first.slow(cutoff);
  out += i_commutator(k, cs).scaled(0.5).slow(cutoff);
  out += i_commutator(k, cf).scaled(1.0 / 3.0).slow(cutoff);
  const TermSet rest = first.fast(cutoff);
  const TermSet k2 = rest.integral();
  out += i_commutator(k2, rest).scaled(0.5).slow(cutoff);
  out += i_commutator(k2, slow).slow(cutoff);
  out.simplify();
  return out;
}

}  // namespace ccd::drives
