#include "ccd/drives/scheme.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ccd/core/units.hpp"

namespace ccd::drives {

std::string to_string(Variant v) { return v == Variant::refined ? "refined" : "simplified"; }

std::string to_string(FrameLabel f) {
  switch (f) {
    case FrameLabel::lab: return "lab";
    case FrameLabel::interaction1: return "int1";
    case FrameLabel::interaction2: return "int2";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "refined") return Variant::refined;
  if (s == "simplified") return Variant::simplified;
  throw std::invalid_argument("unknown variant '" + s + "' (expected refined|simplified)");
}

FrameLabel parse_frame(const std::string& s) {
  if (s == "lab") return FrameLabel::lab;
  if (s == "int1") return FrameLabel::interaction1;
  if (s == "int2") return FrameLabel::interaction2;
  throw std::invalid_argument("unknown frame '" + s + "' (expected lab|int1|int2)");
}

double SchemeConfig::omega(int k) const {
  if (k < 1 || k > order()) throw std::out_of_range("SchemeConfig::omega: no drive of order " + std::to_string(k));
  return angular_from_mhz(drives[k - 1].amplitude_mhz);
}

double SchemeConfig::carrier() const { return angular_from_mhz(carrier_mhz); }

std::vector<std::string> SchemeConfig::validate() const {
  std::vector<std::string> warnings;
  if (!(carrier_mhz > 0.0)) throw std::invalid_argument("carrier frequency must be > 0");
  if (order() > kMaxOrder) throw std::invalid_argument("at most 4 drive orders are supported");
  magnetic.validate();
  for (int i = 0; i < order(); ++i) {
    const DriveSpec& d = drives[i];
    if (d.order != i + 1) throw std::invalid_argument("drive orders must be contiguous starting at 1");
    if (!(d.amplitude_mhz >= 0.0)) throw std::invalid_argument("drive amplitude must be >= 0");
    if (d.variant == Variant::simplified && d.order != 2)
      throw std::invalid_argument("the simplified variant is only defined for order 2");
    d.noise.validate();
  }
  if (order() >= 1 && drives[0].amplitude_mhz > carrier_mhz / 20.0) {
    std::ostringstream os;
    os << "RWA margin: W1/w = " << drives[0].amplitude_mhz / carrier_mhz << " > 1/20";
    warnings.push_back(os.str());
  }
  for (int i = 1; i < order(); ++i) {
    const double prev = drives[i - 1].amplitude_mhz;
    const double cur = drives[i].amplitude_mhz;
    if (cur >= prev && cur > 0.0) {
      warnings.push_back("drive hierarchy not decreasing at order " + std::to_string(i + 1));
    } else if (prev > 0.0 && cur / prev > 0.2) {
      std::ostringstream os;
      os << "RWA margin: W" << i + 1 << "/W" << i << " = " << cur / prev << " > 1/5";
      warnings.push_back(os.str());
    }
  }
  if (rf.amplitude_mhz < 0.0) throw std::invalid_argument("rf amplitude must be >= 0");
  return warnings;
}

SchemeConfig make_ladder(double omega1_mhz, double ratio, int order, const noise::OUParams& drive_noise,
                         const noise::OUParams& magnetic) {
  SchemeConfig s;
  s.magnetic = magnetic;
  double amp = omega1_mhz;
  for (int k = 1; k <= order; ++k) {
    DriveSpec d;
    d.order = k;
    d.amplitude_mhz = amp;
    d.noise = drive_noise;
    s.drives.push_back(d);
    amp *= ratio;
  }
  return s;
}

}  // namespace ccd::drives
