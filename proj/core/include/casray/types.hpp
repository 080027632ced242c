#pragma once

// Shared domain types and unit conventions.
//
// Units: hbar*c == 1.  All three lengths (a, s, h) share one arbitrary unit;
// energies come out in 1/length, forces in 1/length^2.

#include <cmath>
#include <stdexcept>
#include <string>

namespace casray {

inline constexpr double kPi = 3.14159265358979323846;

// zeta(3), fixed high-precision constant
inline constexpr double kZeta3 = 1.2020569031595942854;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Two metal squares of side s, facing each other across a gap a, each a
// distance h from an infinite sidewall above and below.
struct Geometry {
  double a;  // gap between the two squares (> 0)
  double s;  // square side (> 0)
  double h;  // square-to-sidewall gap (>= 0)

  Geometry(double a_, double s_, double h_) : a(a_), s(s_), h(h_) {
    if (!(std::isfinite(a) && std::isfinite(s) && std::isfinite(h)))
      throw std::invalid_argument("Geometry: lengths must be finite");
    if (!(a > 0.0) || !(s > 0.0) || !(h >= 0.0))
      throw std::invalid_argument("Geometry: need a > 0, s > 0, h >= 0");
  }

  // Vertical period of the unfolded image lattice.
  double period() const { return s + 2.0 * h; }

  Geometry withA(double a_) const { return Geometry(a_, s, h); }
  Geometry scaled(double lambda) const {
    return Geometry(lambda * a, lambda * s, lambda * h);
  }
};

enum class Parity { Even, Odd };

enum class PathClass { Even, Odd, Forbidden };

// Per-channel energies at one geometry.  "evenPaths" excludes the (n,0)
// parallel-plate series, which is reported separately as "pfa"; (0,m) terms
// carry no a-dependence and are dropped entirely.
struct EnergyBreakdown {
  double evenPaths = 0.0;
  double pfa = 0.0;
  double oddPaths = 0.0;
  double neumann = 0.0;
  double dirichlet = 0.0;
  double total = 0.0;
};

struct ForceChannels {
  double evenPaths = 0.0;
  double pfa = 0.0;
  double oddPaths = 0.0;
  double neumann = 0.0;
  double dirichlet = 0.0;
  double total = 0.0;
};

// Forces are -dE/da per channel.  normalizedByPfa divides each channel by the
// PFA *pair* force 2*F_pfa (the same convention that sends total/PFA -> 1 as
// a -> 0).
struct ForceBreakdown {
  ForceChannels force;
  ForceChannels normalizedByPfa;
};

}  // namespace casray
