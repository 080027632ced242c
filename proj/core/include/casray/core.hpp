#pragma once

// Energy/force bookkeeping shared by all engines: polarization mapping and
// finite-difference force evaluation.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "casray/types.hpp"

namespace casray {

const char* versionString();

struct Polarizations {
  double neumann;
  double dirichlet;
  double total;
};

// Channel combination convention (anchored to the h=0 piston limits):
//   neumann = even + odd, dirichlet = even - odd, total = 2*even.
inline Polarizations toPolarizations(double evenTotal, double odd) {
  if (!std::isfinite(evenTotal) || !std::isfinite(odd))
    throw std::invalid_argument("toPolarizations: non-finite channel energy");
  return {evenTotal + odd, evenTotal - odd, 2.0 * evenTotal};
}

inline EnergyBreakdown makeEnergyBreakdown(double evenPaths, double pfa,
                                           double oddPaths) {
  EnergyBreakdown e;
  e.evenPaths = evenPaths;
  e.pfa = pfa;
  e.oddPaths = oddPaths;
  Polarizations p = toPolarizations(evenPaths + pfa, oddPaths);
  e.neumann = p.neumann;
  e.dirichlet = p.dirichlet;
  e.total = p.total;
  return e;
}

// Energies evaluated at a-delta, a, a+delta.
struct EnergyStencil {
  double minus;
  double center;
  double plus;
  double delta;
};

struct ForceEstimate {
  double force;           // -dE/da
  double truncationError; // O(delta^2) estimate from the third difference
};

// Central-difference force -dE/da.  The truncation estimate compares the
// one-sided slopes; exact for quadratics, O(delta) pessimistic otherwise.
inline ForceEstimate forceFromEnergies(const EnergyStencil& st) {
  if (!std::isfinite(st.minus) || !std::isfinite(st.center) ||
      !std::isfinite(st.plus))
    throw std::invalid_argument("forceFromEnergies: non-finite stencil energy");
  if (!(st.delta > 0.0))
    throw std::invalid_argument("forceFromEnergies: need delta > 0");
  const double slope = (st.plus - st.minus) / (2.0 * st.delta);
  const double curv = (st.plus - 2.0 * st.center + st.minus) / st.delta;
  return {-slope, std::abs(curv) * 0.5};
}

// delta = max(a,1) * eps^(1/3): standard trade-off for O(delta^2) schemes.
inline double defaultForceStep(double a) {
  return std::max(a, 1.0) * std::cbrt(std::numeric_limits<double>::epsilon());
}

inline ForceEstimate forceFromEnergyFunction(
    const std::function<double(double)>& energyOfA, double a,
    double delta = 0.0) {
  if (delta <= 0.0) delta = defaultForceStep(a);
  return forceFromEnergies(
      {energyOfA(a - delta), energyOfA(a), energyOfA(a + delta), delta});
}

// Kahan-compensated accumulator; used everywhere a deterministic, error-
// tracked reduction is required.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - comp_;
    const double t = sum_ + y;
    comp_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace casray
