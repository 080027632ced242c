#pragma once

// Exact h=0 ("piston") limits: the Epstein zeta even-channel sum and the
// closed-form odd energy.  These are both oracles for the general engines
// and the h=0 fast path.

#include "casray/types.hpp"

namespace casray {
namespace piston {

struct EpsteinParams {
  double a;
  double b;
  int p = 3;  // only p = 3 is implemented (the exponent the energy needs)
};

struct EpsteinResult {
  double value = 0.0;
  double errorBound = 0.0;  // rigorous absolute bound on the tail treatment
  bool converged = false;
  int shellSize = 0;        // quadrant summed explicitly up to n,m <= shellSize
};

// Z2(a,b;3) = sum_{n,m>0} ((na)^2 + (mb)^2)^(-3/2), evaluated by explicit
// quadrant summation plus midpoint-rule integral tails with a convexity
// error bound; the shell is doubled until the bound meets `tolerance`
// (absolute).
EpsteinResult epsteinZ2(const EpsteinParams& params, double tolerance);

// Even-channel piston energy, -(1/8pi)*a*s*Z2(a,s;3); excludes the PFA terms.
double pistonEvenEnergy(double a, double s, double tolerance = 1e-10);

// Odd-channel piston energy, -(pi/48)(1/s + 1/a).
double pistonOddEnergy(double a, double s);

// -dE/da of the channels above.  The even force is a tight central
// difference of the Epstein sum; the odd force is exact.
double pistonEvenForce(double a, double s);
double pistonOddForce(double a, double s);

// Total-channel pair force at h=0: 2*(pistonEvenForce + pfaForce).
double pistonTotalForce(double a, double s);

}  // namespace piston
}  // namespace casray
