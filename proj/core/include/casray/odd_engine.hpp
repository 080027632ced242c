#pragma once

// Odd-path channel.
//
// Analytic three-reflection closed forms, plus the generic numeric engine:
// enumerate odd families at each reflection order and integrate
// -(1/4pi) * chi(x,y) / l(x,y)^3 over the unit cell (chi = escape
// indicator).  The indicator is constant along the axis the path length does
// not depend on, so that coordinate is integrated exactly as an
// interval-intersection measure and each family reduces to an adaptive 1D
// integral of a continuous density.  The force -dE/da rides along in the same
// pass: rescaling the transverse coordinate by a removes the a-dependence of
// the allowed measure, so the derivative acts on the kernel alone.

#include <cstdint>
#include <string>
#include <vector>

#include "casray/lattice.hpp"
#include "casray/quadrature.hpp"
#include "casray/types.hpp"

namespace casray {
namespace odd_engine {

enum class Orientation { xInvariantLength, yInvariantLength };

// yInvariantLength: hParity even / vParity odd families, whose path length
// varies only with the start ordinate; xInvariantLength is the converse.
inline Orientation orientation(const ImagePoint& family) {
  return family.hParity == Parity::Even ? Orientation::yInvariantLength
                                        : Orientation::xInvariantLength;
}

// Contributing odd families (non-axis, class Odd) at exactly order r (odd).
std::vector<ImagePoint> familiesAtOrder(int r);

struct OddSettings {
  // Controls the per-family adaptive 1D integration.
  quadrature::CubatureSettings cubature{
      /*relTolerance=*/1e-4, /*absTolerance=*/1e-8, /*maxSubdivisions=*/30,
      /*minCellSize=*/1e-9, /*initialSplits=*/4, /*maxEvaluations=*/3'000'000};
  // Below h = guard*s the escape indicator is identically 1 (h=0 domain);
  // avoids chasing vanishing forbidden slivers and the associated
  // cancellation noise.
  double smallHGuardFraction = 1e-8;
  // Also compute the per-family force -dE/da.  In scaled transverse
  // coordinates the allowed measure is independent of a, so the derivative
  // only hits the path-length kernel and shares the energy's evaluations.
  bool withForce = false;
};

struct FamilyResult {
  ImagePoint family;
  double energy = 0.0;
  double errorEstimate = 0.0;  // rigorous bound on the energy error
  double forceTerm = 0.0;      // -d(energy)/da, when withForce
  std::uint64_t evaluations = 0;
  bool converged = false;
};

struct OrderResult {
  int order = 0;
  double energy = 0.0;
  double errorEstimate = 0.0;
  double forceTerm = 0.0;
  std::uint64_t evaluations = 0;
  bool converged = false;  // every family met the cubature tolerance
  std::vector<FamilyResult> families;
};

// Integrate all families of one odd order; families run in parallel, the
// reduction is sequential in (n,m) order.
OrderResult oddOrderSum(const Geometry& g, int order,
                        const OddSettings& settings, int threads = 1);

struct OddResult {
  double energy = 0.0;
  double errorEstimate = 0.0;
  double forceTerm = 0.0;
  std::uint64_t evaluations = 0;
  bool converged = false;
  std::string firstUnconvergedFamily;  // empty when converged
  std::vector<OrderResult> orders;
};

// Sum of oddOrderSum over r = 3, 5, ..., maxOrder (keeps per-order and
// per-family breakdowns).
OddResult oddEnergyNumeric(const Geometry& g, int maxOrder,
                           const OddSettings& settings = {}, int threads = 1);

// Three-reflection closed forms (one representative family each; the full
// r=3 energy is 4*(energy21 + energy12) for the +- sign combinations).
double energy21(const Geometry& g);
double energy12(const Geometry& g);
double oddEnergyAnalytic3(const Geometry& g);

// -d/da of oddEnergyAnalytic3 (tight central difference of the closed forms).
double oddForceAnalytic3(const Geometry& g);

}  // namespace odd_engine
}  // namespace casray
