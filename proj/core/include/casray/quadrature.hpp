#pragma once

// Adaptive quadrature (1D and 2D) built on embedded midpoint pairs: the
// 1-point midpoint rule against its composite refinement.  The
// Richardson-extrapolated combination is high-order accurate on smooth cells
// and the pair difference gives the error estimate.
//
// Integrands are vector-valued so that correlated quantities (e.g. an energy
// and its finite-difference stencil) can share the exact same evaluation
// points; errors then cancel in differences instead of adding.
//
// Caveat for the 2D rule: on a discontinuous (indicator-type) integrand whose
// jump lies along a grid-aligned line, the five samples of a straddling cell
// can all land on the same side, so the pair reports zero error and the cell
// freezes with an O(cell-width) bias.  Integrands with indicator factors
// should integrate the discontinuous direction exactly (reducing to a
// continuous 1D problem, as the odd-path engine does) rather than rely on the
// 2D error estimate.

#include <cstdint>
#include <functional>
#include <vector>

namespace casray {
namespace quadrature {

struct Rect {
  double x0, y0, x1, y1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
};

struct CubatureSettings {
  double relTolerance = 1e-4;
  double absTolerance = 1e-8;
  int maxSubdivisions = 30;      // max bisection depth of any cell
  double minCellSize = 1e-9;     // fraction of the larger domain extent
  int initialSplits = 4;         // uniform pre-split per dimension
  std::uint64_t maxEvaluations = 3'000'000;
};

// out[0..nComponents) must be filled with finite values at every point.
using VectorIntegrand = std::function<void(double x, double y, double* out)>;

struct CubatureResult {
  std::vector<double> value;
  std::vector<double> errorEstimate;
  std::uint64_t evaluations = 0;
  bool converged = false;
};

CubatureResult integrate2D(const Rect& domain, int nComponents,
                           const VectorIntegrand& f,
                           const CubatureSettings& settings);

struct ScalarResult {
  double value = 0.0;
  double errorEstimate = 0.0;
  std::uint64_t evaluations = 0;
  bool converged = false;
};

ScalarResult integrate2D(const Rect& domain,
                         const std::function<double(double, double)>& f,
                         const CubatureSettings& settings);

struct Interval {
  double t0, t1;
  double length() const { return t1 - t0; }
};

using LineIntegrand = std::function<void(double t, double* out)>;

// 1D counterpart of integrate2D: midpoint vs two-panel composite on each
// segment, largest-error-first refinement, same settings semantics
// (initialSplits = uniform pre-split, minCellSize relative to the domain
// length).  Deterministic for a deterministic integrand.
CubatureResult integrate1D(const Interval& domain, int nComponents,
                           const LineIntegrand& f,
                           const CubatureSettings& settings);

ScalarResult integrate1D(const Interval& domain,
                         const std::function<double(double)>& f,
                         const CubatureSettings& settings);

}  // namespace quadrature
}  // namespace casray
