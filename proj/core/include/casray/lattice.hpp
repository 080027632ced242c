#pragma once

// Unfolded mirror-image lattice.
//
// Reflections are replaced by straight segments from a start point inside the
// unit cell (x in [0,a], y in [0,L], L = s+2h) to mirror images of that point.
// Horizontal period a, vertical period L.  Vertical mirror lines x = k*a
// reflect only along the wall segments (folded y in [h, h+s]); horizontal
// lines y = k*L always reflect (infinite sidewalls).  A segment that crosses a
// vertical line outside the wall segment escapes through the sidewall gap and
// does not contribute.

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "casray/types.hpp"

namespace casray {

struct LatticeIndex {
  int n = 0;  // horizontal cell offset
  int m = 0;  // vertical cell offset
  int nReduced = 0;
  int mReduced = 0;

  static LatticeIndex reduce(int n, int m) {
    const int g = std::gcd(std::abs(n), std::abs(m));  // gcd(k,0) == k
    LatticeIndex li;
    li.n = n;
    li.m = m;
    li.nReduced = g ? n / g : 0;
    li.mReduced = g ? m / g : 0;
    return li;
  }
};

inline PathClass classify(Parity hParity, Parity vParity) {
  if (hParity == Parity::Even && vParity == Parity::Even)
    return PathClass::Even;
  if (hParity == Parity::Odd && vParity == Parity::Odd)
    return PathClass::Forbidden;
  return PathClass::Odd;
}

struct ImagePoint {
  LatticeIndex index;
  Parity hParity = Parity::Even;
  Parity vParity = Parity::Even;
  int reflectionOrder = 0;  // vertical-line + horizontal-line crossings

  PathClass pathClass() const { return classify(hParity, vParity); }

  // Unfolded coordinates of the image of `start`.
  Point2 position(const Geometry& g, Point2 start) const {
    const double L = g.period();
    Point2 p;
    p.x = (hParity == Parity::Even) ? start.x + 2.0 * index.n * g.a
                                    : 2.0 * index.n * g.a - start.x;
    p.y = (vParity == Parity::Even) ? start.y + 2.0 * index.m * L
                                    : 2.0 * index.m * L - start.y;
    return p;
  }
};

// Degenerate straight-shot paths (zero displacement along one axis).  Odd
// axis paths are self-energy; even (n,0) paths form the PFA series and even
// (0,m) paths carry no a-dependence.  All are excluded from the generic sums.
inline bool isAxisPath(const ImagePoint& ip) {
  return (ip.hParity == Parity::Even && ip.index.n == 0) ||
         (ip.vParity == Parity::Even && ip.index.m == 0);
}

// Even-path length: start-independent, offsets (2na, 2mL).
inline double pathLengthEven(const Geometry& g, int n, int m) {
  const double dx = 2.0 * n * g.a;
  const double dy = 2.0 * m * g.period();
  return std::hypot(dx, dy);
}

// Odd-path length depends on the start point.
inline double pathLengthOdd(const Geometry& g, const ImagePoint& ip,
                            Point2 start) {
  const Point2 p = ip.position(g, start);
  return std::hypot(p.x - start.x, p.y - start.y);
}

// Triangle-wave fold of period 2L onto [0, L]: position in the fundamental
// cell of the reflection tiling.
inline double foldIntoCell(double y, double L) {
  const double p = 2.0 * L;
  double t = std::fmod(y, p);
  if (t < 0.0) t += p;
  return (t <= L) ? t : p - t;
}

// Escape test.  True iff every vertical-line crossing of the straight segment
// from `start` to the image of `start` happens along a wall segment, i.e. the
// folded crossing ordinate lies strictly inside (h, h+s).  Tangencies (folded
// ordinate exactly h or h+s, lattice corners) count as escape; they are a
// measure-zero set and this keeps the test deterministic.  Horizontal-line
// crossings never cause escape.
inline bool isAllowed(const Geometry& g, Point2 start, const ImagePoint& ip) {
  const Point2 p = ip.position(g, start);
  const double x0 = start.x, x1 = p.x;
  if (x0 == x1) return true;  // vertical path: no vertical-line crossings
  const double lo = std::min(x0, x1);
  const double hi = std::max(x0, x1);
  const long kLo = static_cast<long>(std::floor(lo / g.a)) + 1;
  const long kHi = static_cast<long>(std::ceil(hi / g.a)) - 1;
  if (kLo > kHi) return true;
  const double L = g.period();
  const double invDx = 1.0 / (x1 - x0);
  const double dy = p.y - start.y;
  const double yHi = g.h + g.s;
  for (long k = kLo; k <= kHi; ++k) {
    const double xc = static_cast<double>(k) * g.a;
    if (!(xc > lo && xc < hi)) continue;  // endpoint, not a crossing
    const double yc = start.y + (xc - x0) * invDx * dy;
    const double yf = foldIntoCell(yc, L);
    if (!(yf > g.h && yf < yHi)) return false;
  }
  return true;
}

// All images with reflection order exactly r, lexicographic in (n, m).
std::vector<ImagePoint> imagesAtOrder(int r);

// All images with reflection order r <= maxReflectionOrder, each exactly
// once, ordered by increasing r then lexicographic (n, m).  Even, Odd and
// Forbidden images are all yielded; callers filter.
std::vector<ImagePoint> enumerateImages(int maxReflectionOrder);

}  // namespace casray
