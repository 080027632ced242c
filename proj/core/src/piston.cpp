#include "casray/piston.hpp"

#include <cmath>
#include <stdexcept>

#include "casray/core.hpp"
#include "casray/even_engine.hpp"

namespace casray {
namespace piston {

namespace {

inline double summand(double a, double b, double n, double m) {
  const double q = a * n * a * n + b * m * b * m;
  return 1.0 / (q * std::sqrt(q));
}

// integral_X^inf ((a x)^2 + c^2)^(-3/2) dx
inline double rowTailIntegral(double a, double c, double X) {
  const double c2 = c * c;
  return 1.0 / (a * c2) - X / (c2 * std::hypot(a * X, c));
}

// integral_X^inf integral_Y^inf ((a x)^2 + (b y)^2)^(-3/2) dy dx
inline double cornerTailIntegral(double a, double b, double X, double Y) {
  const double r = std::hypot(a * X, b * Y);
  return 1.0 / (b * a * a * X) - r / (a * a * b * b * X * Y) +
         1.0 / (a * b * b * Y);
}

}  // namespace

EpsteinResult epsteinZ2(const EpsteinParams& params, double tolerance) {
  if (params.p != 3)
    throw std::invalid_argument("epsteinZ2: only p = 3 is implemented");
  if (!(params.a > 0.0) || !(params.b > 0.0))
    throw std::invalid_argument("epsteinZ2: need a, b > 0");
  if (!(tolerance > 0.0))
    throw std::invalid_argument("epsteinZ2: need tolerance > 0");
  const double a = params.a, b = params.b;

  constexpr int kMaxShell = 1 << 17;
  KahanSum square;  // explicit quadrant block n,m <= N
  int prevN = 0;
  for (int N = 64; N <= kMaxShell; N *= 2) {
    // extend the explicit block from prevN to N
    for (int n = prevN + 1; n <= N; ++n)
      for (int m = 1; m <= N; ++m) square.add(summand(a, b, n, m));
    for (int m = prevN + 1; m <= N; ++m)
      for (int n = 1; n <= prevN; ++n) square.add(summand(a, b, n, m));
    prevN = N;

    // Midpoint-rule integral tails beyond the block.  The midpoint rule on
    // unit intervals has error f''(xi)/24 per cell; summed, it is bounded by
    // |f'| at the boundary (f' monotone), integrated across the other index.
    const double X = N + 0.5;
    KahanSum rows, cols, bound;
    for (int m = 1; m <= N; ++m) {
      const double c = m * b;
      rows.add(rowTailIntegral(a, c, X));
      const double q = a * X * a * X + c * c;
      bound.add(3.0 * a * a * X / (q * q * std::sqrt(q)));
    }
    for (int n = 1; n <= N; ++n) {
      const double c = n * a;
      cols.add(rowTailIntegral(b, c, X));
      const double q = b * X * b * X + c * c;
      bound.add(3.0 * b * b * X / (q * q * std::sqrt(q)));
    }
    const double corner = cornerTailIntegral(a, b, X, X);
    const double cornerBound = 2.0 / (b * a * a * X * X * X) +
                               2.0 / (a * b * b * X * X * X);
    const double errorBound =
        2.0 * (bound.value() + cornerBound) / 24.0;  // safety factor 2

    if (errorBound <= tolerance) {
      EpsteinResult res;
      res.value = square.value() + rows.value() + cols.value() + corner;
      res.errorBound = errorBound;
      res.converged = true;
      res.shellSize = N;
      return res;
    }
  }
  throw std::runtime_error("epsteinZ2: tolerance unreachable under term cap");
}

double pistonEvenEnergy(double a, double s, double tolerance) {
  // absolute tolerance on Z2 scaled so the energy meets `tolerance`
  const double zTol = tolerance * 8.0 * kPi / (a * s);
  const EpsteinResult z = epsteinZ2({a, s, 3}, zTol);
  return -(a * s / (8.0 * kPi)) * z.value;
}

double pistonOddEnergy(double a, double s) {
  return -(kPi / 48.0) * (1.0 / s + 1.0 / a);
}

double pistonEvenForce(double a, double s) {
  // Accuracy ~1e-5 relative: truncation ~ |E'''| delta^2/6 and Epstein noise
  // ~ tol/(2 delta) are both well below that.
  const double delta = 1e-3 * a;
  const double tol = 1e-10;
  return forceFromEnergies({pistonEvenEnergy(a - delta, s, tol),
                            pistonEvenEnergy(a, s, tol),
                            pistonEvenEnergy(a + delta, s, tol), delta})
      .force;
}

double pistonOddForce(double a, double /*s*/) {
  return -kPi / (48.0 * a * a);
}

double pistonTotalForce(double a, double s) {
  return 2.0 * (pistonEvenForce(a, s) +
                even_engine::pfaForce(Geometry(a, s, 0.0)));
}

}  // namespace piston
}  // namespace casray
