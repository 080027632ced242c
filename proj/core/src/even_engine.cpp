#include "casray/even_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "casray/core.hpp"

namespace casray {
namespace even_engine {

namespace {

// occ * ntilde = max(L - 2h*ntilde, 0): the occupancy band width times the
// reduced-index multiplicity, which is the combination the term value needs.
// At h = 0 it is exactly s for every (n,m), so no gcd is required there.
inline double occupancyTimesNt(const Geometry& g, int n, int m) {
  if (g.h == 0.0) return g.s;
  const int nt = n / std::gcd(n, m);
  return std::max(g.period() - 2.0 * g.h * nt, 0.0);
}

}  // namespace

EvenTerm evenTerm(const Geometry& g, int n, int m) {
  if (n < 1 || m < 1)
    throw std::invalid_argument("evenTerm: need n >= 1, m >= 1");
  EvenTerm t;
  t.n = n;
  t.m = m;
  const int nt = n / std::gcd(n, m);
  t.occupancy = std::max(g.period() / nt - 2.0 * g.h, 0.0);
  const double dx = 2.0 * n * g.a;
  const double dy = 2.0 * m * g.period();
  t.length = std::hypot(dx, dy);
  const double l2 = dx * dx + dy * dy;
  t.value = -(t.occupancy * nt * g.a / kPi) / (t.length * l2);
  return t;
}

double evenTermValue(const Geometry& g, int n, int m) {
  const double occnt = occupancyTimesNt(g, n, m);
  if (occnt == 0.0) return 0.0;
  const double dx = 2.0 * n * g.a;
  const double dy = 2.0 * m * g.period();
  const double l2 = dx * dx + dy * dy;
  return -(occnt * g.a / kPi) / (l2 * std::sqrt(l2));
}

double evenTermForce(const Geometry& g, int n, int m) {
  const double occnt = occupancyTimesNt(g, n, m);
  if (occnt == 0.0) return 0.0;
  const double dx = 2.0 * n * g.a;
  const double dy = 2.0 * m * g.period();
  const double l2 = dx * dx + dy * dy;
  // -d/da of the term value; the occupancy factor is a-independent.
  return (occnt / kPi) / (l2 * std::sqrt(l2)) * (1.0 - 3.0 * dx * dx / l2);
}

namespace {

template <typename Term>
SumResult shellSum(const Geometry& g, const SumOptions& opts, Term term) {
  if (!(opts.tolerance > 0.0) && opts.orderCap < 1)
    throw std::invalid_argument("even sum: need tolerance > 0 or orderCap");

  SumResult res;
  KahanSum sum;
  // Rolling window of measured-increment tail estimates; increments on
  // diagonal shells decay ~K/d^2 so the remaining tail is ~t_d * d.  A
  // 3-shell max guards against accidentally small increments (shells can
  // even vanish when h is large).
  double tailWindow[3] = {0, 0, 0};
  int tailCount = 0;

  const int dMax = opts.orderCap > 0 ? std::max(1, opts.orderCap / 2)
                                     : std::numeric_limits<int>::max();
  for (int d = 2; d <= dMax; ++d) {
    KahanSum inc;
    for (int n = 1; n < d; ++n) inc.add(term(g, n, d - n));
    sum.add(inc.value());
    res.terms += static_cast<std::uint64_t>(d - 1);
    res.lastOrder = 2 * d;
    if (opts.recordPartials) res.partials.emplace_back(2 * d, sum.value());

    const double t = std::abs(inc.value());
    if (t > 0.0) {
      tailWindow[tailCount % 3] = t * d;
      ++tailCount;
    }
    res.tailEstimate =
        std::max({tailWindow[0], tailWindow[1], tailWindow[2]});
    const bool tailOk =
        tailCount >= 3 && d >= 6 &&
        res.tailEstimate <= opts.tolerance * std::abs(sum.value());
    if (opts.orderCap == 0 && tailOk) {
      res.converged = true;
      res.stoppedBy = StopReason::Tolerance;
      break;
    }
    if (opts.orderCap == 0 && res.terms >= opts.termCap) {
      res.converged = false;
      res.stoppedBy = StopReason::TermCap;
      break;
    }
    if (d == dMax) {
      res.stoppedBy = StopReason::OrderCap;
      res.converged = tailOk;
    }
  }
  res.value = sum.value();
  res.achievedTolerance =
      res.value != 0.0 ? res.tailEstimate / std::abs(res.value) : 0.0;
  return res;
}

}  // namespace

SumResult evenEnergy(const Geometry& g, const SumOptions& opts) {
  return shellSum(g, opts, [](const Geometry& gg, int n, int m) {
    return evenTermValue(gg, n, m);
  });
}

SumResult evenForce(const Geometry& g, const SumOptions& opts) {
  return shellSum(g, opts, [](const Geometry& gg, int n, int m) {
    return evenTermForce(gg, n, m);
  });
}

double pfaEnergy(const Geometry& g) {
  return -g.s * kZeta3 / (16.0 * kPi * g.a * g.a);
}

double pfaForce(const Geometry& g) {
  return -g.s * kZeta3 / (8.0 * kPi * g.a * g.a * g.a);
}

}  // namespace even_engine
}  // namespace casray
