#include "casray/odd_engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "casray/core.hpp"
#include "casray/parallel.hpp"

namespace casray {
namespace odd_engine {

std::vector<ImagePoint> familiesAtOrder(int r) {
  if (r < 3 || r % 2 == 0)
    throw std::invalid_argument("familiesAtOrder: order must be odd, >= 3");
  std::vector<ImagePoint> out;
  out.reserve(4 * (r - 1));
  for (const ImagePoint& ip : imagesAtOrder(r)) {
    if (ip.pathClass() == PathClass::Odd && !isAxisPath(ip)) out.push_back(ip);
  }
  return out;
}

namespace {

std::string familyName(const ImagePoint& f) {
  std::ostringstream os;
  os << "r=" << f.reflectionOrder << " (n=" << f.index.n
     << ", m=" << f.index.m << ", "
     << (f.hParity == Parity::Odd ? "hOdd" : "hEven") << "/"
     << (f.vParity == Parity::Odd ? "vOdd" : "vEven") << ")";
  return os.str();
}

// The escape indicator chi(x,y) is affine along one axis of every odd
// family: the crossing ordinate of each vertical mirror line depends
// linearly on the coordinate the path length does not depend on.
// Integrating that coordinate exactly (an interval-intersection measure)
// reduces each family to a 1D integral W(t) * lbar(t)^-3 of the transverse
// allowed measure against the path-length kernel, whose antiderivative is
// closed-form.
//
// The integrator refines on rigorous enclosures instead of sampled error
// estimates: every transverse interval endpoint moves monotonically in t
// across a segment (the derivative sign is t-independent for both family
// orientations), so evaluating the band structure at the two segment ends
// yields sound inner/outer bounds on W over the whole segment.  Point
// samples alone would freeze segments whose narrow support windows fall
// between the sample points.

// Disjoint intervals, ascending.
using IntervalList = std::vector<std::pair<double, double>>;

// t in [0, T] with (alpha + beta*t) mod L inside the open band (h, hTop).
void bandPreimage(double alpha, double beta, double T, double L, double h,
                  double hTop, IntervalList& out) {
  out.clear();
  if (beta == 0.0) {
    double r = std::fmod(alpha, L);
    if (r < 0.0) r += L;
    if (r > h && r < hTop) out.emplace_back(0.0, T);
    return;
  }
  const double v0 = alpha, v1 = alpha + beta * T;
  const double vMin = std::min(v0, v1), vMax = std::max(v0, v1);
  const long jLo = static_cast<long>(std::floor((vMin - hTop) / L));
  const long jHi = static_cast<long>(std::floor((vMax - h) / L)) + 1;
  for (long j = jLo; j <= jHi; ++j) {
    double tA = (static_cast<double>(j) * L + h - alpha) / beta;
    double tB = (static_cast<double>(j) * L + hTop - alpha) / beta;
    if (tA > tB) std::swap(tA, tB);
    tA = std::max(tA, 0.0);
    tB = std::min(tB, T);
    if (tB > tA) out.emplace_back(tA, tB);
  }
  if (beta < 0.0) std::reverse(out.begin(), out.end());
}

void intersectInPlace(IntervalList& acc, const IntervalList& other,
                      IntervalList& scratch) {
  scratch.clear();
  std::size_t i = 0, j = 0;
  while (i < acc.size() && j < other.size()) {
    const double lo = std::max(acc[i].first, other[j].first);
    const double hi = std::min(acc[i].second, other[j].second);
    if (hi > lo) scratch.emplace_back(lo, hi);
    if (acc[i].second < other[j].second)
      ++i;
    else
      ++j;
  }
  acc.swap(scratch);
}

struct MeasureScratch {
  IntervalList acc, band, tmp;
  IntervalList accInner, accOuter, inner, outer;
};

double measureOf(const IntervalList& v) {
  double total = 0.0;
  for (const auto& iv : v) total += iv.second - iv.first;
  return total;
}

// Allowed x-measure at fixed start ordinate y for an hParity-even family
// (x' = x + 2na): lines k between x and x+2na are crossed for every
// x in (0, a), at ordinate yc = y + (ka - x)(mL - y)/(na), linear in x.
double allowedWidth(const Geometry& g, double L, const ImagePoint& ip,
                    double y, MeasureScratch& ms) {
  const int n = ip.index.n;
  const int m = ip.index.m;
  const double hTop = g.h + g.s;
  const double beta = -(m * L - y) / (n * g.a);
  const int kLo = (n > 0) ? 1 : 2 * n + 1;
  const int kHi = (n > 0) ? 2 * n : 0;
  ms.acc.assign(1, {0.0, g.a});
  for (int k = kLo; k <= kHi && !ms.acc.empty(); ++k) {
    const double alpha = y + k * (m * L - y) / n;
    bandPreimage(alpha, beta, g.a, L, g.h, hTop, ms.band);
    intersectInPlace(ms.acc, ms.band, ms.tmp);
  }
  return measureOf(ms.acc);
}

// Allowed y-measure at fixed start abscissa x for an hParity-odd family
// (x' = 2na - x): lines k between x and 2na - x are crossed for every
// x in (0, a), at ordinate yc = y + mL(ka - x)/(na - x), a shift of y.
double allowedHeight(const Geometry& g, double L, const ImagePoint& ip,
                     double x, MeasureScratch& ms) {
  const int n = ip.index.n;
  const int m = ip.index.m;
  const double hTop = g.h + g.s;
  const int kLo = (n > 0) ? 1 : 2 * n;
  const int kHi = (n > 0) ? 2 * n - 1 : 0;
  ms.acc.assign(1, {0.0, L});
  for (int k = kLo; k <= kHi && !ms.acc.empty(); ++k) {
    // k == n is a removable singularity: the shift is exactly mL.
    const double shift =
        (k == n) ? m * L : m * L * (k * g.a - x) / (n * g.a - x);
    bandPreimage(shift, 1.0, L, L, g.h, hTop, ms.band);
    intersectInPlace(ms.acc, ms.band, ms.tmp);
  }
  return measureOf(ms.acc);
}

constexpr double kBig = 1e300;
constexpr long kMaxBandsPerConstraint = 1024;

// Rigorous bounds on the transverse allowed measure over the whole segment
// t in [t0, t1].  For each crossed line k and each vertical-lattice band j,
// the transverse preimage interval at t0 and t1 brackets the interval at
// every interior t (monotone endpoint motion), so [intersection of inner
// intervals, intersection of outer intervals] sandwiches the allowed set.
struct SegmentBounds {
  double inf, sup;
};

SegmentBounds measureBounds(const Geometry& g, double L, const ImagePoint& ip,
                            Orientation o, double t0, double t1,
                            MeasureScratch& ms) {
  const int n = ip.index.n;
  const int m = ip.index.m;
  const double hTop = g.h + g.s;
  double T;
  int kLo, kHi;
  if (o == Orientation::yInvariantLength) {
    T = g.a;
    kLo = (n > 0) ? 1 : 2 * n + 1;
    kHi = (n > 0) ? 2 * n : 0;
  } else {
    T = L;
    kLo = (n > 0) ? 1 : 2 * n;
    kHi = (n > 0) ? 2 * n - 1 : 0;
  }
  ms.accInner.assign(1, {0.0, T});
  ms.accOuter.assign(1, {0.0, T});

  for (int k = kLo; k <= kHi; ++k) {
    // affine crossing ordinate v = A + B*tau at both segment ends
    double A0, B0, A1, B1;
    if (o == Orientation::yInvariantLength) {
      const double q0 = (m * L - t0) / n, q1 = (m * L - t1) / n;
      A0 = t0 + k * q0;
      B0 = -q0 / g.a;
      A1 = t1 + k * q1;
      B1 = -q1 / g.a;
    } else {
      auto shift = [&](double x) {
        return (k == n) ? m * L : m * L * (k * g.a - x) / (n * g.a - x);
      };
      A0 = shift(t0 * g.a);
      B0 = 1.0;
      A1 = shift(t1 * g.a);
      B1 = 1.0;
    }

    const double corners[4] = {A0, A0 + B0 * T, A1, A1 + B1 * T};
    double vMin = corners[0], vMax = corners[0];
    for (double c : corners) {
      vMin = std::min(vMin, c);
      vMax = std::max(vMax, c);
    }
    long jLo = 0, jHi = -1;
    const bool tractable = std::isfinite(vMin) && std::isfinite(vMax);
    if (tractable) {
      jLo = static_cast<long>(std::floor((vMin - hTop) / L));
      jHi = static_cast<long>(std::floor((vMax - g.h) / L)) + 1;
    }
    if (!tractable || jHi - jLo > kMaxBandsPerConstraint) {
      // conservative: no inner information, outer unconstrained
      ms.accInner.clear();
      continue;
    }

    ms.inner.clear();
    ms.outer.clear();
    for (long j = jLo; j <= jHi; ++j) {
      const double bandLo = static_cast<double>(j) * L + g.h;
      const double bandHi = static_cast<double>(j) * L + hTop;
      // unclipped preimage of the band at each end
      double a0, b0, a1, b1;
      bool full0 = false, empty0 = false, full1 = false, empty1 = false;
      auto solve = [&](double A, double B, double& lo, double& hi, bool& full,
                       bool& empty) {
        if (B == 0.0) {
          (A > bandLo && A < bandHi) ? full = true : empty = true;
          lo = -kBig;
          hi = kBig;
          return;
        }
        lo = (bandLo - A) / B;
        hi = (bandHi - A) / B;
        if (lo > hi) std::swap(lo, hi);
      };
      solve(A0, B0, a0, b0, full0, empty0);
      solve(A1, B1, a1, b1, full1, empty1);
      // flat (B = 0) segment ends occur only at the domain boundary; give
      // up precision there and let refinement shrink the segment instead
      if (empty0 || empty1 || full0 || full1) {
        if (!(empty0 && empty1)) ms.outer.emplace_back(0.0, T);
        if (full0 && full1) ms.inner.emplace_back(0.0, T);
        continue;
      }
      const double iLo = std::max(a0, a1), iHi = std::min(b0, b1);
      const double oLo = std::min(a0, a1), oHi = std::max(b0, b1);
      if (std::min(iHi, T) > std::max(iLo, 0.0))
        ms.inner.emplace_back(std::max(iLo, 0.0), std::min(iHi, T));
      if (std::min(oHi, T) > std::max(oLo, 0.0))
        ms.outer.emplace_back(std::max(oLo, 0.0), std::min(oHi, T));
    }
    auto byLo = [](const std::pair<double, double>& x,
                   const std::pair<double, double>& y) {
      return x.first < y.first;
    };
    std::sort(ms.inner.begin(), ms.inner.end(), byLo);
    std::sort(ms.outer.begin(), ms.outer.end(), byLo);
    // merge overlapping outer intervals
    std::size_t w = 0;
    for (std::size_t r = 0; r < ms.outer.size(); ++r) {
      if (w > 0 && ms.outer[r].first <= ms.outer[w - 1].second)
        ms.outer[w - 1].second =
            std::max(ms.outer[w - 1].second, ms.outer[r].second);
      else
        ms.outer[w++] = ms.outer[r];
    }
    ms.outer.resize(w);

    intersectInPlace(ms.accInner, ms.inner, ms.tmp);
    intersectInPlace(ms.accOuter, ms.outer, ms.tmp);
    if (ms.accOuter.empty()) return {0.0, 0.0};
  }
  return {measureOf(ms.accInner), measureOf(ms.accOuter)};
}

// Exact integral of 1/l(t)^3 (times the abscissa Jacobian for
// xInvariantLength families) over the segment, via the antiderivative
// u / (c^2 sqrt(c^2 + u^2)) of (c^2 + u^2)^(-3/2).
double kernelIntegral(const Geometry& g, double L, const ImagePoint& ip,
                      Orientation o, double t0, double t1) {
  double c, u0, u1;
  if (o == Orientation::yInvariantLength) {
    c = 2.0 * ip.index.n * g.a;
    u0 = 2.0 * (ip.index.m * L - t0);
    u1 = 2.0 * (ip.index.m * L - t1);
  } else {
    c = 2.0 * ip.index.m * L;
    u0 = 2.0 * (ip.index.n * g.a - t0 * g.a);
    u1 = 2.0 * (ip.index.n * g.a - t1 * g.a);
  }
  const double c2 = c * c;
  auto prim = [&](double u) { return u / (c2 * std::sqrt(c2 + u * u)); };
  return 0.5 * (prim(u0) - prim(u1));
}

// Signed split of the force kernel over the segment.  Rescaling the
// transverse coordinate by a makes the allowed measure a-free, so
// dI/da = (1/a) * integral of W(t) * K2(t) with
//   K2 = (u^2 - 2c^2) l^-5   (yInvariantLength: c = 2na scales, u does not)
//   K2 = (c^2 - 2u^2) l^-5   (xInvariantLength: u = 2(na - x) scales, c not)
// and l^2 = c^2 + u^2.  Both signs have closed-form antiderivatives in u;
// the positive and negative parts are accumulated separately so the measure
// bounds still sandwich the product W * K2 rigorously.
void forceKernelSplit(const Geometry& g, double L, const ImagePoint& ip,
                      Orientation o, double t0, double t1, double& gPos,
                      double& gNeg) {
  double c, u0, u1;
  bool positiveOutside;
  if (o == Orientation::yInvariantLength) {
    c = 2.0 * ip.index.n * g.a;
    u0 = 2.0 * (ip.index.m * L - t0);
    u1 = 2.0 * (ip.index.m * L - t1);
    positiveOutside = true;  // K2 > 0 where u^2 > 2 c^2
  } else {
    c = 2.0 * ip.index.m * L;
    u0 = 2.0 * (ip.index.n * g.a - t0 * g.a);
    u1 = 2.0 * (ip.index.n * g.a - t1 * g.a);
    positiveOutside = false;  // K2 > 0 where u^2 < c^2 / 2
  }
  const double c2 = c * c;
  const double tau = positiveOutside ? std::sqrt(2.0) * std::abs(c)
                                     : std::abs(c) / std::sqrt(2.0);
  auto Q = [&](double u) {
    const double l2 = c2 + u * u;
    const double den = l2 * std::sqrt(l2);
    return positiveOutside ? -u * (2.0 * c2 + u * u) / (c2 * den) : u / den;
  };
  gPos = gNeg = 0.0;
  double lo = std::min(u0, u1);
  const double hi = std::max(u0, u1);
  auto addPiece = [&](double ua, double ub) {
    if (ub <= ua) return;
    const double piece = 0.5 * (Q(ub) - Q(ua)) / g.a;
    const double um = 0.5 * (ua + ub);
    const bool inside = um * um < tau * tau;
    if (positiveOutside != inside)
      gPos += piece;
    else
      gNeg += piece;
  };
  for (double br : {-tau, tau}) {
    if (br > lo && br < hi) {
      addPiece(lo, br);
      lo = br;
    }
  }
  addPiece(lo, hi);
}

constexpr int kMaxComponents = 2;

struct GeomEval {
  double value[kMaxComponents] = {0.0, 0.0};
  double err[kMaxComponents] = {0.0, 0.0};
};

GeomEval evalSegmentGeom(const Geometry& g, double L, bool escapeActive,
                         bool withForce, const ImagePoint& ip, Orientation o,
                         double t0, double t1, MeasureScratch& ms) {
  const double G = kernelIntegral(g, L, ip, o, t0, t1);
  double gPos = 0.0, gNeg = 0.0;
  if (withForce) forceKernelSplit(g, L, ip, o, t0, t1, gPos, gNeg);
  const double T = (o == Orientation::yInvariantLength) ? g.a : L;
  GeomEval r;
  if (!escapeActive) {
    r.value[0] = T * G;
    r.value[1] = T * (gPos + gNeg);
    return r;
  }
  const SegmentBounds b = measureBounds(g, L, ip, o, t0, t1, ms);
  if (b.sup <= 0.0) return r;
  auto widthAt = [&](double t) {
    return (o == Orientation::yInvariantLength)
               ? allowedWidth(g, L, ip, t, ms)
               : allowedHeight(g, L, ip, t * g.a, ms);
  };
  double est = 0.25 * widthAt(t0) + 0.5 * widthAt(0.5 * (t0 + t1)) +
               0.25 * widthAt(t1);
  est = std::min(std::max(est, b.inf), b.sup);
  r.value[0] = est * G;
  r.err[0] = std::max(b.sup - est, est - b.inf) * G;
  if (withForce) {
    r.value[1] = est * (gPos + gNeg);
    const double fHi = b.sup * gPos + b.inf * gNeg;
    const double fLo = b.inf * gPos + b.sup * gNeg;
    r.err[1] = std::max(fHi - r.value[1], r.value[1] - fLo);
  }
  return r;
}

struct Segment {
  double t0, t1;
  int depth;
  std::uint64_t id;
  double value[kMaxComponents];
  double error[kMaxComponents];
  double priority;
};

struct SegmentLess {
  bool operator()(const Segment& a, const Segment& b) const {
    if (a.priority != b.priority) return a.priority < b.priority;
    return a.id > b.id;
  }
};

FamilyResult integrateFamily(const Geometry& g, const ImagePoint& family,
                             const OddSettings& st) {
  const bool escapeActive = g.h >= st.smallHGuardFraction * g.s;
  const double L = g.period();
  const Orientation o = orientation(family);
  const double tEnd = (o == Orientation::yInvariantLength) ? L : 1.0;

  const quadrature::CubatureSettings& cs = st.cubature;
  const int nc = st.withForce ? 2 : 1;
  MeasureScratch ms;
  std::uint64_t evals = 0;
  std::uint64_t nextId = 0;

  auto evaluateSegment = [&](Segment& c) {
    const GeomEval e = evalSegmentGeom(g, L, escapeActive, st.withForce,
                                       family, o, c.t0, c.t1, ms);
    ++evals;
    c.priority = 0.0;
    for (int i = 0; i < nc; ++i) {
      c.value[i] = e.value[i];
      c.error[i] = e.err[i];
      c.priority += c.error[i];
    }
  };

  std::vector<Segment> heap;
  std::vector<Segment> frozen;
  double total[kMaxComponents] = {0};
  double totalErr[kMaxComponents] = {0};

  const int k = std::max(escapeActive ? 8 : 1, cs.initialSplits);
  for (int i = 0; i < k; ++i) {
    Segment c;
    c.t0 = tEnd * i / k;
    c.t1 = tEnd * (i + 1) / k;
    c.depth = 0;
    c.id = nextId++;
    evaluateSegment(c);
    for (int j = 0; j < nc; ++j) {
      total[j] += c.value[j];
      totalErr[j] += c.error[j];
    }
    heap.push_back(c);
  }
  std::make_heap(heap.begin(), heap.end(), SegmentLess{});

  const double minSize = cs.minCellSize * tEnd;
  auto withinTolerance = [&]() {
    for (int i = 0; i < nc; ++i) {
      const double target =
          std::max(cs.absTolerance, cs.relTolerance * std::abs(total[i]));
      if (totalErr[i] > target) return false;
    }
    return true;
  };

  bool converged = false;
  while (true) {
    if (withinTolerance()) {
      converged = true;
      break;
    }
    if (heap.empty() || evals >= cs.maxEvaluations) break;

    std::pop_heap(heap.begin(), heap.end(), SegmentLess{});
    Segment parent = heap.back();
    heap.pop_back();
    if (parent.priority <= 0.0 || parent.depth >= cs.maxSubdivisions ||
        (parent.t1 - parent.t0) <= minSize) {
      frozen.push_back(parent);
      if (parent.priority <= 0.0) {
        // nothing further to refine anywhere
        converged = withinTolerance();
        break;
      }
      continue;
    }
    for (int i = 0; i < nc; ++i) {
      total[i] -= parent.value[i];
      totalErr[i] -= parent.error[i];
    }
    Segment a = parent, b = parent;
    a.depth = b.depth = parent.depth + 1;
    const double tm = 0.5 * (parent.t0 + parent.t1);
    a.t1 = tm;
    b.t0 = tm;
    for (Segment* c : {&a, &b}) {
      c->id = nextId++;
      evaluateSegment(*c);
      for (int i = 0; i < nc; ++i) {
        total[i] += c->value[i];
        totalErr[i] += c->error[i];
      }
      heap.push_back(*c);
      std::push_heap(heap.begin(), heap.end(), SegmentLess{});
    }
  }

  // compensated reduction in creation order: deterministic and accurate
  std::vector<const Segment*> leaves;
  leaves.reserve(heap.size() + frozen.size());
  for (const Segment& c : heap) leaves.push_back(&c);
  for (const Segment& c : frozen) leaves.push_back(&c);
  std::sort(leaves.begin(), leaves.end(),
            [](const Segment* x, const Segment* y) { return x->id < y->id; });

  double out[kMaxComponents] = {0}, outErr[kMaxComponents] = {0};
  for (int i = 0; i < nc; ++i) {
    KahanSum v, e;
    for (const Segment* c : leaves) {
      v.add(c->value[i]);
      e.add(c->error[i]);
    }
    out[i] = v.value();
    outErr[i] = e.value();
  }

  FamilyResult res;
  res.family = family;
  res.energy = -out[0] / (4.0 * kPi);
  res.errorEstimate = outErr[0] / (4.0 * kPi);
  if (st.withForce) res.forceTerm = out[1] / (4.0 * kPi);
  res.evaluations = evals;
  res.converged = converged;
  return res;
}

}  // namespace

OrderResult oddOrderSum(const Geometry& g, int order,
                        const OddSettings& settings, int threads) {
  const std::vector<ImagePoint> families = familiesAtOrder(order);

  std::vector<FamilyResult> results(families.size());
  parallelFor(families.size(), threads, [&](std::size_t i) {
    results[i] = integrateFamily(g, families[i], settings);
  });

  OrderResult out;
  out.order = order;
  out.converged = true;
  KahanSum energy, err, force;
  for (const FamilyResult& fr : results) {
    energy.add(fr.energy);
    err.add(fr.errorEstimate);
    force.add(fr.forceTerm);
    out.evaluations += fr.evaluations;
    out.converged = out.converged && fr.converged;
  }
  out.energy = energy.value();
  out.errorEstimate = err.value();
  out.forceTerm = force.value();
  out.families = std::move(results);
  return out;
}

OddResult oddEnergyNumeric(const Geometry& g, int maxOrder,
                           const OddSettings& settings, int threads) {
  if (maxOrder < 3 || maxOrder % 2 == 0)
    throw std::invalid_argument("oddEnergyNumeric: maxOrder must be odd >= 3");

  OddResult out;
  out.converged = true;
  KahanSum energy, err, force;
  for (int r = 3; r <= maxOrder; r += 2) {
    OrderResult ores = oddOrderSum(g, r, settings, threads);
    energy.add(ores.energy);
    err.add(ores.errorEstimate);
    force.add(ores.forceTerm);
    out.evaluations += ores.evaluations;
    if (!ores.converged && out.firstUnconvergedFamily.empty()) {
      for (const FamilyResult& fr : ores.families) {
        if (!fr.converged) {
          out.firstUnconvergedFamily = familyName(fr.family);
          break;
        }
      }
    }
    out.converged = out.converged && ores.converged;
    out.orders.push_back(std::move(ores));
  }
  out.energy = energy.value();
  out.errorEstimate = err.value();
  out.forceTerm = force.value();
  return out;
}

double energy21(const Geometry& g) {
  const double a = g.a, s = g.s, h = g.h;
  const double L = 2.0 * h + s;
  double bracket = s * a / std::hypot(a, L);
  if (h > 0.0) {
    const double num = 1.0 + std::sqrt(1.0 + (2.0 * h / a) * (2.0 * h / a));
    const double den = 1.0 + std::sqrt(1.0 + (L / a) * (L / a));
    bracket -= 2.0 * h * std::log((L / (2.0 * h)) * (num / den));
  }
  return -bracket / (32.0 * kPi * a * a);
}

double energy12(const Geometry& g) {
  const double a = g.a, s = g.s;
  const double L = 2.0 * g.h + s;
  return -(a * s / (32.0 * kPi * L * L)) / std::hypot(a, L);
}

double oddEnergyAnalytic3(const Geometry& g) {
  return 4.0 * (energy21(g) + energy12(g));
}

double oddForceAnalytic3(const Geometry& g) {
  return forceFromEnergyFunction(
             [&](double a) { return oddEnergyAnalytic3(g.withA(a)); }, g.a)
      .force;
}

}  // namespace odd_engine
}  // namespace casray
