#include "casray/assembly.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "casray/core.hpp"
#include "casray/even_engine.hpp"
#include "casray/parallel.hpp"
#include "casray/piston.hpp"

namespace casray {
namespace assembly {

namespace {

using even_engine::SumOptions;
using even_engine::SumResult;

// The converged flag tracks the order-truncation criterion (the controller's
// job).  Cubature error estimates on indicator integrands are upper bounds
// that cannot reach the tolerances true errors do; they only veto
// convergence when grossly out of range.
constexpr double kQuadratureVetoFactor = 10.0;

void finalizeChannel(ChannelConvergence& ch) {
  ch.relDiffs.clear();
  for (std::size_t i = 0; i + 1 < ch.partials.size(); ++i) {
    const double base = ch.partials[i];
    ch.relDiffs.push_back(base != 0.0
                              ? (ch.partials[i + 1] - ch.partials[i]) / base
                              : 0.0);
  }
  if (!ch.orders.empty()) {
    std::vector<int> diffOrders(ch.orders.begin() + 1, ch.orders.end());
    ch.slopeValid = fitLogLogSlope(diffOrders, ch.relDiffs, 7,
                                   std::numeric_limits<int>::max(),
                                   ch.fittedSlope);
  }
}

SumOptions evenOptions(const EngineSettings& s) {
  SumOptions o;
  o.tolerance = s.tolerance;
  o.termCap = s.evenTermCap;
  o.orderCap = s.evenOrderCap;
  o.recordPartials = s.recordConvergence;
  return o;
}

ChannelConvergence evenChannelReport(const SumResult& r) {
  ChannelConvergence ch;
  for (const auto& [order, partial] : r.partials) {
    ch.orders.push_back(order);
    ch.partials.push_back(partial);
  }
  ch.terminatedBy = r.converged ? Terminated::Tolerance : Terminated::Cap;
  finalizeChannel(ch);
  return ch;
}

struct OddChannel {
  double energy = 0.0;
  double force = 0.0;
  double quadratureError = 0.0;
  bool tailOk = false;
  bool quadratureOk = true;
  int lastOrder = 0;
  ChannelConvergence report;
};

OddChannel oddChannel(const Geometry& g, const EngineSettings& s,
                      bool wantForce, int threads) {
  odd_engine::OddSettings os = s.odd;
  os.withForce = wantForce;

  OddChannel ch;
  KahanSum energy, force, err;
  double tailWindow[2] = {0, 0};
  int tailCount = 0;
  const int cap = s.oddFixedOrder > 0 ? s.oddFixedOrder : s.oddOrderCap;
  ch.report.terminatedBy = Terminated::Cap;
  for (int r = 3; r <= cap; r += 2) {
    const odd_engine::OrderResult ores = odd_engine::oddOrderSum(g, r, os, threads);
    energy.add(ores.energy);
    force.add(ores.forceTerm);
    err.add(ores.errorEstimate);
    ch.lastOrder = r;
    if (s.recordConvergence) {
      ch.report.orders.push_back(r);
      ch.report.partials.push_back(wantForce ? force.value() : energy.value());
    }
    // Measured-increment tail: order increments decay ~K/r^2 over step-2
    // orders, leaving a tail ~t_r * r/2.
    const double t = std::abs(ores.energy);
    if (t > 0.0) {
      tailWindow[tailCount % 2] = t * r / 2.0;
      ++tailCount;
    }
    const double tail = std::max(tailWindow[0], tailWindow[1]);
    if (s.oddFixedOrder == 0 && tailCount >= 2 && r >= 7 &&
        tail <= s.tolerance * std::abs(energy.value())) {
      ch.tailOk = true;
      ch.report.terminatedBy = Terminated::Tolerance;
      break;
    }
  }
  ch.energy = energy.value();
  ch.force = force.value();
  ch.quadratureError = err.value();
  ch.quadratureOk = ch.quadratureError <=
                    kQuadratureVetoFactor * s.tolerance *
                        std::max(std::abs(ch.energy), 1e-300);
  if (s.oddFixedOrder > 0) {
    // Explicit order request: the truncation criterion is the caller's.
    ch.tailOk = true;
  }
  finalizeChannel(ch.report);
  return ch;
}

bool pistonApplies(const Geometry& g, const EngineSettings& s) {
  return s.usePistonShortcut && g.h == 0.0 && s.oddFixedOrder == 0 &&
         s.evenOrderCap == 0;
}

ForceChannels normalizeByPfa(const ForceChannels& f, double pfaPairForce) {
  ForceChannels n;
  n.evenPaths = f.evenPaths / pfaPairForce;
  n.pfa = f.pfa / pfaPairForce;
  n.oddPaths = f.oddPaths / pfaPairForce;
  n.neumann = f.neumann / pfaPairForce;
  n.dirichlet = f.dirichlet / pfaPairForce;
  n.total = f.total / pfaPairForce;
  return n;
}

ForceBreakdown assembleForces(double evenPaths, double pfa, double oddPaths) {
  ForceBreakdown fb;
  fb.force.evenPaths = evenPaths;
  fb.force.pfa = pfa;
  fb.force.oddPaths = oddPaths;
  fb.force.neumann = evenPaths + pfa + oddPaths;
  fb.force.dirichlet = evenPaths + pfa - oddPaths;
  fb.force.total = 2.0 * (evenPaths + pfa);
  fb.normalizedByPfa = normalizeByPfa(fb.force, 2.0 * pfa);
  return fb;
}

}  // namespace

EnergyResult energyBreakdown(const Geometry& g, const EngineSettings& s) {
  EnergyResult res;
  if (pistonApplies(g, s)) {
    const double even = piston::pistonEvenEnergy(g.a, g.s);
    const double odd = piston::pistonOddEnergy(g.a, g.s);
    res.energy = makeEnergyBreakdown(even, even_engine::pfaEnergy(g), odd);
    res.converged = true;
    return res;
  }

  const SumResult evenRes = even_engine::evenEnergy(g, evenOptions(s));
  const OddChannel odd = oddChannel(g, s, /*wantForce=*/false, s.threads);

  res.energy = makeEnergyBreakdown(evenRes.value, even_engine::pfaEnergy(g),
                                   odd.energy);
  res.report.even = evenChannelReport(evenRes);
  res.report.odd = odd.report;
  res.evenOrder = evenRes.lastOrder;
  res.oddOrder = odd.lastOrder;
  res.oddQuadratureError = odd.quadratureError;
  res.converged = evenRes.converged && odd.tailOk && odd.quadratureOk;
  return res;
}

ForceResult forceBreakdown(const Geometry& g, const EngineSettings& s) {
  ForceResult res;
  if (pistonApplies(g, s)) {
    res.force = assembleForces(piston::pistonEvenForce(g.a, g.s),
                               even_engine::pfaForce(g),
                               piston::pistonOddForce(g.a, g.s));
    res.converged = true;
    return res;
  }

  const SumResult evenRes = even_engine::evenForce(g, evenOptions(s));
  const OddChannel odd = oddChannel(g, s, /*wantForce=*/true, s.threads);

  res.force =
      assembleForces(evenRes.value, even_engine::pfaForce(g), odd.force);
  res.report.even = evenChannelReport(evenRes);
  res.report.odd = odd.report;
  res.evenOrder = evenRes.lastOrder;
  res.oddOrder = odd.lastOrder;
  res.converged = evenRes.converged && odd.tailOk && odd.quadratureOk;
  return res;
}

namespace {

SweepRecord sweepPoint(const Geometry& g, const EngineSettings& s,
                       Normalization normalization) {
  const auto t0 = std::chrono::steady_clock::now();
  const ForceResult fr = forceBreakdown(g, s);
  const auto t1 = std::chrono::steady_clock::now();

  SweepRecord rec{g, fr.force, fr.converged, fr.evenOrder, fr.oddOrder,
                  0.0,        0.0,          0.0};
  rec.normalizationForce = normalization == Normalization::Pfa
                               ? 2.0 * even_engine::pfaForce(g)
                               : piston::pistonTotalForce(g.a, g.s);
  rec.totalOverNormalization = fr.force.force.total / rec.normalizationForce;
  rec.seconds = std::chrono::duration<double>(t1 - t0).count();
  return rec;
}

SweepResult runSweep(const std::vector<Geometry>& points,
                     const EngineSettings& settings,
                     Normalization normalization, bool locateExtremum) {
  EngineSettings inner = settings;
  inner.threads = 1;  // parallelism is across sweep points

  std::vector<std::optional<SweepRecord>> slots(points.size());
  parallelFor(points.size(), settings.threads, [&](std::size_t i) {
    slots[i] = sweepPoint(points[i], inner, normalization);
  });

  SweepResult out;
  out.allConverged = true;
  out.records.reserve(points.size());
  for (auto& slot : slots) {
    out.allConverged = out.allConverged && slot->converged;
    out.records.push_back(std::move(*slot));
  }

  if (locateExtremum && out.records.size() >= 3) {
    std::size_t best = 0;
    double bestAbs = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.records.size(); ++i) {
      const double f = std::abs(out.records[i].force.force.total);
      if (f < bestAbs) {
        bestAbs = f;
        best = i;
      }
    }
    if (best > 0 && best + 1 < out.records.size()) {
      // quadratic interpolation through the three grid points around the
      // minimum of |F_total|
      const double x0 = out.records[best - 1].geometry.h;
      const double x1 = out.records[best].geometry.h;
      const double x2 = out.records[best + 1].geometry.h;
      const double y0 = std::abs(out.records[best - 1].force.force.total);
      const double y1 = std::abs(out.records[best].force.force.total);
      const double y2 = std::abs(out.records[best + 1].force.force.total);
      const double d01 = (y1 - y0) / (x1 - x0);
      const double d12 = (y2 - y1) / (x2 - x1);
      const double curv = (d12 - d01) / (x2 - x0);
      Extremum ex;
      if (curv != 0.0) {
        // vertex of the Newton-form parabola through the three points
        ex.h = 0.5 * ((x0 + x1) - d01 / curv);
        const double t = ex.h;
        ex.absForce = y0 + d01 * (t - x0) + curv * (t - x0) * (t - x1);
      } else {
        ex.h = x1;
        ex.absForce = y1;
      }
      out.extremum = ex;
    }
  }
  return out;
}

}  // namespace

SweepResult sweepH(double a, double s, const std::vector<double>& hValues,
                   const EngineSettings& settings) {
  std::vector<Geometry> points;
  points.reserve(hValues.size());
  for (double h : hValues) points.emplace_back(a, s, h);
  return runSweep(points, settings, Normalization::Pfa,
                  /*locateExtremum=*/true);
}

SweepResult sweepA(const std::vector<double>& aValues, double s, double h,
                   const EngineSettings& settings,
                   Normalization normalization) {
  std::vector<Geometry> points;
  points.reserve(aValues.size());
  for (double a : aValues) points.emplace_back(a, s, h);
  return runSweep(points, settings, normalization,
                  /*locateExtremum=*/false);
}

bool fitLogLogSlope(const std::vector<int>& orders,
                    const std::vector<double>& diffs, int minOrder,
                    int maxOrder, double& slopeOut) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < orders.size() && i < diffs.size(); ++i) {
    if (orders[i] < minOrder || orders[i] > maxOrder) continue;
    const double d = std::abs(diffs[i]);
    if (d <= 0.0) continue;
    const double x = std::log(static_cast<double>(orders[i]));
    const double y = std::log(d);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 4) return false;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return false;
  slopeOut = (n * sxy - sx * sy) / denom;
  return true;
}

}  // namespace assembly
}  // namespace casray
