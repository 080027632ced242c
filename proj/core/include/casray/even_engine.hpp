#pragma once

// Even-path channel: closed-form lattice sum over the quadrant n,m >= 1,
// the PFA (n,0) series, and analytic a-derivatives.
//
// Per-term value (hbar*c = 1):
//   E_{n,m} = -(1/4pi) * occ * 4*ntilde*a / l^3,   l = sqrt((2na)^2 + (2mL)^2)
// with occupancy occ = max(L/ntilde - 2h, 0), ntilde = n/gcd(n,m), L = s+2h.
// The quadrant sum already accounts for the (-n,-m) partners.

#include <cstdint>
#include <utility>
#include <vector>

#include "casray/types.hpp"

namespace casray {
namespace even_engine {

struct EvenTerm {
  int n = 0;
  int m = 0;
  double occupancy = 0.0;
  double length = 0.0;
  double value = 0.0;
};

EvenTerm evenTerm(const Geometry& g, int n, int m);

// Energy contribution of the (n,m) even family (n,m >= 1).
double evenTermValue(const Geometry& g, int n, int m);

// Analytic -d/da of evenTermValue (occupancy is a-independent).
double evenTermForce(const Geometry& g, int n, int m);

enum class StopReason { Tolerance, TermCap, OrderCap };

struct SumOptions {
  double tolerance = 1e-4;        // relative, on the estimated true tail
  std::uint64_t termCap = 1'000'000;
  int orderCap = 0;               // if > 0, sum exactly to reflection order
                                  // 2*orderCap/... (r = 2(n+m) <= orderCap)
  bool recordPartials = false;    // keep per-order partial sums
};

struct SumResult {
  double value = 0.0;
  bool converged = false;
  StopReason stoppedBy = StopReason::Tolerance;
  double tailEstimate = 0.0;       // absolute, of the discarded tail
  double achievedTolerance = 0.0;  // tailEstimate / |value|
  std::uint64_t terms = 0;
  int lastOrder = 0;               // last completed reflection order r=2(n+m)
  // (reflection order, partial sum) pairs when recordPartials is set
  std::vector<std::pair<int, double>> partials;
};

// Quadrant sum of evenTermValue by diagonal shells d = n+m (reflection order
// r = 2d), with compensated accumulation and a measured-increment tail
// estimate: increments decay ~K/d^2, so the tail beyond shell d is ~t_d*d.
// Stops when the tail estimate drops below tolerance*|sum|.
SumResult evenEnergy(const Geometry& g, const SumOptions& opts = {});

// Same controller applied to the analytic term derivatives: -dE_even/da.
SumResult evenForce(const Geometry& g, const SumOptions& opts = {});

// PFA series, E = -s*zeta(3)/(16*pi*a^2) and F = -s*zeta(3)/(8*pi*a^3).
double pfaEnergy(const Geometry& g);
double pfaForce(const Geometry& g);

}  // namespace even_engine
}  // namespace casray
