#pragma once

// Convergence-controlled summation over reflection order, force evaluation,
// polarization mapping, normalization, and the h- and a-sweep drivers.

#include <cstdint>
#include <optional>
#include <vector>

#include "casray/odd_engine.hpp"
#include "casray/types.hpp"

namespace casray {
namespace assembly {

enum class Terminated { Tolerance, Cap };

struct ChannelConvergence {
  std::vector<int> orders;          // reflection orders evaluated
  std::vector<double> partials;     // channel partial sums at those orders
  std::vector<double> relDiffs;     // (E_{r+1} - E_r)/E_r, size orders-1
  double fittedSlope = 0.0;         // log-log slope of |relDiffs| vs order
  bool slopeValid = false;          // needs >= 4 usable points
  Terminated terminatedBy = Terminated::Tolerance;
};

struct ConvergenceReport {
  ChannelConvergence even;
  ChannelConvergence odd;
};

struct EngineSettings {
  double tolerance = 1e-4;             // relative, on estimated true tails
  std::uint64_t evenTermCap = 1'000'000;
  int evenOrderCap = 0;                // > 0: stop the even sum at this order
  int oddOrderCap = 201;               // safety cap on odd reflection order
  int oddFixedOrder = 0;               // > 0: odd channel at exactly this order
  odd_engine::OddSettings odd;
  int threads = 0;                     // 0: hardware concurrency
  bool recordConvergence = true;
  bool usePistonShortcut = true;       // exact closed forms when h == 0
};

struct EnergyResult {
  EnergyBreakdown energy;
  ConvergenceReport report;
  bool converged = false;
  int evenOrder = 0;
  int oddOrder = 0;
  double oddQuadratureError = 0.0;  // aggregate cubature error estimate
};

EnergyResult energyBreakdown(const Geometry& g,
                             const EngineSettings& settings = {});

struct ForceResult {
  ForceBreakdown force;
  ConvergenceReport report;
  bool converged = false;
  int evenOrder = 0;
  int oddOrder = 0;
};

ForceResult forceBreakdown(const Geometry& g,
                           const EngineSettings& settings = {});

enum class Normalization { Pfa, PistonAtSameA };

struct SweepRecord {
  Geometry geometry;
  ForceBreakdown force;
  bool converged = false;
  int evenOrder = 0;
  int oddOrder = 0;
  double normalizationForce = 0.0;    // pair force used for the ratio column
  double totalOverNormalization = 0.0;
  double seconds = 0.0;
};

struct Extremum {
  double h = 0.0;         // interpolated location
  double absForce = 0.0;  // interpolated |F_total|
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::optional<Extremum> extremum;  // interior |F_total| extremum (sweepH)
  bool allConverged = false;
};

// One record per h; points run in parallel, records keep input order.
SweepResult sweepH(double a, double s, const std::vector<double>& hValues,
                   const EngineSettings& settings = {});

SweepResult sweepA(const std::vector<double>& aValues, double s, double h,
                   const EngineSettings& settings = {},
                   Normalization normalization = Normalization::Pfa);

// Least-squares slope of log|diffs| vs log(orders) restricted to
// minOrder <= order <= maxOrder, skipping zero diffs; false if < 4 points.
bool fitLogLogSlope(const std::vector<int>& orders,
                    const std::vector<double>& diffs, int minOrder,
                    int maxOrder, double& slopeOut);

}  // namespace assembly
}  // namespace casray
