#include <doctest.h>

#include <cmath>
#include <vector>

#include "casray/assembly.hpp"
#include "casray/even_engine.hpp"
#include "casray/piston.hpp"
#include "oracles.hpp"

using namespace casray;
using namespace casray::assembly;

static EngineSettings cheap() {
  EngineSettings s;
  s.tolerance = 1e-3;
  s.odd.cubature.relTolerance = 1e-3;
  s.odd.cubature.maxEvaluations = 400'000;
  s.threads = 1;
  return s;
}

TEST_CASE("piston shortcut returns the closed forms") {
  const Geometry g(1.0, 1.0, 0.0);
  const EnergyResult er = energyBreakdown(g);
  CHECK(er.converged);
  CHECK(er.energy.evenPaths == piston::pistonEvenEnergy(1.0, 1.0));
  CHECK(er.energy.oddPaths == piston::pistonOddEnergy(1.0, 1.0));
  CHECK(er.energy.pfa == even_engine::pfaEnergy(g));
  CHECK(er.energy.oddPaths ==
        doctest::Approx(-oracle::kPiOver24).epsilon(1e-14));

  const ForceResult fr = forceBreakdown(g);
  CHECK(fr.converged);
  CHECK(fr.force.force.oddPaths ==
        doctest::Approx(-oracle::kPiOver48).epsilon(1e-14));
  CHECK(fr.force.force.total ==
        doctest::Approx(piston::pistonTotalForce(1.0, 1.0)).epsilon(1e-14));
}

TEST_CASE("generic engine agrees with the shortcut at h = 0") {
  const Geometry g(1.0, 1.0, 0.0);
  EngineSettings s = cheap();
  s.usePistonShortcut = false;
  s.oddFixedOrder = 41;  // 1/r tail: truncation error ~ 6% here
  const EnergyResult er = energyBreakdown(g, s);
  CHECK(er.energy.evenPaths ==
        doctest::Approx(piston::pistonEvenEnergy(1.0, 1.0)).epsilon(3e-3));
  const double oddExact = -oracle::kPiOver24;
  CHECK(er.energy.oddPaths < 0.0);
  CHECK(std::abs(er.energy.oddPaths - oddExact) < 0.15 * std::abs(oddExact));
  // The fixed-order run reports the requested truncation.
  CHECK(er.oddOrder == 41);
  CHECK(er.report.odd.terminatedBy == Terminated::Cap);
}

TEST_CASE("force identities and report bookkeeping off the piston") {
  const Geometry g(1.0, 1.0, 0.25);
  EngineSettings s = cheap();
  const ForceResult fr = forceBreakdown(g, s);
  CHECK(fr.converged);
  const ForceChannels& f = fr.force.force;
  CHECK(f.neumann == f.evenPaths + f.pfa + f.oddPaths);
  CHECK(f.dirichlet == f.evenPaths + f.pfa - f.oddPaths);
  CHECK(f.total == 2.0 * (f.evenPaths + f.pfa));
  CHECK(f.pfa < 0.0);
  CHECK(fr.force.normalizedByPfa.total ==
        doctest::Approx(f.total / (2.0 * f.pfa)).epsilon(1e-14));
  CHECK(fr.evenOrder > 0);
  CHECK(fr.oddOrder >= 3);
  // partial-sum records end at the reported channel values
  REQUIRE(!fr.report.odd.partials.empty());
  CHECK(fr.report.odd.partials.back() ==
        doctest::Approx(f.oddPaths).epsilon(1e-14));
  CHECK(fr.report.odd.relDiffs.size() + 1 == fr.report.odd.partials.size());
  REQUIRE(!fr.report.even.partials.empty());
  CHECK(fr.report.even.partials.back() ==
        doctest::Approx(f.evenPaths).epsilon(1e-14));
}

TEST_CASE("energy partial records are consistent") {
  const Geometry g(1.0, 1.0, 0.3);
  EngineSettings s = cheap();
  const EnergyResult er = energyBreakdown(g, s);
  CHECK(er.converged);
  REQUIRE(!er.report.even.partials.empty());
  CHECK(er.report.even.partials.back() ==
        doctest::Approx(er.energy.evenPaths).epsilon(1e-14));
  REQUIRE(!er.report.odd.partials.empty());
  CHECK(er.report.odd.partials.back() ==
        doctest::Approx(er.energy.oddPaths).epsilon(1e-14));
  CHECK(er.oddQuadratureError >= 0.0);
}

TEST_CASE("log-log slope fit") {
  std::vector<int> orders;
  std::vector<double> diffs;
  for (int r = 8; r <= 40; r += 2) {
    orders.push_back(r);
    diffs.push_back(2.5 * std::pow(static_cast<double>(r), -3.0));
  }
  double slope = 0.0;
  REQUIRE(fitLogLogSlope(orders, diffs, 8, 40, slope));
  CHECK(slope == doctest::Approx(-3.0).epsilon(1e-10));

  // window excludes everything but 3 points -> not enough
  CHECK_FALSE(fitLogLogSlope(orders, diffs, 36, 40, slope));

  // zero diffs are skipped
  std::vector<double> withZeros = diffs;
  withZeros[2] = 0.0;
  REQUIRE(fitLogLogSlope(orders, withZeros, 8, 40, slope));
  CHECK(slope == doctest::Approx(-3.0).epsilon(1e-9));
}

TEST_CASE("sweepH: records keep order; extremum only when interior") {
  EngineSettings s = cheap();
  s.oddFixedOrder = 3;

  // |F_total| decreases towards the interior zero crossing, so a grid on one
  // side has its minimum at the boundary: no extremum reported.
  const std::vector<double> hMono{0.0, 0.05, 0.1};
  const SweepResult mono = sweepH(1.0, 1.0, hMono, s);
  REQUIRE(mono.records.size() == 3);
  for (size_t i = 0; i < 3; ++i)
    CHECK(mono.records[i].geometry.h == hMono[i]);
  CHECK(std::abs(mono.records[0].force.force.total) >
        std::abs(mono.records[2].force.force.total));
  CHECK_FALSE(mono.extremum.has_value());

  // A grid straddling the |F_total| minimum reports an interpolated location
  // inside the bracket.
  const std::vector<double> hBracket{0.35, 0.475, 0.6};
  const SweepResult br = sweepH(1.0, 1.0, hBracket, s);
  REQUIRE(br.extremum.has_value());
  CHECK(br.extremum->h > 0.35);
  CHECK(br.extremum->h < 0.6);
  CHECK(br.extremum->absForce <
        std::abs(br.records.front().force.force.total));
}

TEST_CASE("sweepA normalizations") {
  EngineSettings s;  // defaults; h = 0 uses the shortcut
  const std::vector<double> as{1.0, 2.0};
  const SweepResult pfa = sweepA(as, 1.0, 0.0, s, Normalization::Pfa);
  REQUIRE(pfa.records.size() == 2);
  CHECK(pfa.allConverged);
  for (size_t i = 0; i < 2; ++i) {
    const SweepRecord& r = pfa.records[i];
    CHECK(r.geometry.a == as[i]);
    CHECK(r.normalizationForce ==
          doctest::Approx(2.0 * r.force.force.pfa).epsilon(1e-14));
    CHECK(r.totalOverNormalization ==
          doctest::Approx(r.force.force.total / (2.0 * r.force.force.pfa))
              .epsilon(1e-14));
  }
  const SweepResult pis = sweepA(as, 1.0, 0.0, s, Normalization::PistonAtSameA);
  for (const SweepRecord& r : pis.records)
    CHECK(r.totalOverNormalization == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sweep results are independent of the thread count") {
  EngineSettings s1 = cheap();
  s1.oddFixedOrder = 3;
  EngineSettings s4 = s1;
  s4.threads = 4;
  const std::vector<double> hs{0.2, 0.3, 0.4};
  const SweepResult r1 = sweepH(1.0, 1.0, hs, s1);
  const SweepResult r4 = sweepH(1.0, 1.0, hs, s4);
  REQUIRE(r1.records.size() == r4.records.size());
  for (size_t i = 0; i < r1.records.size(); ++i) {
    CHECK(r1.records[i].force.force.total == r4.records[i].force.force.total);
    CHECK(r1.records[i].force.force.oddPaths ==
          r4.records[i].force.force.oddPaths);
  }
}
