#include <doctest.h>

#include <cmath>
#include <random>

#include "casray/core.hpp"
#include "casray/even_engine.hpp"
#include "casray/lattice.hpp"
#include "casray/piston.hpp"
#include "oracles.hpp"

using namespace casray;
using namespace casray::even_engine;

TEST_CASE("pfa closed forms") {
  const Geometry g(1.0, 1.0, 0.0);
  CHECK(pfaEnergy(g) == doctest::Approx(-kZeta3 / (16.0 * kPi)).epsilon(1e-15));
  CHECK(pfaForce(g) == doctest::Approx(-kZeta3 / (8.0 * kPi)).epsilon(1e-15));
  const Geometry g2(2.0, 3.0, 0.1);
  CHECK(pfaEnergy(g2) ==
        doctest::Approx(-3.0 * kZeta3 / (16.0 * kPi * 4.0)).epsilon(1e-15));
  CHECK(pfaForce(g2) ==
        doctest::Approx(-3.0 * kZeta3 / (8.0 * kPi * 8.0)).epsilon(1e-15));
}

TEST_CASE("single even term at h = 0") {
  const Geometry g(1.0, 1.0, 0.0);
  const EvenTerm t = evenTerm(g, 1, 1);
  CHECK(t.occupancy == doctest::Approx(1.0));  // occ * ntilde = s at h = 0
  CHECK(t.length == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
  // -(occnt*a/pi)/l^3 = -1/(16*sqrt(2)*pi)
  CHECK(t.value ==
        doctest::Approx(-1.0 / (16.0 * std::sqrt(2.0) * kPi)).epsilon(1e-14));
}

TEST_CASE("occupancy vanishes when the strip closes") {
  // ntilde = 3 and L - 2*h*ntilde < 0: the family is fully blocked.
  const Geometry g(1.0, 1.0, 0.4);  // L = 1.8
  CHECK(evenTermValue(g, 9, 3) == 0.0);
  CHECK(evenTermForce(g, 9, 3) == 0.0);
  // ntilde = 2 at the same h is still open.
  CHECK(evenTermValue(g, 4, 2) < 0.0);
}

TEST_CASE("term value matches the direct formula") {
  const Geometry g(1.3, 0.7, 0.21);
  const double L = g.period();
  std::mt19937 rng(42);
  std::uniform_int_distribution<int> d(1, 12);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = d(rng), m = d(rng);
    const int nt = n / std::gcd(n, m);
    const double occnt = std::max(L - 2.0 * g.h * nt, 0.0);
    const double ell = std::hypot(2.0 * n * g.a, 2.0 * m * L);
    const double expect = -(occnt * g.a / kPi) / (ell * ell * ell);
    CHECK(evenTermValue(g, n, m) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("allowed-measure Monte Carlo matches the occupancy factor") {
  // Even image (n,m) = (2,1) at h = 0.2: allowed start fraction should be
  // ntilde*occ/L = (L - 2*h*ntilde)/L = 0.6/1.4.
  const Geometry g(1.0, 1.0, 0.2);
  ImagePoint ip;
  ip.index = LatticeIndex::reduce(2, 1);
  ip.hParity = Parity::Even;
  ip.vParity = Parity::Even;
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> ux(0.0, g.a), uy(0.0, g.period());
  const int N = 20000;
  int allowed = 0;
  for (int i = 0; i < N; ++i)
    if (isAllowed(g, {ux(rng), uy(rng)}, ip)) ++allowed;
  const double p = 0.6 / 1.4;
  const double sigma = std::sqrt(p * (1.0 - p) / N);
  CHECK(std::abs(static_cast<double>(allowed) / N - p) < 3.0 * sigma);

  // Fully blocked family: ntilde = 2, L - 2*h*ntilde < 0 at h = 0.6.
  const Geometry gb(1.0, 1.0, 0.6);
  ImagePoint blocked;
  blocked.index = LatticeIndex::reduce(4, 2);
  blocked.hParity = Parity::Even;
  blocked.vParity = Parity::Even;
  std::uniform_real_distribution<double> bx(0.0, gb.a), by(0.0, gb.period());
  for (int i = 0; i < N; ++i)
    CHECK_FALSE(isAllowed(gb, {bx(rng), by(rng)}, blocked));
}

TEST_CASE("quadrant sum at h = 0 reproduces the Epstein closed form") {
  for (double a : {1.0, 2.0}) {
    for (double s : {1.0, 2.0}) {
      SumOptions opts;
      opts.tolerance = 1e-4;  // the ~2/d shell tail needs d ~ 2e4 here
      opts.termCap = 300'000'000;
      const SumResult r = evenEnergy(Geometry(a, s, 0.0), opts);
      CHECK(r.converged);
      const double exact = piston::pistonEvenEnergy(a, s);
      CHECK(r.value == doctest::Approx(exact).epsilon(3e-4));
    }
  }
}

TEST_CASE("analytic force matches a finite difference at fixed truncation") {
  const Geometry g(1.0, 1.0, 0.3);
  SumOptions opts;
  opts.orderCap = 400;
  opts.tolerance = 0.0;
  const double fAnalytic = evenForce(g, opts).value;
  const double delta = 1e-5;
  auto energyAt = [&](double a) {
    return evenEnergy(g.withA(a), opts).value;
  };
  const double fd =
      (energyAt(g.a + delta) - energyAt(g.a - delta)) / (2.0 * delta);
  CHECK(fAnalytic == doctest::Approx(-fd).epsilon(1e-7));
}

TEST_CASE("tail controller delivers the requested tolerance") {
  const Geometry g(1.0, 1.0, 0.1);
  SumOptions lo, hi;
  lo.tolerance = 1e-3;
  hi.tolerance = 1e-8;
  const SumResult rl = evenEnergy(g, lo);
  const SumResult rh = evenEnergy(g, hi);
  CHECK(rl.converged);
  CHECK(rl.stoppedBy == StopReason::Tolerance);
  CHECK(rl.achievedTolerance <= lo.tolerance);
  CHECK(std::abs(rl.value - rh.value) <= 5.0 * lo.tolerance * std::abs(rh.value));
}

TEST_CASE("order cap and term cap stop honestly") {
  const Geometry g(1.0, 1.0, 0.1);
  SumOptions capped;
  capped.orderCap = 10;
  capped.tolerance = 1e-12;
  capped.recordPartials = true;
  const SumResult r = evenEnergy(g, capped);
  CHECK_FALSE(r.converged);
  CHECK(r.stoppedBy == StopReason::OrderCap);
  CHECK(r.lastOrder <= 10);
  REQUIRE(!r.partials.empty());
  CHECK(r.partials.back().second == r.value);
  for (size_t i = 1; i < r.partials.size(); ++i)
    CHECK(r.partials[i].first > r.partials[i - 1].first);

  SumOptions tiny;
  tiny.termCap = 10;
  tiny.tolerance = 1e-12;
  const SumResult rt = evenEnergy(g, tiny);
  CHECK_FALSE(rt.converged);
  CHECK(rt.stoppedBy == StopReason::TermCap);
  CHECK(rt.terms <= 2 * tiny.termCap);  // finishes the current shell
}

TEST_CASE("uniform scaling: E ~ 1/lambda, F ~ 1/lambda^2") {
  const Geometry g(1.0, 1.2, 0.25);
  SumOptions opts;
  opts.orderCap = 60;
  opts.tolerance = 0.0;
  const double e1 = evenEnergy(g, opts).value;
  const double f1 = evenForce(g, opts).value;
  for (double lam : {2.0, 0.5}) {
    const Geometry gs = g.scaled(lam);
    CHECK(evenEnergy(gs, opts).value ==
          doctest::Approx(e1 / lam).epsilon(1e-13));
    CHECK(evenForce(gs, opts).value ==
          doctest::Approx(f1 / (lam * lam)).epsilon(1e-13));
  }
}
