#include "casray/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "casray/core.hpp"

namespace casray {
namespace quadrature {

namespace {

constexpr int kMaxComponents = 8;

struct Cell {
  Rect rect;
  int depth;
  std::uint64_t id;  // creation order; deterministic tie-break
  double value[kMaxComponents];
  double error[kMaxComponents];
  double priority;  // sum of component error estimates
};

// Max-heap on (priority, older id wins ties).
struct CellLess {
  bool operator()(const Cell& a, const Cell& b) const {
    if (a.priority != b.priority) return a.priority < b.priority;
    return a.id > b.id;
  }
};

}  // namespace

CubatureResult integrate2D(const Rect& domain, int nComponents,
                           const VectorIntegrand& f,
                           const CubatureSettings& st) {
  if (nComponents < 1 || nComponents > kMaxComponents)
    throw std::invalid_argument("integrate2D: unsupported component count");
  if (!(st.relTolerance > 0.0) || !(st.absTolerance > 0.0))
    throw std::invalid_argument("integrate2D: tolerances must be > 0");
  if (!(domain.width() > 0.0) || !(domain.height() > 0.0))
    throw std::invalid_argument("integrate2D: empty domain");

  const int nc = nComponents;
  std::uint64_t evals = 0;
  std::uint64_t nextId = 0;

  double f0[kMaxComponents], fq[kMaxComponents], m4[kMaxComponents];

  // Midpoint pair on one cell: M1 = f(center)*A vs M4 = 2x2 composite.
  // Cell value is the Richardson combination M4 + (M4-M1)/3; the error
  // estimate |M4-M1| is an upper bound once the cell is smooth.
  auto evaluateCell = [&](Cell& c) {
    const Rect& r = c.rect;
    const double xc = 0.5 * (r.x0 + r.x1);
    const double yc = 0.5 * (r.y0 + r.y1);
    const double qx = 0.25 * r.width();
    const double qy = 0.25 * r.height();
    const double area = r.area();
    f(xc, yc, f0);
    for (int i = 0; i < nc; ++i) m4[i] = 0.0;
    for (int sx = -1; sx <= 1; sx += 2) {
      for (int sy = -1; sy <= 1; sy += 2) {
        f(xc + sx * qx, yc + sy * qy, fq);
        for (int i = 0; i < nc; ++i) m4[i] += fq[i];
      }
    }
    evals += 5;
    c.priority = 0.0;
    for (int i = 0; i < nc; ++i) {
      const double m1 = f0[i] * area;
      const double m4i = 0.25 * area * m4[i];
      c.value[i] = m4i + (m4i - m1) / 3.0;
      c.error[i] = std::abs(m4i - m1);
      c.priority += c.error[i];
    }
  };

  std::vector<Cell> heap;
  std::vector<Cell> frozen;
  double total[kMaxComponents] = {0};
  double totalErr[kMaxComponents] = {0};

  const int k = std::max(1, st.initialSplits);
  heap.reserve(static_cast<std::size_t>(k) * k + 64);
  for (int ix = 0; ix < k; ++ix) {
    for (int iy = 0; iy < k; ++iy) {
      Cell c;
      c.rect = {domain.x0 + domain.width() * ix / k,
                domain.y0 + domain.height() * iy / k,
                domain.x0 + domain.width() * (ix + 1) / k,
                domain.y0 + domain.height() * (iy + 1) / k};
      c.depth = 0;
      c.id = nextId++;
      evaluateCell(c);
      for (int i = 0; i < nc; ++i) {
        total[i] += c.value[i];
        totalErr[i] += c.error[i];
      }
      heap.push_back(c);
    }
  }
  std::make_heap(heap.begin(), heap.end(), CellLess{});

  const double minSize =
      st.minCellSize * std::max(domain.width(), domain.height());

  auto withinTolerance = [&]() {
    for (int i = 0; i < nc; ++i) {
      const double target =
          std::max(st.absTolerance, st.relTolerance * std::abs(total[i]));
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
    if (heap.empty() || evals >= st.maxEvaluations) break;

    std::pop_heap(heap.begin(), heap.end(), CellLess{});
    Cell parent = heap.back();
    heap.pop_back();

    if (parent.depth >= st.maxSubdivisions ||
        std::max(parent.rect.width(), parent.rect.height()) <= minSize) {
      frozen.push_back(parent);
      continue;
    }

    for (int i = 0; i < nc; ++i) {
      total[i] -= parent.value[i];
      totalErr[i] -= parent.error[i];
    }

    Cell a = parent, b = parent;
    a.depth = b.depth = parent.depth + 1;
    if (parent.rect.width() >= parent.rect.height()) {
      const double xm = 0.5 * (parent.rect.x0 + parent.rect.x1);
      a.rect.x1 = xm;
      b.rect.x0 = xm;
    } else {
      const double ym = 0.5 * (parent.rect.y0 + parent.rect.y1);
      a.rect.y1 = ym;
      b.rect.y0 = ym;
    }
    for (Cell* c : {&a, &b}) {
      c->id = nextId++;
      evaluateCell(*c);
      for (int i = 0; i < nc; ++i) {
        total[i] += c->value[i];
        totalErr[i] += c->error[i];
      }
      heap.push_back(*c);
      std::push_heap(heap.begin(), heap.end(), CellLess{});
    }
  }

  // Final compensated reduction over all leaves in creation order: accurate
  // and bitwise reproducible.
  std::vector<const Cell*> leaves;
  leaves.reserve(heap.size() + frozen.size());
  for (const Cell& c : heap) leaves.push_back(&c);
  for (const Cell& c : frozen) leaves.push_back(&c);
  std::sort(leaves.begin(), leaves.end(),
            [](const Cell* a, const Cell* b) { return a->id < b->id; });

  CubatureResult out;
  out.value.assign(nc, 0.0);
  out.errorEstimate.assign(nc, 0.0);
  for (int i = 0; i < nc; ++i) {
    KahanSum v, e;
    for (const Cell* c : leaves) {
      v.add(c->value[i]);
      e.add(c->error[i]);
    }
    out.value[i] = v.value();
    out.errorEstimate[i] = e.value();
  }
  out.evaluations = evals;
  out.converged = converged;
  return out;
}

ScalarResult integrate2D(const Rect& domain,
                         const std::function<double(double, double)>& f,
                         const CubatureSettings& settings) {
  auto vf = [&f](double x, double y, double* out) { out[0] = f(x, y); };
  CubatureResult r = integrate2D(domain, 1, vf, settings);
  return {r.value[0], r.errorEstimate[0], r.evaluations, r.converged};
}

namespace {

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

}  // namespace

CubatureResult integrate1D(const Interval& domain, int nComponents,
                           const LineIntegrand& f,
                           const CubatureSettings& st) {
  if (nComponents < 1 || nComponents > kMaxComponents)
    throw std::invalid_argument("integrate1D: unsupported component count");
  if (!(st.relTolerance > 0.0) || !(st.absTolerance > 0.0))
    throw std::invalid_argument("integrate1D: tolerances must be > 0");
  if (!(domain.length() > 0.0))
    throw std::invalid_argument("integrate1D: empty domain");

  const int nc = nComponents;
  std::uint64_t evals = 0;
  std::uint64_t nextId = 0;

  double f0[kMaxComponents], fa[kMaxComponents], fb[kMaxComponents];

  // M1 = f(mid)*w against the two-panel composite M2; value is the
  // Richardson combination M2 + (M2-M1)/3, error |M2-M1|.
  auto evaluateSegment = [&](Segment& c) {
    const double w = c.t1 - c.t0;
    const double mid = 0.5 * (c.t0 + c.t1);
    const double q = 0.25 * w;
    f(mid, f0);
    f(mid - q, fa);
    f(mid + q, fb);
    evals += 3;
    c.priority = 0.0;
    for (int i = 0; i < nc; ++i) {
      const double m1 = f0[i] * w;
      const double m2 = 0.5 * w * (fa[i] + fb[i]);
      c.value[i] = m2 + (m2 - m1) / 3.0;
      c.error[i] = std::abs(m2 - m1);
      c.priority += c.error[i];
    }
  };

  std::vector<Segment> heap;
  std::vector<Segment> frozen;
  double total[kMaxComponents] = {0};
  double totalErr[kMaxComponents] = {0};

  const int k = std::max(1, st.initialSplits);
  heap.reserve(static_cast<std::size_t>(k) + 64);
  for (int i = 0; i < k; ++i) {
    Segment c;
    c.t0 = domain.t0 + domain.length() * i / k;
    c.t1 = domain.t0 + domain.length() * (i + 1) / k;
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

  const double minSize = st.minCellSize * domain.length();

  auto withinTolerance = [&]() {
    for (int i = 0; i < nc; ++i) {
      const double target =
          std::max(st.absTolerance, st.relTolerance * std::abs(total[i]));
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
    if (heap.empty() || evals >= st.maxEvaluations) break;

    std::pop_heap(heap.begin(), heap.end(), SegmentLess{});
    Segment parent = heap.back();
    heap.pop_back();

    if (parent.depth >= st.maxSubdivisions ||
        (parent.t1 - parent.t0) <= minSize) {
      frozen.push_back(parent);
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

  std::vector<const Segment*> leaves;
  leaves.reserve(heap.size() + frozen.size());
  for (const Segment& c : heap) leaves.push_back(&c);
  for (const Segment& c : frozen) leaves.push_back(&c);
  std::sort(leaves.begin(), leaves.end(),
            [](const Segment* a, const Segment* b) { return a->id < b->id; });

  CubatureResult out;
  out.value.assign(nc, 0.0);
  out.errorEstimate.assign(nc, 0.0);
  for (int i = 0; i < nc; ++i) {
    KahanSum v, e;
    for (const Segment* c : leaves) {
      v.add(c->value[i]);
      e.add(c->error[i]);
    }
    out.value[i] = v.value();
    out.errorEstimate[i] = e.value();
  }
  out.evaluations = evals;
  out.converged = converged;
  return out;
}

ScalarResult integrate1D(const Interval& domain,
                         const std::function<double(double)>& f,
                         const CubatureSettings& settings) {
  auto vf = [&f](double t, double* out) { out[0] = f(t); };
  CubatureResult r = integrate1D(domain, 1, vf, settings);
  return {r.value[0], r.errorEstimate[0], r.evaluations, r.converged};
}

}  // namespace quadrature
}  // namespace casray
