#include "casray/lattice.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace casray {

namespace {

// Cell offsets compatible with a given crossing count along one axis:
// even count 2|n| pairs with even parity, odd count |2n-1| with odd parity
// (two offset solutions, n = (1 +- count)/2).
struct AxisChoice {
  int offset;
  Parity parity;
};

void axisChoices(int crossings, std::vector<AxisChoice>& out) {
  out.clear();
  if (crossings % 2 == 0) {
    const int n = crossings / 2;
    if (n == 0) {
      out.push_back({0, Parity::Even});
    } else {
      out.push_back({-n, Parity::Even});
      out.push_back({n, Parity::Even});
    }
  } else {
    out.push_back({(1 - crossings) / 2, Parity::Odd});
    out.push_back({(1 + crossings) / 2, Parity::Odd});
  }
}

}  // namespace

std::vector<ImagePoint> imagesAtOrder(int r) {
  if (r < 1) throw std::invalid_argument("imagesAtOrder: r >= 1");
  std::vector<ImagePoint> images;
  std::vector<AxisChoice> hs, vs;
  for (int cx = 0; cx <= r; ++cx) {
    axisChoices(cx, hs);
    axisChoices(r - cx, vs);
    for (const AxisChoice& hc : hs) {
      for (const AxisChoice& vc : vs) {
        ImagePoint ip;
        ip.index = LatticeIndex::reduce(hc.offset, vc.offset);
        ip.hParity = hc.parity;
        ip.vParity = vc.parity;
        ip.reflectionOrder = r;
        images.push_back(ip);
      }
    }
  }
  std::sort(images.begin(), images.end(),
            [](const ImagePoint& a, const ImagePoint& b) {
              return std::make_tuple(a.index.n, a.index.m,
                                     a.hParity == Parity::Odd,
                                     a.vParity == Parity::Odd) <
                     std::make_tuple(b.index.n, b.index.m,
                                     b.hParity == Parity::Odd,
                                     b.vParity == Parity::Odd);
            });
  return images;
}

std::vector<ImagePoint> enumerateImages(int maxReflectionOrder) {
  if (maxReflectionOrder < 1)
    throw std::invalid_argument("enumerateImages: maxReflectionOrder >= 1");
  std::vector<ImagePoint> images;
  for (int r = 1; r <= maxReflectionOrder; ++r) {
    std::vector<ImagePoint> slice = imagesAtOrder(r);
    images.insert(images.end(), slice.begin(), slice.end());
  }
  return images;
}

}  // namespace casray
