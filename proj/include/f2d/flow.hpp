#pragma once

#include "f2d/image.hpp"

namespace f2d {

/// Dense optical flow from the target image to a source image:
/// pixel (u, v) in the target corresponds to (u + du, v + dv) in the source.
struct FlowField {
  Image<double> du;
  Image<double> dv;
  Image<uint8_t> valid;  // 1 where the flow carries meaning

  FlowField() = default;
  FlowField(int width, int height)
      : du(width, height, 0.0), dv(width, height, 0.0), valid(width, height, 1) {}

  int width() const { return du.width(); }
  int height() const { return du.height(); }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < valid.size(); ++i) n += valid[i] ? 1 : 0;
    return n;
  }
};

}  // namespace f2d
