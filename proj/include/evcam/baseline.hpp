#pragma once

#include <vector>

#include "evcam/contrast_sensor.hpp"
#include "evcam/pipeline.hpp"

namespace evcam {

struct BaselineParams {
    int diff_threshold = 25;  // absolute intensity change that marks a pixel as foreground
    int min_pixels = 20;
};

/// Row-major 64x128 foreground mask.
using Mask = std::vector<std::uint8_t>;

/// 3x3 erosion/dilation; pixels outside the plane are ignored.
Mask erode3(const Mask& m);
Mask dilate3(const Mask& m);

struct Component8 {
    Blob blob;
    std::vector<int> pixels;  // row * kCols + col
};

/// 8-connected components in raster order of their first pixel.
std::vector<Component8> label_components(const Mask& m);

/// Frame differencing, opening then closing, 8-connected labeling and a
/// minimum size filter.
std::vector<Blob> baseline_detect(const GrayFrame& gray, const GrayFrame& prev_gray, const BaselineParams& params);

}  // namespace evcam
