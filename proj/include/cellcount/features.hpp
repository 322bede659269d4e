#pragma once

#include <array>

#include "cellcount/image.hpp"

namespace cellcount {

inline constexpr int kFeatureDim = 33;

// Layout: [0] global average intensity; [1..16] mean intensity of the 4x4
// grid cells (row-major; remainder pixels go to the last row/column; empty
// cells of tiny images read 0); [17..32] 16-bin intensity histogram over
// [16k, 16k+15], normalized to sum 1.
struct FeatureVector {
    std::array<double, kFeatureDim> values{};
};

FeatureVector extract_features(const GrayImage& image);

}  // namespace cellcount
