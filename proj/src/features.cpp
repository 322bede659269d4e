#include "cellcount/features.hpp"

namespace cellcount {

FeatureVector extract_features(const GrayImage& image) {
    FeatureVector out;

    std::uint64_t total = 0;
    std::array<std::uint64_t, 16> hist{};
    for (std::uint8_t v : image.pixels()) {
        total += v;
        ++hist[static_cast<std::size_t>(v >> 4)];
    }
    const double n = static_cast<double>(image.pixel_count());
    out.values[0] = static_cast<double>(total) / n;

    // 4x4 grid; remainder pixels belong to the last row/column of cells
    const int cw = image.width() / 4;
    const int ch = image.height() / 4;
    for (int gy = 0; gy < 4; ++gy) {
        const int y0 = gy * ch;
        const int y1 = (gy == 3) ? image.height() : (gy + 1) * ch;
        for (int gx = 0; gx < 4; ++gx) {
            const int x0 = gx * cw;
            const int x1 = (gx == 3) ? image.width() : (gx + 1) * cw;
            std::uint64_t sum = 0;
            for (int row = y0; row < y1; ++row) {
                for (int col = x0; col < x1; ++col) sum += image.at(row, col);
            }
            const long long cell_pixels = static_cast<long long>(y1 - y0) * (x1 - x0);
            out.values[static_cast<std::size_t>(1 + gy * 4 + gx)] =
                cell_pixels > 0 ? static_cast<double>(sum) / static_cast<double>(cell_pixels)
                                : 0.0;
        }
    }

    for (std::size_t b = 0; b < 16; ++b) {
        out.values[17 + b] = static_cast<double>(hist[b]) / n;
    }
    return out;
}

}  // namespace cellcount
