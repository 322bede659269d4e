#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cellcount/errors.hpp"

namespace cellcount {

// Owned 8-bit greyscale raster, row-major. The carrier of all pixel math.
class GrayImage {
public:
    GrayImage(int width, int height, std::uint8_t fill = 0);
    GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixel_count() const { return pixels_.size(); }

    std::uint8_t at(int row, int col) const {
        return pixels_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(col)];
    }
    std::uint8_t& at(int row, int col) {
        return pixels_[static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
                       static_cast<std::size_t>(col)];
    }

    std::span<const std::uint8_t> pixels() const { return pixels_; }
    std::span<std::uint8_t> pixels() { return pixels_; }

    bool same_size(const GrayImage& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool operator==(const GrayImage&) const = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
};

enum class StainType { Nuclei, Body };

// BBBC005-style focus blur levels.
enum class BlurLevel : int { L1 = 1, L23 = 23, L48 = 48 };

BlurLevel blur_level_from_int(int level);
inline int blur_level_value(BlurLevel b) { return static_cast<int>(b); }

// Per-pixel maximum over a set of equal-sized images.
GrayImage pixelwise_max(std::span<const GrayImage> images);
GrayImage pixelwise_max(const std::vector<GrayImage>& images);

// Mean pixel value, exact sum divided by pixel count.
double average_intensity(const GrayImage& image);

// Separable Gaussian convolution, kernel radius ceil(3*sigma), weights
// normalized to sum 1, border handled by clamping coordinates. Output is
// rounded half away from zero and clamped to [0, 255].
GrayImage gaussian_blur(const GrayImage& image, double sigma);

// Bilinear resampling with half-pixel-center alignment. Same rounding
// policy as gaussian_blur.
GrayImage resize_bilinear(const GrayImage& image, int new_width, int new_height);

}  // namespace cellcount
