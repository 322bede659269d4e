#include "cellcount/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cellcount {

namespace {

std::uint8_t round_clamp_u8(double v) {
    // round half away from zero, then clamp to the 8-bit range
    const double r = (v < 0.0) ? std::ceil(v - 0.5) : std::floor(v + 0.5);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

}  // namespace

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw DimensionMismatch("image dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
    }
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width <= 0 || height <= 0) {
        throw DimensionMismatch("image dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
    }
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionMismatch("pixel buffer size " + std::to_string(pixels_.size()) +
                                " does not match " + std::to_string(width) + "x" +
                                std::to_string(height));
    }
}

BlurLevel blur_level_from_int(int level) {
    switch (level) {
        case 1: return BlurLevel::L1;
        case 23: return BlurLevel::L23;
        case 48: return BlurLevel::L48;
        default:
            throw Error("blur level must be one of {1, 23, 48}, got " + std::to_string(level));
    }
}

GrayImage pixelwise_max(std::span<const GrayImage> images) {
    if (images.empty()) {
        throw EmptyInput("pixelwise_max requires at least one image");
    }
    const GrayImage& first = images.front();
    for (const GrayImage& img : images.subspan(1)) {
        if (!img.same_size(first)) {
            throw DimensionMismatch("pixelwise_max inputs must share dimensions");
        }
    }
    GrayImage out = first;
    auto dst = out.pixels();
    for (const GrayImage& img : images.subspan(1)) {
        auto src = img.pixels();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            dst[i] = std::max(dst[i], src[i]);
        }
    }
    return out;
}

GrayImage pixelwise_max(const std::vector<GrayImage>& images) {
    return pixelwise_max(std::span<const GrayImage>(images));
}

double average_intensity(const GrayImage& image) {
    std::uint64_t sum = 0;
    for (std::uint8_t v : image.pixels()) sum += v;
    return static_cast<double>(sum) / static_cast<double>(image.pixel_count());
}

GrayImage gaussian_blur(const GrayImage& image, double sigma) {
    if (!(sigma > 0.0)) {
        throw InvalidSigma("sigma must be positive, got " + std::to_string(sigma));
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double w = std::exp(-(static_cast<double>(k) * k) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(k + radius)] = w;
        total += w;
    }
    for (double& w : kernel) w /= total;

    const int w = image.width();
    const int h = image.height();
    // horizontal pass, full precision kept until the final rounding
    std::vector<double> tmp(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int c = std::clamp(col + k, 0, w - 1);
                acc += kernel[static_cast<std::size_t>(k + radius)] * image.at(row, c);
            }
            tmp[static_cast<std::size_t>(row) * w + col] = acc;
        }
    }
    // vertical pass
    GrayImage out(w, h);
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                const int r = std::clamp(row + k, 0, h - 1);
                acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[static_cast<std::size_t>(r) * w + col];
            }
            out.at(row, col) = round_clamp_u8(acc);
        }
    }
    return out;
}

GrayImage resize_bilinear(const GrayImage& image, int new_width, int new_height) {
    if (new_width <= 0 || new_height <= 0) {
        throw DimensionMismatch("resize target dimensions must be positive");
    }
    const int sw = image.width();
    const int sh = image.height();
    const double sx_scale = static_cast<double>(sw) / new_width;
    const double sy_scale = static_cast<double>(sh) / new_height;

    GrayImage out(new_width, new_height);
    for (int row = 0; row < new_height; ++row) {
        const double sy = std::clamp((row + 0.5) * sy_scale - 0.5, 0.0, static_cast<double>(sh - 1));
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, sh - 1);
        const double fy = sy - y0;
        for (int col = 0; col < new_width; ++col) {
            const double sx = std::clamp((col + 0.5) * sx_scale - 0.5, 0.0, static_cast<double>(sw - 1));
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, sw - 1);
            const double fx = sx - x0;
            const double top = (1.0 - fx) * image.at(y0, x0) + fx * image.at(y0, x1);
            const double bot = (1.0 - fx) * image.at(y1, x0) + fx * image.at(y1, x1);
            out.at(row, col) = round_clamp_u8((1.0 - fy) * top + fy * bot);
        }
    }
    return out;
}

}  // namespace cellcount
