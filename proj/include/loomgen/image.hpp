#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "loomgen/error.hpp"
#include "loomgen/rng.hpp"

namespace loomgen {

/// H x W x 3 image, interleaved RGB, every channel value in [0, 1].
class RasterImage {
public:
    RasterImage() = default;
    RasterImage(int height, int width, float fill = 0.0f)
        : height_(height), width_(width), data_(checked_size(height, width) * 3, fill) {}
    RasterImage(int height, int width, float r, float g, float b) : RasterImage(height, width) {
        for (std::size_t i = 0; i < data_.size(); i += 3) {
            data_[i] = r;
            data_[i + 1] = g;
            data_[i + 2] = b;
        }
    }

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(height_) * width_; }

    float& at(int row, int col, int ch) { return data_[index(row, col, ch)]; }
    float at(int row, int col, int ch) const { return data_[index(row, col, ch)]; }

    std::vector<float>& values() noexcept { return data_; }
    const std::vector<float>& values() const noexcept { return data_; }

    bool same_shape(const RasterImage& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    void clamp() {
        for (auto& v : data_) v = std::clamp(v, 0.0f, 1.0f);
    }

    bool in_range() const {
        return std::all_of(data_.begin(), data_.end(), [](float v) { return v >= 0.0f && v <= 1.0f; });
    }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    static std::size_t checked_size(int h, int w) {
        if (h < 1 || w < 1) fail(ErrorKind::InvalidArgument, "image dimensions must be positive");
        return static_cast<std::size_t>(h) * static_cast<std::size_t>(w);
    }
    std::size_t index(int row, int col, int ch) const {
        return (static_cast<std::size_t>(row) * width_ + col) * 3 + ch;
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<float> data_;
};

/// Single-channel plane of small integers. GrayImage holds 8-bit levels,
/// BinaryMask holds {0, 1}.
template <typename Tag>
class Plane {
public:
    Plane() = default;
    Plane(int height, int width, std::uint8_t fill = 0)
        : height_(height), width_(width), data_(static_cast<std::size_t>(height) * width, fill) {
        if (height < 1 || width < 1) fail(ErrorKind::InvalidArgument, "plane dimensions must be positive");
    }

    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::uint8_t& at(int row, int col) { return data_[static_cast<std::size_t>(row) * width_ + col]; }
    std::uint8_t at(int row, int col) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }

    std::vector<std::uint8_t>& values() noexcept { return data_; }
    const std::vector<std::uint8_t>& values() const noexcept { return data_; }

    friend bool operator==(const Plane&, const Plane&) = default;

private:
    int height_ = 0;
    int width_ = 0;
    std::vector<std::uint8_t> data_;
};

struct GrayTag {};
struct MaskTag {};
using GrayImage = Plane<GrayTag>;
using BinaryMask = Plane<MaskTag>;

inline RasterImage crop(const RasterImage& img, int row, int col, int height, int width) {
    if (row < 0 || col < 0 || row + height > img.height() || col + width > img.width())
        fail(ErrorKind::InvalidArgument, "crop window outside image");
    RasterImage out(height, width);
    for (int r = 0; r < height; ++r)
        std::copy_n(&img.values()[(static_cast<std::size_t>(row + r) * img.width() + col) * 3],
                    static_cast<std::size_t>(width) * 3, &out.at(r, 0, 0));
    return out;
}

/// Bilinear resample with half-pixel centers.
inline RasterImage resize(const RasterImage& img, int height, int width) {
    if (img.height() == height && img.width() == width) return img;
    RasterImage out(height, width);
    const double sy = static_cast<double>(img.height()) / height;
    const double sx = static_cast<double>(img.width()) / width;
    for (int r = 0; r < height; ++r) {
        const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height() - 1);
        const double wy = fy - y0;
        for (int c = 0; c < width; ++c) {
            const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double wx = fx - x0;
            for (int ch = 0; ch < 3; ++ch) {
                const double top = img.at(y0, x0, ch) * (1 - wx) + img.at(y0, x1, ch) * wx;
                const double bot = img.at(y1, x0, ch) * (1 - wx) + img.at(y1, x1, ch) * wx;
                out.at(r, c, ch) = static_cast<float>(top * (1 - wy) + bot * wy);
            }
        }
    }
    return out;
}

/// Resizes the short side to `size` and center-crops to size x size.
inline RasterImage fit_square(const RasterImage& img, int size) {
    const double scale = static_cast<double>(size) / std::min(img.height(), img.width());
    const int h = std::max(size, static_cast<int>(std::lround(img.height() * scale)));
    const int w = std::max(size, static_cast<int>(std::lround(img.width() * scale)));
    const RasterImage scaled = resize(img, h, w);
    return crop(scaled, (h - size) / 2, (w - size) / 2, size, size);
}

/// Uniform random size x size crop when the image is large enough, otherwise
/// fit_square.
inline RasterImage random_square_crop(const RasterImage& img, int size, Rng& rng) {
    if (img.height() >= size && img.width() >= size) {
        const int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.height() - size + 1)));
        const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(img.width() - size + 1)));
        return crop(img, r, c, size, size);
    }
    return fit_square(img, size);
}

/// 3-channel image whose channels all equal the mask value (0 or 1).
inline RasterImage mask_to_raster(const BinaryMask& mask) {
    RasterImage out(mask.height(), mask.width());
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c)
            for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = mask.at(r, c) ? 1.0f : 0.0f;
    return out;
}

inline double mean_abs_difference(const RasterImage& a, const RasterImage& b) {
    if (!a.same_shape(b)) fail(ErrorKind::DimensionMismatch, "images differ in shape");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) acc += std::abs(a.values()[i] - b.values()[i]);
    return acc / static_cast<double>(a.values().size());
}

}  // namespace loomgen
