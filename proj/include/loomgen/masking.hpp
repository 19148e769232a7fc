#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

#include "loomgen/error.hpp"
#include "loomgen/image.hpp"

namespace loomgen::masking {

struct Histogram256 {
    std::array<std::uint64_t, 256> counts{};
    std::uint64_t total = 0;

    void add(std::uint8_t level, std::uint64_t n = 1) {
        counts[level] += n;
        total += n;
    }

    int nonzero_bins() const {
        int n = 0;
        for (auto c : counts) n += c != 0;
        return n;
    }
};

/// BT.601 luma, rounded to the nearest 8-bit level.
inline GrayImage to_grayscale(const RasterImage& image) {
    GrayImage out(image.height(), image.width());
    for (int r = 0; r < image.height(); ++r)
        for (int c = 0; c < image.width(); ++c) {
            const double y = 0.299 * image.at(r, c, 0) + 0.587 * image.at(r, c, 1) + 0.114 * image.at(r, c, 2);
            out.at(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(255.0 * y), 0L, 255L));
        }
    return out;
}

inline Histogram256 histogram(const GrayImage& gray) {
    Histogram256 h;
    for (auto v : gray.values()) h.add(v);
    return h;
}

/// Otsu's threshold: the level t in [0, 254] maximizing the between-class
/// variance w0(t) w1(t) (mu0(t) - mu1(t))^2 with class 0 = levels <= t.
/// Comparisons are exact, so plateaus resolve to the smallest maximizer.
inline int otsu_threshold(const Histogram256& hist) {
    if (hist.nonzero_bins() < 2)
        fail(ErrorKind::DegenerateHistogram, "histogram has fewer than two occupied levels");
    using boost::multiprecision::int256_t;
    // Between-class variance = D^2 / (N^2 n0 n1) with D = N s0 - S n0; the
    // common N^2 factor is dropped.
    const int256_t total = hist.total;
    int256_t sum_all = 0;
    for (int i = 0; i < 256; ++i) sum_all += int256_t(hist.counts[i]) * i;

    int best = -1;
    int256_t best_num = 0, best_den = 1;
    int256_t n0 = 0, s0 = 0;
    for (int t = 0; t < 255; ++t) {
        n0 += hist.counts[t];
        s0 += int256_t(hist.counts[t]) * t;
        const int256_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        const int256_t d = total * s0 - sum_all * n0;
        const int256_t num = d * d;
        const int256_t den = n0 * n1;
        if (best < 0 || num * best_den > best_num * den) {
            best = t;
            best_num = num;
            best_den = den;
        }
    }
    return best;
}

inline int otsu_threshold(const GrayImage& gray) { return otsu_threshold(histogram(gray)); }

/// 1 where level > t.
inline BinaryMask binarize(const GrayImage& gray, int t) {
    if (t < 0 || t > 254) fail(ErrorKind::InvalidArgument, "threshold must lie in [0, 254]");
    BinaryMask mask(gray.height(), gray.width());
    for (std::size_t i = 0; i < gray.size(); ++i) mask.values()[i] = gray.values()[i] > t ? 1 : 0;
    return mask;
}

inline BinaryMask invert(const BinaryMask& mask) {
    BinaryMask out = mask;
    for (auto& v : out.values()) v = v ? 0 : 1;
    return out;
}

struct OtsuMask {
    BinaryMask mask;
    int threshold = 0;
};

/// Grayscale -> Otsu -> binarize. With `invert_polarity` the darker class
/// becomes foreground.
inline OtsuMask otsu_mask(const RasterImage& image, bool invert_polarity = false) {
    const GrayImage gray = to_grayscale(image);
    const int t = otsu_threshold(gray);
    BinaryMask m = binarize(gray, t);
    return {invert_polarity ? invert(m) : std::move(m), t};
}

inline bool is_binary(const BinaryMask& mask) {
    return std::all_of(mask.values().begin(), mask.values().end(), [](std::uint8_t v) { return v <= 1; });
}

}  // namespace loomgen::masking
