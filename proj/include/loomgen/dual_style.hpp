#pragma once

#include <optional>
#include <string>

#include <opencv2/imgproc.hpp>

#include "loomgen/error.hpp"
#include "loomgen/image.hpp"
#include "loomgen/masking.hpp"
#include "loomgen/style.hpp"

namespace loomgen::dual_style {

struct CompositeResult {
    RasterImage output;
    BinaryMask mask_used;
    std::string fg_style_id;
    std::string bg_style_id;
    std::optional<int> threshold_used;  // empty when the mask was supplied
};

struct CompositeOptions {
    std::optional<BinaryMask> mask_override;
    bool invert = false;
    int feather_radius = 0;  // 0 = hard mask
};

/// out = mask * fg + (1 - mask) * bg, per channel. With a binary mask this is
/// a pure selection, so each output pixel is copied from exactly one input.
inline RasterImage blend(const BinaryMask& mask, const RasterImage& fg, const RasterImage& bg) {
    if (!fg.same_shape(bg) || mask.height() != fg.height() || mask.width() != fg.width())
        fail(ErrorKind::DimensionMismatch, "blend inputs differ in size");
    RasterImage out(fg.height(), fg.width());
    for (int r = 0; r < fg.height(); ++r)
        for (int c = 0; c < fg.width(); ++c) {
            const RasterImage& src = mask.at(r, c) ? fg : bg;
            for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = src.at(r, c, ch);
        }
    return out;
}

/// Soft blend with the mask Gaussian-blurred over `radius` pixels.
inline RasterImage feathered_blend(const BinaryMask& mask, const RasterImage& fg, const RasterImage& bg, int radius) {
    if (radius < 0) fail(ErrorKind::InvalidArgument, "feather radius must be non-negative");
    if (radius == 0) return blend(mask, fg, bg);
    if (!fg.same_shape(bg) || mask.height() != fg.height() || mask.width() != fg.width())
        fail(ErrorKind::DimensionMismatch, "blend inputs differ in size");
    cv::Mat weights(mask.height(), mask.width(), CV_32F);
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c) weights.at<float>(r, c) = mask.at(r, c) ? 1.0f : 0.0f;
    cv::GaussianBlur(weights, weights, cv::Size(2 * radius + 1, 2 * radius + 1), radius / 2.0, radius / 2.0,
                     cv::BORDER_REPLICATE);
    RasterImage out(fg.height(), fg.width());
    for (int r = 0; r < fg.height(); ++r)
        for (int c = 0; c < fg.width(); ++c) {
            const float w = weights.at<float>(r, c);
            for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = w * fg.at(r, c, ch) + (1 - w) * bg.at(r, c, ch);
        }
    return out;
}

/// Both styles render the full target; the mask picks per pixel afterwards.
inline CompositeResult composite(const RasterImage& target, const style::StyleModel& fg_model,
                                 const style::StyleModel& bg_model, const CompositeOptions& options = {}) {
    CompositeResult result;
    result.fg_style_id = fg_model.style_id;
    result.bg_style_id = bg_model.style_id;
    if (options.mask_override) {
        const auto& m = *options.mask_override;
        if (m.height() != target.height() || m.width() != target.width())
            fail(ErrorKind::DimensionMismatch, "mask override does not match target size");
        if (!masking::is_binary(m)) fail(ErrorKind::NonBinaryInput, "mask override is not binary");
        result.mask_used = m;
    } else {
        auto om = masking::otsu_mask(target, options.invert);
        result.mask_used = std::move(om.mask);
        result.threshold_used = om.threshold;
    }
    const RasterImage fg = style::stylize(target, fg_model);
    const RasterImage bg = &fg_model == &bg_model ? fg : style::stylize(target, bg_model);
    result.output = feathered_blend(result.mask_used, fg, bg, options.feather_radius);
    return result;
}

}  // namespace loomgen::dual_style
