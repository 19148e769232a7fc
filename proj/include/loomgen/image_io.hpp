#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "loomgen/error.hpp"
#include "loomgen/image.hpp"

namespace loomgen::io {

namespace fs = std::filesystem;

inline std::uint8_t quantize(float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

inline RasterImage from_mat(const cv::Mat& mat) {
    cv::Mat bgr;
    if (mat.channels() == 1) {
        cv::Mat tmp;
        cv::merge(std::vector<cv::Mat>{mat, mat, mat}, tmp);
        bgr = tmp;
    } else if (mat.channels() == 4) {
        cv::Mat tmp;
        cv::Mat parts[4];
        cv::split(mat, parts);
        cv::merge(std::vector<cv::Mat>{parts[0], parts[1], parts[2]}, tmp);
        bgr = tmp;
    } else {
        bgr = mat;
    }
    const double scale = bgr.depth() == CV_16U ? 1.0 / 65535.0 : 1.0 / 255.0;
    cv::Mat f;
    bgr.convertTo(f, CV_32FC3, scale);
    RasterImage out(f.rows, f.cols);
    for (int r = 0; r < f.rows; ++r) {
        const auto* row = f.ptr<cv::Vec3f>(r);
        for (int c = 0; c < f.cols; ++c) {
            out.at(r, c, 0) = std::clamp(row[c][2], 0.0f, 1.0f);
            out.at(r, c, 1) = std::clamp(row[c][1], 0.0f, 1.0f);
            out.at(r, c, 2) = std::clamp(row[c][0], 0.0f, 1.0f);
        }
    }
    return out;
}

inline cv::Mat to_mat(const RasterImage& img) {
    cv::Mat mat(img.height(), img.width(), CV_8UC3);
    for (int r = 0; r < img.height(); ++r) {
        auto* row = mat.ptr<cv::Vec3b>(r);
        for (int c = 0; c < img.width(); ++c)
            row[c] = cv::Vec3b(quantize(img.at(r, c, 2)), quantize(img.at(r, c, 1)), quantize(img.at(r, c, 0)));
    }
    return mat;
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoError, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::IoError, "cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::IoError, "short write to " + path.string());
}

/// Writes to a sibling temp file and renames over the target.
inline void write_file_atomic(const fs::path& path, std::string_view bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    write_file(tmp, bytes);
    fs::rename(tmp, path);
}

inline cv::Mat decode_mat(std::string_view bytes, int flags) {
    if (bytes.empty()) fail(ErrorKind::DecodeError, "empty input");
    cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8U, const_cast<char*>(bytes.data()));
    cv::Mat mat;
    try {
        mat = cv::imdecode(buf, flags);
    } catch (const cv::Exception& e) {
        fail(ErrorKind::DecodeError, e.what());
    }
    if (mat.empty()) fail(ErrorKind::DecodeError, "not a decodable PNG/JPEG image");
    return mat;
}

inline RasterImage decode_image(std::string_view bytes) { return from_mat(decode_mat(bytes, cv::IMREAD_COLOR)); }

inline RasterImage read_image(const fs::path& path) {
    try {
        return decode_image(read_file(path));
    } catch (const Error& e) {
        fail(ErrorKind::DecodeError, path.string() + ": " + e.what());
    }
}

inline std::string encode_png(const cv::Mat& mat) {
    std::vector<std::uint8_t> buf;
    if (!cv::imencode(".png", mat, buf)) fail(ErrorKind::IoError, "PNG encoding failed");
    return {buf.begin(), buf.end()};
}

inline std::string encode_png(const RasterImage& img) { return encode_png(to_mat(img)); }

inline void write_png(const fs::path& path, const RasterImage& img) { write_file(path, encode_png(img)); }

/// Mask wire format: 8-bit single-channel PNG, 255 = foreground, 0 = background.
inline std::string encode_mask(const BinaryMask& mask) {
    cv::Mat mat(mask.height(), mask.width(), CV_8UC1);
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c) mat.at<std::uint8_t>(r, c) = mask.at(r, c) ? 255 : 0;
    return encode_png(mat);
}

inline BinaryMask decode_mask(std::string_view bytes) {
    const cv::Mat mat = decode_mat(bytes, cv::IMREAD_UNCHANGED);
    if (mat.type() != CV_8UC1) fail(ErrorKind::NonBinaryInput, "mask must be an 8-bit single-channel PNG");
    BinaryMask mask(mat.rows, mat.cols);
    for (int r = 0; r < mat.rows; ++r)
        for (int c = 0; c < mat.cols; ++c) {
            const auto v = mat.at<std::uint8_t>(r, c);
            if (v != 0 && v != 255)
                fail(ErrorKind::NonBinaryInput, "mask value " + std::to_string(v) + " is neither 0 nor 255");
            mask.at(r, c) = v ? 1 : 0;
        }
    return mask;
}

inline void write_mask(const fs::path& path, const BinaryMask& mask) { write_file(path, encode_mask(mask)); }

inline BinaryMask read_mask(const fs::path& path) { return decode_mask(read_file(path)); }

struct Dimensions {
    int width = 0;
    int height = 0;
};

/// Reads width/height from a PNG IHDR or JPEG SOF header without decoding
/// pixel data. Returns nullopt when the header is not recognized.
inline std::optional<Dimensions> peek_dimensions(std::string_view bytes) {
    const auto u8 = [&](std::size_t i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i])); };
    const auto be16 = [&](std::size_t i) { return (u8(i) << 8) | u8(i + 1); };
    const auto be32 = [&](std::size_t i) { return (be16(i) << 16) | be16(i + 2); };
    static constexpr unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (bytes.size() >= 24 && std::equal(png_sig, png_sig + 8, bytes.begin(), [](unsigned char a, char b) {
            return a == static_cast<unsigned char>(b);
        })) {
        return Dimensions{static_cast<int>(be32(16)), static_cast<int>(be32(20))};
    }
    if (bytes.size() >= 4 && u8(0) == 0xFF && u8(1) == 0xD8) {
        std::size_t i = 2;
        while (i + 9 < bytes.size()) {
            if (u8(i) != 0xFF) return std::nullopt;
            const auto marker = u8(i + 1);
            if (marker == 0xD8 || (marker >= 0xD0 && marker <= 0xD7) || marker == 0x01) {
                i += 2;
                continue;
            }
            const auto len = be16(i + 2);
            const bool sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 && marker != 0xCC;
            if (sof) return Dimensions{static_cast<int>(be16(i + 7)), static_cast<int>(be16(i + 5))};
            i += 2 + len;
        }
    }
    return std::nullopt;
}

inline bool has_image_extension(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace loomgen::io
