#pragma once

#include <filesystem>
#include <string>

#include "loomgen/domain_gan.hpp"
#include "loomgen/image_io.hpp"
#include "loomgen/style.hpp"
#include "synthetic.hpp"

namespace loomgen::testing {

/// Untrained but valid style checkpoint with a small network.
inline void write_style_model(const std::filesystem::path& dir, const std::string& id, std::uint64_t seed) {
    style::StyleModel m;
    m.style_id = id;
    m.image_size = 16;
    m.created_at = "2026-01-01T00:00:00Z";
    style::StyleTrainOptions opts;
    opts.net = {4, 1, 3};
    m.config = opts.to_json(style::TransferConfig{});
    m.net = std::make_shared<style::TransformNet<float>>(opts.net, seed);
    style::save_style_model(m, dir);
}

inline void write_discogan_model(const std::filesystem::path& dir, std::uint64_t seed) {
    auto c = gan::GanConfig::defaults(gan::GanKind::DiscoGan);
    c.spec.image_size = 16;
    c.spec.generator = {4, 1, 3};
    c.spec.disc_channels = 4;
    c.seed = seed;
    gan::GanModel<float> m(c);
    m.experiment() = {gan::kMask2Design, "", ""};
    m.save(dir);
}

/// Folder of `n` synthetic design patches as PNG files.
inline void write_patch_folder(const std::filesystem::path& dir, int n, int size, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    for (int i = 0; i < n; ++i)
        io::write_png(dir / ("p" + std::to_string(i) + ".png"), design_patch(size, i % 3, seed + i));
}

}  // namespace loomgen::testing
