#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

#include "loomgen/dataset.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace loomgen;
using namespace loomgen::dataset;
using loomgen::testing::noise_image;
using loomgen::testing::TempDir;

namespace {

std::vector<float> sorted_values(const RasterImage& img) {
    auto v = img.values();
    std::sort(v.begin(), v.end());
    return v;
}

std::vector<SourceImage> sources(int n, int h, int w) {
    std::vector<SourceImage> out;
    for (int i = 0; i < n; ++i)
        out.push_back({"generic-img" + std::to_string(i), ClassLabel::Generic, noise_image(h, w, 100 + i)});
    return out;
}

}  // namespace

TEST(Ingest, ReturnsEveryDecodableImage) {
    TempDir dir;
    for (int i = 0; i < 33; ++i) io::write_png(dir / ("r" + std::to_string(i) + ".png"), noise_image(8, 8, i));
    const auto result = ingest_folder(dir.path(), ClassLabel::Regional);
    EXPECT_EQ(result.images.size(), 33u);
    EXPECT_TRUE(result.failures.empty());
    EXPECT_EQ(result.images[0].first.rfind("regional-", 0), 0u);
}

TEST(Ingest, ReportsCorruptFiles) {
    TempDir dir;
    io::write_png(dir / "a.png", noise_image(8, 8, 1));
    io::write_png(dir / "b.png", noise_image(8, 8, 2));
    io::write_file(dir / "c.jpg", "definitely not a jpeg");
    const auto result = ingest_folder(dir.path(), ClassLabel::Generic);
    EXPECT_EQ(result.images.size(), 2u);
    ASSERT_EQ(result.failures.size(), 1u);
    EXPECT_NE(result.failures[0].file.find("c.jpg"), std::string::npos);
    EXPECT_NE(result.failures[0].message.find("DecodeError"), std::string::npos);
}

TEST(Ingest, EmptyFolderIsAnError) {
    TempDir dir;
    try {
        ingest_folder(dir.path(), ClassLabel::Generic);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyFolder);
    }
}

TEST(Ingest, ValuesRescaledToUnitRange) {
    TempDir dir;
    RasterImage img(2, 2, 1.0f, 0.0f, 0.5f);
    io::write_png(dir / "x.png", img);
    const auto back = ingest_folder(dir.path(), ClassLabel::Generic).images.at(0).second;
    EXPECT_FLOAT_EQ(back.at(0, 0, 0), 1.0f);
    EXPECT_FLOAT_EQ(back.at(0, 0, 1), 0.0f);
    EXPECT_NEAR(back.at(0, 0, 2), 0.5f, 1.0f / 255);
}

TEST(ExtractPatches, UniqueOriginReturnsImage) {
    const auto img = noise_image(256, 256, 3);
    const auto patches = extract_patches(img, 256, 1, 42);
    ASSERT_EQ(patches.size(), 1u);
    EXPECT_EQ(patches[0], img);
}

TEST(ExtractPatches, DeterministicForSeed) {
    const auto img = noise_image(512, 512, 4);
    const auto a = extract_patches(img, 256, 4, 7);
    const auto b = extract_patches(img, 256, 4, 7);
    ASSERT_EQ(a.size(), 4u);
    EXPECT_EQ(a, b);
    for (const auto& p : a) {
        EXPECT_EQ(p.height(), 256);
        EXPECT_EQ(p.width(), 256);
    }
    EXPECT_NE(extract_patches(img, 256, 4, 8), a);
}

TEST(ExtractPatches, TooSmallImage) {
    try {
        extract_patches(noise_image(300, 300, 5), 512, 1, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ImageTooSmall);
    }
}

TEST(ExtractPatches, OriginsCoverValidRangeUniformly) {
    // 10x10 image, 8x8 crops -> 3 valid rows/cols; each should appear.
    const auto origins = sample_crop_origins(10, 10, 8, 3000, 11);
    std::array<int, 3> rows{}, cols{};
    for (const auto& o : origins) {
        ASSERT_GE(o.row, 0);
        ASSERT_LE(o.row, 2);
        ASSERT_LE(o.col, 2);
        ++rows[o.row];
        ++cols[o.col];
    }
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(rows[i], 1000, 120);
        EXPECT_NEAR(cols[i], 1000, 120);
    }
}

TEST(Augment, ExactlyNineKinds) { EXPECT_EQ(kAllAugmentations.size(), 9u); }

TEST(Augment, RotationGroupAndFlipInvolution) {
    const auto p = noise_image(6, 6, 6);
    RasterImage r = p;
    for (int i = 0; i < 4; ++i) r = augment(r, {AugmentationKind::Rotate90, {}});
    EXPECT_EQ(r, p);
    EXPECT_EQ(augment(augment(p, {AugmentationKind::FlipHorizontal, {}}), {AugmentationKind::FlipHorizontal, {}}), p);
    EXPECT_EQ(augment(augment(p, {AugmentationKind::Rotate90, {}}), {AugmentationKind::Rotate270, {}}), p);
    EXPECT_EQ(augment(augment(p, {AugmentationKind::Rotate90, {}}), {AugmentationKind::Rotate90, {}}),
              augment(p, {AugmentationKind::Rotate180, {}}));
}

TEST(Augment, Rotate90IsCounterClockwise) {
    RasterImage p(2, 2);
    p.at(0, 1, 0) = 1.0f;  // top-right
    const auto r = augment(p, {AugmentationKind::Rotate90, {}});
    EXPECT_EQ(r.at(0, 0, 0), 1.0f);  // moves to top-left
}

TEST(Augment, GeometricKindsPreserveValueMultiset) {
    const auto p = noise_image(7, 7, 9);
    for (auto k : kAllAugmentations) {
        if (is_photometric(k)) continue;
        const auto out = augment(p, {k, {}});
        EXPECT_EQ(out.height(), 7);
        EXPECT_EQ(sorted_values(out), sorted_values(p)) << to_string(k);
    }
}

TEST(Augment, BrightnessClampsAtOne) {
    const RasterImage p(4, 4, 0.9f);
    const auto out = augment(p, {AugmentationKind::BrightnessJitter, {0.2}});
    for (float v : out.values()) EXPECT_EQ(v, 1.0f);
}

TEST(Augment, ContrastStaysInRange) {
    const auto p = noise_image(5, 5, 10);
    for (double f : {0.0, 0.5, 1.0, 3.0}) {
        const auto out = augment(p, {AugmentationKind::ContrastJitter, {f}});
        EXPECT_TRUE(out.in_range());
    }
    EXPECT_THROW(augment(p, {AugmentationKind::ContrastJitter, {}}), Error);
    EXPECT_THROW(augment(noise_image(4, 5, 1), {AugmentationKind::Rotate90, {}}), Error);
}

TEST(BuildDataset, CountWithoutAugmentation) {
    TempDir out;
    BuildConfig cfg;
    cfg.patches_per_image = 5;
    const auto m = build_dataset(sources(10, 260, 270), cfg, out.path());
    EXPECT_EQ(m.entries.size(), 50u);
}

TEST(BuildDataset, CountFormulaWithAllAugmentations) {
    TempDir out;
    BuildConfig cfg;
    cfg.patches_per_image = 5;
    cfg.augmentations.assign(kAllAugmentations.begin(), kAllAugmentations.end());
    const auto m = build_dataset(sources(10, 256, 256), cfg, out.path());
    // Oracle: enumerate (image, crop, variant) triples.
    std::size_t expected = 0;
    for (int img = 0; img < 10; ++img)
        for (int c = 0; c < 5; ++c)
            for (std::size_t v = 0; v < 1 + kAllAugmentations.size(); ++v) ++expected;
    EXPECT_EQ(expected, 500u);
    EXPECT_EQ(m.entries.size(), expected);
    for (const auto& e : m.entries) {
        EXPECT_TRUE(std::filesystem::exists(out.path() / e.file)) << e.file;
        EXPECT_LE(e.crop_origin.row + e.size, 256);
        EXPECT_LE(e.crop_origin.col + e.size, 256);
        if (e.augmentation && e.augmentation->kind == AugmentationKind::BrightnessJitter) {
            EXPECT_LE(std::abs(e.augmentation->parameters.at(0)), cfg.brightness_range);
        }
    }
}

TEST(BuildDataset, ReproducibleManifest) {
    TempDir a, b;
    BuildConfig cfg;
    cfg.patches_per_image = 3;
    cfg.seed = 77;
    cfg.augmentations = {AugmentationKind::Rotate90, AugmentationKind::BrightnessJitter};
    const auto src = sources(3, 300, 280);
    const auto ma = build_dataset(src, cfg, a.path());
    const auto mb = build_dataset(src, cfg, b.path());
    EXPECT_EQ(io::read_file(a / "manifest.jsonl"), io::read_file(b / "manifest.jsonl"));
    EXPECT_EQ(ma.config_digest, mb.config_digest);
    for (const auto& e : ma.entries) EXPECT_EQ(io::read_file(a / e.file), io::read_file(b / e.file));
}

TEST(BuildDataset, ManifestKeysAndRoundTrip) {
    TempDir out;
    BuildConfig cfg;
    cfg.patches_per_image = 2;
    cfg.augmentations = {AugmentationKind::ContrastJitter};
    const auto m = build_dataset(sources(2, 256, 256), cfg, out.path());
    std::ifstream in(out / "manifest.jsonl");
    std::string line;
    std::getline(in, line);
    const auto j = json::parse(line);
    for (const char* key : {"source_id", "class_label", "crop_origin", "size", "augmentation", "seed"})
        EXPECT_TRUE(j.contains(key)) << key;
    const auto back = read_manifest(out.path());
    EXPECT_EQ(back.entries, m.entries);
    EXPECT_EQ(back.config_digest, m.config_digest);
}

TEST(BuildDataset, SmallImagesSkippedWithReport) {
    TempDir out;
    auto src = sources(2, 256, 256);
    src.push_back({"generic-tiny", ClassLabel::Generic, noise_image(100, 400, 1)});
    BuildConfig cfg;
    cfg.patches_per_image = 1;
    const auto m = build_dataset(src, cfg, out.path());
    EXPECT_EQ(m.entries.size(), 2u);
    ASSERT_EQ(m.skipped.size(), 1u);
    EXPECT_EQ(m.skipped[0].source_id, "generic-tiny");
}
