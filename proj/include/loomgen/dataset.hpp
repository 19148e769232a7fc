#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "loomgen/error.hpp"
#include "loomgen/image.hpp"
#include "loomgen/image_io.hpp"
#include "loomgen/rng.hpp"
#include "loomgen/util.hpp"

namespace loomgen::dataset {

namespace fs = std::filesystem;

enum class ClassLabel { Regional, Generic };

constexpr std::string_view to_string(ClassLabel label) {
    return label == ClassLabel::Regional ? "regional" : "generic";
}

inline ClassLabel parse_class_label(std::string_view s) {
    if (s == "regional") return ClassLabel::Regional;
    if (s == "generic") return ClassLabel::Generic;
    fail(ErrorKind::InvalidEnum, "class label must be regional or generic, got '" + std::string(s) + "'");
}

enum class AugmentationKind {
    Rotate90,
    Rotate180,
    Rotate270,
    FlipHorizontal,
    FlipVertical,
    ChannelSwapBgr,
    ChannelSwapGrb,
    BrightnessJitter,
    ContrastJitter,
};

inline constexpr std::array<AugmentationKind, 9> kAllAugmentations = {
    AugmentationKind::Rotate90,       AugmentationKind::Rotate180,      AugmentationKind::Rotate270,
    AugmentationKind::FlipHorizontal, AugmentationKind::FlipVertical,   AugmentationKind::ChannelSwapBgr,
    AugmentationKind::ChannelSwapGrb, AugmentationKind::BrightnessJitter, AugmentationKind::ContrastJitter,
};

constexpr std::string_view to_string(AugmentationKind k) {
    switch (k) {
        case AugmentationKind::Rotate90: return "rotate90";
        case AugmentationKind::Rotate180: return "rotate180";
        case AugmentationKind::Rotate270: return "rotate270";
        case AugmentationKind::FlipHorizontal: return "flip_horizontal";
        case AugmentationKind::FlipVertical: return "flip_vertical";
        case AugmentationKind::ChannelSwapBgr: return "channel_swap_rgb_to_bgr";
        case AugmentationKind::ChannelSwapGrb: return "channel_swap_rgb_to_grb";
        case AugmentationKind::BrightnessJitter: return "brightness_jitter";
        case AugmentationKind::ContrastJitter: return "contrast_jitter";
    }
    return "";
}

inline AugmentationKind parse_augmentation(std::string_view s) {
    for (auto k : kAllAugmentations)
        if (to_string(k) == s) return k;
    fail(ErrorKind::InvalidEnum, "unknown augmentation '" + std::string(s) + "'");
}

constexpr bool is_photometric(AugmentationKind k) {
    return k == AugmentationKind::BrightnessJitter || k == AugmentationKind::ContrastJitter;
}

/// brightness_jitter takes {delta}; contrast_jitter takes {factor};
/// the others take no parameters.
struct Augmentation {
    AugmentationKind kind;
    std::vector<double> parameters;

    friend bool operator==(const Augmentation&, const Augmentation&) = default;
};

// ---------------------------------------------------------------------------

struct DecodeFailure {
    std::string file;
    std::string message;
};

struct IngestResult {
    std::vector<std::pair<std::string, RasterImage>> images;  // (image_id, image)
    std::vector<DecodeFailure> failures;
};

/// Loads every PNG/JPEG directly inside `dir`, sorted by file name. Files
/// that fail to decode are listed in `failures`.
inline IngestResult ingest_folder(const fs::path& dir, ClassLabel label) {
    if (!fs::is_directory(dir)) fail(ErrorKind::EmptyFolder, dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && io::has_image_extension(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    IngestResult result;
    for (const auto& f : files) {
        try {
            result.images.emplace_back(std::string(to_string(label)) + "-" + f.stem().string(), io::read_image(f));
        } catch (const Error& e) {
            result.failures.push_back({f.string(), e.what()});
        }
    }
    if (result.images.empty())
        fail(ErrorKind::EmptyFolder, "no decodable images in " + dir.string() + " (" +
                                         std::to_string(result.failures.size()) + " failed to decode)");
    return result;
}

struct CropOrigin {
    int row = 0;
    int col = 0;
    friend bool operator==(const CropOrigin&, const CropOrigin&) = default;
};

inline void check_patch_size(int size) {
    if (size != 256 && size != 512) fail(ErrorKind::InvalidArgument, "patch size must be 256 or 512");
}

/// Crop origins drawn independently and uniformly over all valid positions.
inline std::vector<CropOrigin> sample_crop_origins(int height, int width, int size, int count, std::uint64_t seed) {
    if (count < 1) fail(ErrorKind::InvalidArgument, "patch count must be positive");
    if (height < size || width < size)
        fail(ErrorKind::ImageTooSmall, std::to_string(height) + "x" + std::to_string(width) +
                                           " image is smaller than patch size " + std::to_string(size));
    Rng rng(seed);
    std::vector<CropOrigin> origins(static_cast<std::size_t>(count));
    for (auto& o : origins) {
        o.row = static_cast<int>(rng.below(static_cast<std::uint64_t>(height - size + 1)));
        o.col = static_cast<int>(rng.below(static_cast<std::uint64_t>(width - size + 1)));
    }
    return origins;
}

inline std::vector<RasterImage> extract_patches(const RasterImage& image, int size, int count, std::uint64_t seed) {
    check_patch_size(size);
    std::vector<RasterImage> out;
    for (const auto& o : sample_crop_origins(image.height(), image.width(), size, count, seed))
        out.push_back(crop(image, o.row, o.col, size, size));
    return out;
}

inline RasterImage augment(const RasterImage& patch, const Augmentation& aug) {
    if (patch.height() != patch.width()) fail(ErrorKind::InvalidArgument, "augmentation requires a square patch");
    const int n = patch.height();
    RasterImage out(n, n);
    const auto remap = [&](auto source) {
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                const auto [sr, sc] = source(r, c);
                for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = patch.at(sr, sc, ch);
            }
    };
    const auto permute = [&](std::array<int, 3> from) {
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = patch.at(r, c, from[ch]);
    };
    const auto param = [&]() {
        if (aug.parameters.size() != 1)
            fail(ErrorKind::InvalidArgument, std::string(to_string(aug.kind)) + " takes exactly one parameter");
        return aug.parameters[0];
    };
    switch (aug.kind) {
        case AugmentationKind::Rotate90:  // counter-clockwise
            remap([n](int r, int c) { return std::pair{c, n - 1 - r}; });
            break;
        case AugmentationKind::Rotate180: remap([n](int r, int c) { return std::pair{n - 1 - r, n - 1 - c}; }); break;
        case AugmentationKind::Rotate270: remap([n](int r, int c) { return std::pair{n - 1 - c, r}; }); break;
        case AugmentationKind::FlipHorizontal: remap([n](int r, int c) { return std::pair{r, n - 1 - c}; }); break;
        case AugmentationKind::FlipVertical: remap([n](int r, int c) { return std::pair{n - 1 - r, c}; }); break;
        case AugmentationKind::ChannelSwapBgr: permute({2, 1, 0}); break;
        case AugmentationKind::ChannelSwapGrb: permute({1, 0, 2}); break;
        case AugmentationKind::BrightnessJitter: {
            const auto delta = static_cast<float>(param());
            for (std::size_t i = 0; i < out.values().size(); ++i) out.values()[i] = patch.values()[i] + delta;
            out.clamp();
            break;
        }
        case AugmentationKind::ContrastJitter: {
            const double factor = param();
            double mean = 0;
            for (float v : patch.values()) mean += v;
            mean /= static_cast<double>(patch.values().size());
            for (std::size_t i = 0; i < out.values().size(); ++i)
                out.values()[i] = static_cast<float>((patch.values()[i] - mean) * factor + mean);
            out.clamp();
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset build

struct PatchRecord {
    std::string source_id;
    ClassLabel class_label = ClassLabel::Generic;
    CropOrigin crop_origin;
    int size = 256;
    std::optional<Augmentation> augmentation;
    std::uint64_t seed = 0;
    std::string file;  // relative to the dataset root

    friend bool operator==(const PatchRecord&, const PatchRecord&) = default;
};

struct BuildConfig {
    int patch_size = 256;
    int patches_per_image = 5;
    std::vector<AugmentationKind> augmentations;
    double brightness_range = 0.2;  // delta ~ U(-range, range)
    double contrast_range = 0.2;    // factor ~ U(1 - range, 1 + range)
    std::uint64_t seed = 0;

    json to_json() const {
        json augs = json::array();
        for (auto a : augmentations) augs.push_back(to_string(a));
        return {{"patch_size", patch_size},       {"patches_per_image", patches_per_image},
                {"augmentations", augs},          {"brightness_range", brightness_range},
                {"contrast_range", contrast_range}, {"seed", seed}};
    }
};

struct SourceImage {
    std::string source_id;
    ClassLabel label;
    RasterImage image;
};

struct SkippedImage {
    std::string source_id;
    std::string reason;
};

struct PatchManifest {
    std::vector<PatchRecord> entries;
    std::string dataset_root;
    std::string created_at;
    std::string config_digest;
    std::vector<SkippedImage> skipped;
};

inline ordered_json record_to_json(const PatchRecord& r) {
    ordered_json aug = nullptr;
    if (r.augmentation) aug = ordered_json{{"kind", to_string(r.augmentation->kind)}, {"parameters", r.augmentation->parameters}};
    return ordered_json{{"source_id", r.source_id},
                        {"class_label", to_string(r.class_label)},
                        {"crop_origin", {r.crop_origin.row, r.crop_origin.col}},
                        {"size", r.size},
                        {"augmentation", aug},
                        {"seed", r.seed},
                        {"file", r.file}};
}

inline PatchRecord record_from_json(const json& j) {
    PatchRecord r;
    r.source_id = j.at("source_id").get<std::string>();
    r.class_label = parse_class_label(j.at("class_label").get<std::string>());
    r.crop_origin = {j.at("crop_origin").at(0).get<int>(), j.at("crop_origin").at(1).get<int>()};
    r.size = j.at("size").get<int>();
    if (!j.at("augmentation").is_null())
        r.augmentation = Augmentation{parse_augmentation(j.at("augmentation").at("kind").get<std::string>()),
                                      j.at("augmentation").at("parameters").get<std::vector<double>>()};
    r.seed = j.at("seed").get<std::uint64_t>();
    r.file = j.at("file").get<std::string>();
    return r;
}

inline std::string patch_file_name(const std::string& source_id, int crop_index, const std::optional<Augmentation>& aug) {
    return source_id + "_" + std::to_string(crop_index) + "_" + std::string(aug ? to_string(aug->kind) : "none") + ".png";
}

/// Crops `patches_per_image` patches from each image, adds one augmented copy
/// per enabled augmentation, and writes PNGs plus `manifest.jsonl` and
/// `manifest.meta.json` into `out_dir`. Images smaller than the patch size
/// are listed in `skipped` rather than failing the build.
inline PatchManifest build_dataset(const std::vector<SourceImage>& images, const BuildConfig& config,
                                   const fs::path& out_dir) {
    check_patch_size(config.patch_size);
    if (config.patches_per_image < 1) fail(ErrorKind::InvalidArgument, "patches_per_image must be positive");
    if (images.empty()) fail(ErrorKind::EmptyCorpus, "no input images");
    if (config.brightness_range < 0 || config.brightness_range > 1 || config.contrast_range < 0 ||
        config.contrast_range > 1)
        fail(ErrorKind::InvalidArgument, "jitter ranges must lie in [0, 1]");
    fs::create_directories(out_dir);

    PatchManifest manifest;
    manifest.dataset_root = fs::absolute(out_dir).string();
    manifest.created_at = utc_timestamp();
    manifest.config_digest = json_digest(config.to_json());

    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& src = images[i];
        const std::uint64_t image_seed = derive_seed(config.seed, i);
        std::vector<CropOrigin> origins;
        try {
            origins = sample_crop_origins(src.image.height(), src.image.width(), config.patch_size,
                                          config.patches_per_image, image_seed);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ImageTooSmall) throw;
            manifest.skipped.push_back({src.source_id, e.what()});
            continue;
        }
        for (std::size_t k = 0; k < origins.size(); ++k) {
            const std::uint64_t crop_seed = derive_seed(image_seed, k);
            Rng jitter(crop_seed);
            const RasterImage patch = crop(src.image, origins[k].row, origins[k].col, config.patch_size, config.patch_size);

            std::vector<std::optional<Augmentation>> variants{std::nullopt};
            for (auto kind : config.augmentations) {
                Augmentation a{kind, {}};
                if (kind == AugmentationKind::BrightnessJitter)
                    a.parameters = {jitter.uniform(-config.brightness_range, config.brightness_range)};
                else if (kind == AugmentationKind::ContrastJitter)
                    a.parameters = {jitter.uniform(1 - config.contrast_range, 1 + config.contrast_range)};
                variants.emplace_back(std::move(a));
            }
            for (const auto& v : variants) {
                PatchRecord rec{src.source_id, src.label, origins[k], config.patch_size, v, crop_seed,
                                patch_file_name(src.source_id, static_cast<int>(k), v)};
                io::write_png(out_dir / rec.file, v ? augment(patch, *v) : patch);
                manifest.entries.push_back(std::move(rec));
            }
        }
    }

    std::string lines;
    for (const auto& r : manifest.entries) lines += record_to_json(r).dump() + "\n";
    io::write_file_atomic(out_dir / "manifest.jsonl", lines);

    json skipped = json::array();
    for (const auto& s : manifest.skipped) skipped.push_back({{"source_id", s.source_id}, {"reason", s.reason}});
    const ordered_json meta{{"dataset_root", manifest.dataset_root},
                            {"created_at", manifest.created_at},
                            {"config_digest", manifest.config_digest},
                            {"config", config.to_json()},
                            {"entry_count", manifest.entries.size()},
                            {"skipped", skipped}};
    io::write_file_atomic(out_dir / "manifest.meta.json", meta.dump(2) + "\n");
    return manifest;
}

inline PatchManifest read_manifest(const fs::path& dir) {
    PatchManifest m;
    std::ifstream in(dir / "manifest.jsonl");
    if (!in) fail(ErrorKind::IoError, "no manifest.jsonl in " + dir.string());
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) m.entries.push_back(record_from_json(json::parse(line)));
    m.dataset_root = fs::absolute(dir).string();
    if (fs::exists(dir / "manifest.meta.json")) {
        const auto meta = json::parse(io::read_file(dir / "manifest.meta.json"));
        m.created_at = meta.value("created_at", "");
        m.config_digest = meta.value("config_digest", "");
        for (const auto& s : meta.value("skipped", json::array()))
            m.skipped.push_back({s.at("source_id").get<std::string>(), s.at("reason").get<std::string>()});
    }
    return m;
}

/// Loads a training corpus: the patches of a built dataset when `dir`
/// holds a manifest, otherwise every decodable image in the folder.
inline std::vector<RasterImage> load_corpus(const fs::path& dir) {
    std::vector<RasterImage> out;
    if (fs::exists(dir / "manifest.jsonl")) {
        for (const auto& r : read_manifest(dir).entries) out.push_back(io::read_image(dir / r.file));
    } else if (fs::is_directory(dir)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && io::has_image_extension(entry.path())) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            try {
                out.push_back(io::read_image(f));
            } catch (const Error&) {
                // Unreadable files are not part of the corpus.
            }
        }
    }
    return out;
}

}  // namespace loomgen::dataset
