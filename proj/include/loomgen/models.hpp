#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>

#include "loomgen/baselines.hpp"
#include "loomgen/checkpoint.hpp"
#include "loomgen/domain_gan.hpp"
#include "loomgen/style.hpp"

namespace loomgen::models {

namespace fs = std::filesystem;

enum class ModelKind { Style, CycleGan, DiscoGan, Dcgan, Vae };

inline constexpr std::array<ModelKind, 5> kModelKinds{ModelKind::Style, ModelKind::CycleGan, ModelKind::DiscoGan,
                                                      ModelKind::Dcgan, ModelKind::Vae};

constexpr const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Style: return "style";
        case ModelKind::CycleGan: return "cyclegan";
        case ModelKind::DiscoGan: return "discogan";
        case ModelKind::Dcgan: return "dcgan";
        case ModelKind::Vae: return "vae";
    }
    return "";
}

inline ModelKind parse_model_kind(std::string_view s) {
    for (ModelKind k : kModelKinds)
        if (s == to_string(k)) return k;
    fail(ErrorKind::InvalidEnum, "unknown model kind '" + std::string(s) + "'");
}

/// Kind and size recorded in a checkpoint's meta.json, without loading weights.
struct CheckpointInfo {
    ModelKind kind = ModelKind::Style;
    int image_size = 0;
    std::string created_at;
};

inline CheckpointInfo peek_checkpoint(const fs::path& dir) {
    const json meta = checkpoint::read_meta(dir);
    try {
        return {parse_model_kind(meta.at("kind").get<std::string>()), meta.at("image_size").get<int>(),
                meta.value("created_at", "")};
    } catch (const json::exception& e) {
        fail(ErrorKind::ModelLoadError, dir.string() + ": " + e.what());
    } catch (const Error& e) {
        fail(ErrorKind::ModelLoadError, dir.string() + ": " + e.what());
    }
}

/// A loaded, immutable model of any kind. Exactly one pointer is set.
struct AnyModel {
    ModelKind kind = ModelKind::Style;
    std::shared_ptr<const style::StyleModel> style;
    std::shared_ptr<const gan::GanModel<float>> gan;
    std::shared_ptr<const baselines::Dcgan<float>> dcgan;
    std::shared_ptr<const baselines::Vae<float>> vae;
};

inline AnyModel load_model(const fs::path& dir) {
    AnyModel m;
    m.kind = peek_checkpoint(dir).kind;
    switch (m.kind) {
        case ModelKind::Style: m.style = std::make_shared<style::StyleModel>(style::load_style_model(dir)); break;
        case ModelKind::CycleGan:
        case ModelKind::DiscoGan:
            m.gan = std::make_shared<gan::GanModel<float>>(gan::GanModel<float>::load(dir));
            break;
        case ModelKind::Dcgan:
            m.dcgan = std::make_shared<baselines::Dcgan<float>>(baselines::Dcgan<float>::load(dir));
            break;
        case ModelKind::Vae: m.vae = std::make_shared<baselines::Vae<float>>(baselines::Vae<float>::load(dir)); break;
    }
    return m;
}

}  // namespace loomgen::models
