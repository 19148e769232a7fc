#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "loomgen/baselines.hpp"
#include "loomgen/dataset.hpp"
#include "loomgen/domain_gan.hpp"
#include "loomgen/models.hpp"
#include "loomgen/style.hpp"

namespace loomgen::training {

namespace fs = std::filesystem;
using models::ModelKind;

enum class ParamType { String, Integer, Number, Boolean };

struct ParamSpec {
    std::string name;
    ParamType type;
    bool required = false;
    json fallback;  // default when absent
    std::string help;
};

/// Accepted training parameters per model kind. Job bodies and CLI flags map
/// onto these names one to one.
inline const std::vector<ParamSpec>& param_specs(ModelKind kind) {
    using P = ParamType;
    static const std::vector<ParamSpec> style{
        {"model_id", P::String, true, nullptr, "identifier of the trained model"},
        {"corpus", P::String, true, nullptr, "content corpus: dataset directory or image folder"},
        {"style_image", P::String, true, nullptr, "style reference image"},
        {"steps", P::Integer, false, 200, "optimizer steps"},
        {"image_size", P::Integer, false, 128, "training crop size (multiple of 4)"},
        {"batch_size", P::Integer, false, 1, "crops per step"},
        {"learning_rate", P::Number, false, 1e-2, "Adam learning rate"},
        {"content_weight", P::Number, false, 1.0, "content loss weight"},
        {"style_weight", P::Number, false, 1e5, "style loss weight"},
        {"tv_weight", P::Number, false, 1e-6, "total variation weight"},
        {"base_channels", P::Integer, false, 16, "transform net width"},
        {"res_blocks", P::Integer, false, 3, "transform net residual blocks"},
        {"extractor_weights", P::String, false, "", "optional float32 tensor file for the feature extractor"},
        {"seed", P::Integer, false, 0, "random seed"},
    };
    static const std::vector<ParamSpec> gan{
        {"model_id", P::String, true, nullptr, "identifier of the trained model"},
        {"domain_a", P::String, false, "", "domain A images (ignored for mask2design)"},
        {"domain_b", P::String, true, nullptr, "domain B images"},
        {"experiment", P::String, false, "", "experiment name, e.g. mask2design"},
        {"steps", P::Integer, false, 200, "training steps"},
        {"image_size", P::Integer, false, 64, "training crop size (multiple of 4)"},
        {"batch_size", P::Integer, false, 1, "images per domain per step"},
        {"learning_rate", P::Number, false, 2e-4, "Adam learning rate"},
        {"lambda_cyc", P::Number, false, 10.0, "cycle-consistency weight (cyclegan)"},
        {"lambda_recon", P::Number, false, 1.0, "reconstruction weight (discogan)"},
        {"adversarial_kind", P::String, false, "", "least-squares or cross-entropy; default per kind"},
        {"pool_size", P::Integer, false, 50, "fake-image history size"},
        {"base_channels", P::Integer, false, 16, "generator width"},
        {"res_blocks", P::Integer, false, 3, "generator residual blocks"},
        {"disc_channels", P::Integer, false, 16, "discriminator width"},
        {"seed", P::Integer, false, 0, "random seed"},
    };
    static const std::vector<ParamSpec> baseline{
        {"model_id", P::String, true, nullptr, "identifier of the trained model"},
        {"corpus", P::String, true, nullptr, "dataset directory or image folder"},
        {"steps", P::Integer, false, 200, "training steps"},
        {"image_size", P::Integer, false, 64, "64 or 128"},
        {"latent_dimension", P::Integer, false, 100, "latent size"},
        {"base_channels", P::Integer, false, 16, "network width"},
        {"batch_size", P::Integer, false, 16, "images per step"},
        {"learning_rate", P::Number, false, 2e-4, "Adam learning rate"},
        {"collapse_threshold", P::Number, false, baselines::kDefaultCollapseThreshold, "diversity threshold"},
        {"diversity_samples", P::Integer, false, 16, "samples per diversity check"},
        {"seed", P::Integer, false, 0, "random seed"},
    };
    switch (kind) {
        case ModelKind::Style: return style;
        case ModelKind::CycleGan:
        case ModelKind::DiscoGan: return gan;
        default: return baseline;
    }
}

struct Request {
    ModelKind kind = ModelKind::Style;
    json params;  // complete: every accepted key present with its value or default

    std::string model_id() const { return params.at("model_id").get<std::string>(); }
    std::string digest() const { return json_digest({{"kind", models::to_string(kind)}, {"params", params}}); }
};

namespace detail {

inline bool type_matches(const json& v, ParamType t) {
    switch (t) {
        case ParamType::String: return v.is_string();
        case ParamType::Integer: return v.is_number_integer();
        case ParamType::Number: return v.is_number();
        case ParamType::Boolean: return v.is_boolean();
    }
    return false;
}

inline const char* type_name(ParamType t) {
    switch (t) {
        case ParamType::String: return "string";
        case ParamType::Integer: return "integer";
        case ParamType::Number: return "number";
        case ParamType::Boolean: return "boolean";
    }
    return "";
}

inline bool valid_model_id(const std::string& id) {
    if (id.empty() || id.size() > 128 || id.front() == '.') return false;
    for (char c : id)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
    return true;
}

inline gan::GanConfig gan_config(ModelKind kind, const json& p) {
    const auto gk = kind == ModelKind::CycleGan ? gan::GanKind::CycleGan : gan::GanKind::DiscoGan;
    auto c = gan::GanConfig::defaults(gk);
    c.spec.image_size = p.at("image_size");
    c.spec.generator.base_channels = p.at("base_channels");
    c.spec.generator.res_blocks = p.at("res_blocks");
    c.spec.disc_channels = p.at("disc_channels");
    c.batch_size = p.at("batch_size");
    c.learning_rate = p.at("learning_rate");
    c.weights.lambda_cyc = p.at("lambda_cyc");
    c.weights.lambda_recon = p.at("lambda_recon");
    if (const std::string adv = p.at("adversarial_kind"); !adv.empty())
        c.weights.adversarial_kind = gan::parse_adversarial_kind(adv);
    c.pool_size = p.at("pool_size");
    c.seed = p.at("seed").get<std::uint64_t>();
    return c;
}

inline baselines::BaselineConfig baseline_config(const json& p) {
    baselines::BaselineConfig c;
    c.image_size = p.at("image_size");
    c.latent.dimension = p.at("latent_dimension");
    c.base_channels = p.at("base_channels");
    c.batch_size = p.at("batch_size");
    c.learning_rate = p.at("learning_rate");
    c.collapse_threshold = p.at("collapse_threshold");
    c.diversity_samples = p.at("diversity_samples");
    c.seed = p.at("seed").get<std::uint64_t>();
    return c;
}

inline style::TransferConfig transfer_config(const json& p) {
    style::TransferConfig c;
    c.steps = p.at("steps");
    c.learning_rate = p.at("learning_rate");
    c.content_weight = p.at("content_weight");
    c.style_weight = p.at("style_weight");
    c.tv_weight = p.at("tv_weight");
    c.seed = p.at("seed").get<std::uint64_t>();
    return c;
}

inline style::StyleTrainOptions style_options(const json& p) {
    style::StyleTrainOptions o;
    o.style_id = p.at("model_id");
    o.image_size = p.at("image_size");
    o.batch_size = p.at("batch_size");
    o.net.base_channels = p.at("base_channels");
    o.net.res_blocks = p.at("res_blocks");
    o.extractor.weights_path = p.at("extractor_weights");
    return o;
}

}  // namespace detail

/// Checks keys, types and value ranges; fills defaults. Data paths are not
/// touched here, so a missing corpus surfaces when the training runs.
inline Request make_request(ModelKind kind, const json& params) {
    if (!params.is_object()) fail(ErrorKind::InvalidArgument, "params must be a JSON object");
    const auto& specs = param_specs(kind);
    for (const auto& [key, value] : params.items()) {
        const auto it = std::find_if(specs.begin(), specs.end(), [&](const ParamSpec& s) { return s.name == key; });
        if (it == specs.end())
            fail(ErrorKind::InvalidArgument, "unknown parameter '" + key + "' for kind " + models::to_string(kind));
        if (!detail::type_matches(value, it->type))
            fail(ErrorKind::InvalidArgument, "parameter '" + key + "' must be a " + detail::type_name(it->type));
    }
    Request r{kind, json::object()};
    for (const auto& s : specs) {
        if (params.contains(s.name)) {
            r.params[s.name] = params.at(s.name);
        } else if (s.required) {
            fail(ErrorKind::InvalidArgument, "missing required parameter '" + s.name + "'");
        } else {
            r.params[s.name] = s.fallback;
        }
    }
    if (!detail::valid_model_id(r.model_id()))
        fail(ErrorKind::InvalidArgument, "model_id must be 1-128 characters from [A-Za-z0-9._-] not starting with '.'");
    if (r.params.at("steps").get<long long>() < 0) fail(ErrorKind::InvalidArgument, "steps must be >= 0");
    if (r.params.at("seed").get<long long>() < 0) fail(ErrorKind::InvalidArgument, "seed must be >= 0");
    switch (kind) {
        case ModelKind::Style: {
            auto cfg = detail::transfer_config(r.params);
            if (cfg.steps < 1) fail(ErrorKind::InvalidArgument, "steps must be at least 1");
            cfg.validate();
            const auto o = detail::style_options(r.params);
            if (o.image_size < 8 || o.image_size % 4 != 0)
                fail(ErrorKind::InvalidArgument, "image_size must be a multiple of 4 and at least 8");
            if (o.batch_size < 1 || o.net.base_channels < 1 || o.net.res_blocks < 0)
                fail(ErrorKind::InvalidArgument, "batch_size and base_channels must be positive");
            break;
        }
        case ModelKind::CycleGan:
        case ModelKind::DiscoGan: {
            detail::gan_config(kind, r.params).validate();
            const std::string experiment = r.params.at("experiment");
            if (kind == ModelKind::CycleGan && experiment == gan::kMask2Design)
                fail(ErrorKind::InvalidArgument, "mask2design is a discogan experiment");
            if (experiment != gan::kMask2Design && r.params.at("domain_a").get<std::string>().empty())
                fail(ErrorKind::InvalidArgument, "domain_a is required unless experiment is mask2design");
            break;
        }
        case ModelKind::Dcgan:
        case ModelKind::Vae: detail::baseline_config(r.params).validate(); break;
    }
    return r;
}

inline Request make_request(const std::string& kind, const json& params) {
    ModelKind k;
    try {
        k = models::parse_model_kind(kind);
    } catch (const Error& e) {
        fail(ErrorKind::InvalidArgument, e.what());
    }
    return make_request(k, params);
}

using Progress = std::function<void(int step, int total)>;

/// Trains the requested model and writes its checkpoint into `out_dir`.
inline void run(const Request& req, const fs::path& out_dir, const Progress& progress = {}) {
    const json& p = req.params;
    switch (req.kind) {
        case ModelKind::Style: {
            const auto corpus = dataset::load_corpus(p.at("corpus").get<std::string>());
            const auto style_image = io::read_image(p.at("style_image").get<std::string>());
            auto opts = detail::style_options(p);
            opts.on_step = progress;
            const auto model = style::train_style_model(corpus, style_image, detail::transfer_config(p), opts);
            style::save_style_model(model, out_dir);
            break;
        }
        case ModelKind::CycleGan:
        case ModelKind::DiscoGan: {
            const auto config = detail::gan_config(req.kind, p);
            const std::string a = p.at("domain_a"), b = p.at("domain_b");
            gan::Experiment experiment{p.at("experiment"), a, b};
            if (experiment.name.empty()) experiment.name = req.model_id();
            gan::train_from_folders(a, b, config, experiment,
                                    {.steps = p.at("steps"), .checkpoint_dir = out_dir, .on_step = progress});
            break;
        }
        case ModelKind::Dcgan:
        case ModelKind::Vae: {
            const auto corpus = dataset::load_corpus(p.at("corpus").get<std::string>());
            const auto config = detail::baseline_config(p);
            const baselines::TrainOptions opts{.steps = p.at("steps"), .checkpoint_dir = out_dir, .on_step = progress};
            if (req.kind == ModelKind::Dcgan) {
                baselines::Dcgan<float> m(config);
                baselines::train_dcgan(m, corpus, opts);
            } else {
                baselines::Vae<float> m(config);
                baselines::train_vae(m, corpus, opts);
            }
            break;
        }
    }
}

}  // namespace loomgen::training
