#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "loomgen/error.hpp"
#include "loomgen/image.hpp"
#include "loomgen/image_io.hpp"
#include "loomgen/nn/layers.hpp"
#include "loomgen/util.hpp"

namespace loomgen::style {

namespace fs = std::filesystem;
using nn::Tensor;
using nn::Var;

// ---------------------------------------------------------------------------
// Feature extractor

/// A frozen VGG-style backbone: blocks of 3x3 conv + ReLU separated by 2x2
/// average pooling. Layers are named relu{block}_{conv}, 1-based.
struct ExtractorConfig {
    std::vector<int> block_channels{16, 32, 64, 64};
    int convs_per_block = 2;
    std::vector<std::string> content_layers{"relu2_2"};
    std::vector<std::string> style_layers{"relu1_2", "relu2_2", "relu3_2", "relu4_2"};
    std::uint64_t seed = 1234;
    std::string weights_path;  // optional LGTN file of float32 weights overriding the seeded ones

    json to_json() const {
        return {{"block_channels", block_channels}, {"convs_per_block", convs_per_block},
                {"content_layers", content_layers}, {"style_layers", style_layers},
                {"seed", seed},                     {"weights_path", weights_path}};
    }
    static ExtractorConfig from_json(const json& j) {
        ExtractorConfig c;
        c.block_channels = j.value("block_channels", c.block_channels);
        c.convs_per_block = j.value("convs_per_block", c.convs_per_block);
        c.content_layers = j.value("content_layers", c.content_layers);
        c.style_layers = j.value("style_layers", c.style_layers);
        c.seed = j.value("seed", c.seed);
        c.weights_path = j.value("weights_path", c.weights_path);
        return c;
    }
};

template <typename T>
class FeatureExtractor {
public:
    explicit FeatureExtractor(ExtractorConfig config = {}) : config_(std::move(config)) {
        if (config_.block_channels.empty() || config_.convs_per_block < 1)
            fail(ErrorKind::InvalidArgument, "extractor needs at least one conv block");
        Rng rng(config_.seed);
        int cin = 3;
        for (std::size_t b = 0; b < config_.block_channels.size(); ++b) {
            for (int k = 0; k < config_.convs_per_block; ++k) {
                const int cout = config_.block_channels[b];
                const std::string name = "relu" + std::to_string(b + 1) + "_" + std::to_string(k + 1);
                // Weights are drawn in double so float and double extractors agree.
                auto w = nn::randn<double>({cout, cin, 3, 3}, rng, std::sqrt(2.0 / (cin * 9)));
                auto bias = nn::rand_uniform<double>({cout}, rng, -0.05, 0.05);
                layers_.push_back({name, static_cast<int>(b),
                                   params_.add(name + ".weight", w.template cast<T>(), false),
                                   params_.add(name + ".bias", bias.template cast<T>(), false)});
                cin = cout;
            }
        }
        if (!config_.weights_path.empty()) {
            std::map<std::string, Tensor<T>> loaded;
            for (auto& [k, v] : nn::load_tensors<float>(config_.weights_path)) loaded.emplace(k, v.template cast<T>());
            params_.restore(loaded);
        }
        const auto check = [&](const std::vector<std::string>& names) {
            for (const auto& n : names)
                if (layer_index(n) < 0) fail(ErrorKind::LayerMismatch, "unknown extractor layer " + n);
        };
        check(config_.content_layers);
        check(config_.style_layers);
        if (config_.style_layers.empty()) fail(ErrorKind::LayerMismatch, "no style layers configured");
        int deepest_style = 0;
        for (const auto& n : config_.style_layers) deepest_style = std::max(deepest_style, layer_index(n));
        for (const auto& n : config_.content_layers)
            if (layer_index(n) >= deepest_style)
                fail(ErrorKind::LayerMismatch, "content layer " + n + " is not shallower than the deepest style layer");
    }

    const ExtractorConfig& config() const { return config_; }
    const std::vector<std::string>& content_layers() const { return config_.content_layers; }
    const std::vector<std::string>& style_layers() const { return config_.style_layers; }
    const nn::ParameterSet<T>& parameters() const { return params_; }

    int layer_index(const std::string& name) const {
        for (std::size_t i = 0; i < layers_.size(); ++i)
            if (layers_[i].name == name) return static_cast<int>(i);
        return -1;
    }

    /// Activations of the requested layers for an N x 3 x H x W batch in [0, 1].
    std::map<std::string, Var<T>> features(const Var<T>& images, const std::vector<std::string>& wanted) const {
        int last = -1;
        for (const auto& n : wanted) last = std::max(last, layer_index(n));
        std::map<std::string, Var<T>> out;
        Var<T> h = nn::add_scalar(nn::scale(images, T{2}), T{-1});
        int block = 0;
        for (int i = 0; i <= last; ++i) {
            const auto& layer = layers_[static_cast<std::size_t>(i)];
            if (layer.block != block) {
                h = nn::avg_pool2(h);
                block = layer.block;
            }
            h = nn::relu(nn::conv2d(h, layer.weight, layer.bias, 1, 1, nn::PadMode::Zero));
            if (std::find(wanted.begin(), wanted.end(), layer.name) != wanted.end()) out.emplace(layer.name, h);
        }
        return out;
    }

private:
    struct Layer {
        std::string name;
        int block;
        Var<T> weight, bias;
    };
    ExtractorConfig config_;
    nn::ParameterSet<T> params_;
    std::vector<Layer> layers_;
};

// ---------------------------------------------------------------------------
// Texture statistics and perceptual losses

/// Gram matrix of a single C x H x W feature map: F F^T / (C H W).
template <typename T>
Tensor<T> gram(const Tensor<T>& feature_map) {
    if (feature_map.rank() != 3) fail(ErrorKind::InvalidArgument, "gram expects a C x H x W feature map");
    const auto batched = feature_map.reshaped({1, feature_map.dim(0), feature_map.dim(1), feature_map.dim(2)});
    nn::NoGradGuard guard;
    const auto g = nn::gram(Var<T>::constant(batched)).value();
    return g.reshaped({feature_map.dim(0), feature_map.dim(0)});
}

/// Per-style-layer Gram matrices (C x C) of a single image.
template <typename T>
using StyleTargets = std::map<std::string, Tensor<T>>;

template <typename T>
StyleTargets<T> style_targets(const Var<T>& image, const FeatureExtractor<T>& extractor) {
    if (image.dim(0) != 1) fail(ErrorKind::InvalidArgument, "style reference must be a single image");
    nn::NoGradGuard guard;
    StyleTargets<T> out;
    for (const auto& [name, f] : extractor.features(image, extractor.style_layers())) {
        const auto g = nn::gram(f).value();
        out.emplace(name, g.reshaped({g.dim(1), g.dim(2)}));
    }
    return out;
}

template <typename T>
StyleTargets<T> style_targets(const RasterImage& image, const FeatureExtractor<T>& extractor) {
    return style_targets(Var<T>::constant(nn::to_tensor<T>(image)), extractor);
}

/// Sum over style layers of the squared Frobenius distance between the
/// generated image's Gram matrices and the targets (batch-averaged).
template <typename T>
Var<T> style_loss(const Var<T>& generated, const StyleTargets<T>& targets, const FeatureExtractor<T>& extractor) {
    const auto& layers = extractor.style_layers();
    if (targets.size() != std::set<std::string>(layers.begin(), layers.end()).size())
        fail(ErrorKind::LayerMismatch, "style targets do not cover exactly the extractor's style layers");
    for (const auto& name : layers)
        if (!targets.contains(name)) fail(ErrorKind::LayerMismatch, "missing style target for " + name);
    Var<T> total;
    for (const auto& [name, f] : extractor.features(generated, layers)) {
        auto term = nn::frobenius_sq_to(nn::gram(f), targets.at(name));
        total = total.valid() ? nn::add(total, term) : term;
    }
    return total;
}

/// Sum over content layers of the mean squared feature difference.
template <typename T>
Var<T> content_loss(const Var<T>& generated, const Var<T>& content_ref, const FeatureExtractor<T>& extractor) {
    if (generated.shape() != content_ref.shape())
        fail(ErrorKind::DimensionMismatch, "content_loss inputs differ in shape");
    const auto fg = extractor.features(generated, extractor.content_layers());
    const auto fc = extractor.features(content_ref, extractor.content_layers());
    Var<T> total = Var<T>::constant(Tensor<T>({1}));
    for (const auto& [name, f] : fg) total = nn::add(total, nn::mse(f, fc.at(name)));
    return total;
}

inline double style_loss(const RasterImage& generated, const StyleTargets<double>& targets,
                         const FeatureExtractor<double>& extractor) {
    nn::NoGradGuard guard;
    return style_loss(Var<double>::constant(nn::to_tensor<double>(generated)), targets, extractor).item();
}

inline double content_loss(const RasterImage& generated, const RasterImage& content_ref,
                           const FeatureExtractor<double>& extractor) {
    nn::NoGradGuard guard;
    return content_loss(Var<double>::constant(nn::to_tensor<double>(generated)),
                        Var<double>::constant(nn::to_tensor<double>(content_ref)), extractor)
        .item();
}

// ---------------------------------------------------------------------------
// Configuration and bookkeeping

struct TransferConfig {
    double content_weight = 1.0;
    double style_weight = 1e5;
    double tv_weight = 1e-6;
    int steps = 200;
    double learning_rate = 1e-2;
    std::uint64_t seed = 0;
    double init_noise = 0.0;  // optimize_image start: content + U(-a, a)

    void validate() const {
        if (content_weight < 0 || style_weight < 0 || tv_weight < 0)
            fail(ErrorKind::InvalidArgument, "loss weights must be non-negative");
        if (content_weight == 0 && style_weight == 0)
            fail(ErrorKind::InvalidArgument, "content and style weights cannot both be zero");
        if (steps < 1) fail(ErrorKind::InvalidArgument, "steps must be at least 1");
        if (!(learning_rate > 0)) fail(ErrorKind::InvalidArgument, "learning rate must be positive");
    }

    json to_json() const {
        return {{"content_weight", content_weight}, {"style_weight", style_weight}, {"tv_weight", tv_weight},
                {"steps", steps},                   {"learning_rate", learning_rate}, {"seed", seed},
                {"init_noise", init_noise}};
    }
    static TransferConfig from_json(const json& j) {
        TransferConfig c;
        c.content_weight = j.value("content_weight", c.content_weight);
        c.style_weight = j.value("style_weight", c.style_weight);
        c.tv_weight = j.value("tv_weight", c.tv_weight);
        c.steps = j.value("steps", c.steps);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.seed = j.value("seed", c.seed);
        c.init_noise = j.value("init_noise", c.init_noise);
        return c;
    }
};

struct LossRow {
    int step = 0;
    double content = 0, style = 0, tv = 0, total = 0;
    friend bool operator==(const LossRow&, const LossRow&) = default;
};

/// Raised when a loss turns NaN/inf; carries the rows recorded so far.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& detail, std::vector<LossRow> history)
        : Error(ErrorKind::NonFiniteLoss, detail), history_(std::move(history)) {}
    const std::vector<LossRow>& history() const { return history_; }

private:
    std::vector<LossRow> history_;
};

template <typename T>
struct LossTerms {
    Var<T> content, style, tv, total;

    LossRow row(int step) const {
        return {step, static_cast<double>(content.item()), static_cast<double>(style.item()),
                static_cast<double>(tv.item()), static_cast<double>(total.item())};
    }
};

template <typename T>
LossTerms<T> perceptual_objective(const Var<T>& generated, const Var<T>& content_ref, const StyleTargets<T>& targets,
                                  const FeatureExtractor<T>& extractor, const TransferConfig& cfg) {
    LossTerms<T> t;
    t.content = cfg.content_weight > 0 ? content_loss(generated, content_ref, extractor)
                                       : Var<T>::constant(Tensor<T>({1}));
    t.style = cfg.style_weight > 0 ? style_loss(generated, targets, extractor) : Var<T>::constant(Tensor<T>({1}));
    t.tv = nn::tv_loss(generated);
    t.total = nn::add(nn::add(nn::scale(t.content, static_cast<T>(cfg.content_weight)),
                              nn::scale(t.style, static_cast<T>(cfg.style_weight))),
                      nn::scale(t.tv, static_cast<T>(cfg.tv_weight)));
    return t;
}

inline bool finite_row(const LossRow& r) {
    return std::isfinite(r.content) && std::isfinite(r.style) && std::isfinite(r.tv) && std::isfinite(r.total);
}

// ---------------------------------------------------------------------------
// Optimization in pixel space

struct OptimizeResult {
    RasterImage image;
    std::vector<LossRow> history;  // one row per evaluated iterate, step 0 = start
    int best_step = 0;
};

/// Adam on the pixel array (projected back to [0, 1] after each update),
/// starting from the content image plus seeded noise. Returns the iterate
/// with the lowest total loss, so the final loss never exceeds the initial.
template <typename T = float>
OptimizeResult optimize_image(const RasterImage& content, const RasterImage& style_image, const TransferConfig& cfg,
                              const FeatureExtractor<T>& extractor) {
    cfg.validate();
    const auto targets = style_targets(style_image, extractor);
    const auto content_ref = Var<T>::constant(nn::to_tensor<T>(content));
    Tensor<T> start = content_ref.value();
    if (cfg.init_noise > 0) {
        Rng rng(cfg.seed);
        for (auto& v : start.values())
            v = std::clamp(v + static_cast<T>(rng.uniform(-cfg.init_noise, cfg.init_noise)), T{0}, T{1});
    }
    auto pixels = Var<T>::parameter(start);
    nn::Adam<T> opt({pixels}, {.learning_rate = cfg.learning_rate});

    OptimizeResult result;
    Tensor<T> best = start;
    double best_total = 0;
    for (int step = 0; step <= cfg.steps; ++step) {
        opt.zero_grad();
        const auto terms = perceptual_objective(pixels, content_ref, targets, extractor, cfg);
        const LossRow row = terms.row(step);
        if (!finite_row(row)) throw DivergenceError("non-finite loss at step " + std::to_string(step), result.history);
        result.history.push_back(row);
        if (step == 0 || row.total < best_total) {
            best_total = row.total;
            best = pixels.value();
            result.best_step = step;
        }
        if (step == cfg.steps) break;
        nn::backward(terms.total);
        opt.step();
        for (auto& v : pixels.mutable_value().values()) v = std::clamp(v, T{0}, T{1});
    }
    result.image = nn::to_image(best);
    return result;
}

// ---------------------------------------------------------------------------
// Feed-forward transform network

struct TransformNetConfig {
    int base_channels = 16;
    int res_blocks = 3;
    int outer_kernel = 9;

    json to_json() const {
        return {{"base_channels", base_channels}, {"res_blocks", res_blocks}, {"outer_kernel", outer_kernel}};
    }
    static TransformNetConfig from_json(const json& j) {
        return {j.value("base_channels", 16), j.value("res_blocks", 3), j.value("outer_kernel", 9)};
    }
};

/// Outer conv (9x9 by default) -> two stride-2 downsampling convs -> residual core -> two
/// (nearest upsample + conv) stages -> outer conv -> sigmoid. Instance norm and
/// ReLU follow every conv except the last.
template <typename T>
class TransformNet {
public:
    static constexpr int kStride = 4;
    static constexpr int kMinSize = 8;

    TransformNet(TransformNetConfig config, std::uint64_t seed) : config_(config) {
        if (config.base_channels < 1 || config.res_blocks < 0 || config.outer_kernel < 1 || config.outer_kernel % 2 == 0)
            fail(ErrorKind::InvalidArgument, "invalid transform net configuration");
        Rng rng(seed);
        const int b = config.base_channels;
        using nn::PadMode;
        const int k = config.outer_kernel;
        in_ = {ps_, "in", 3, b, k, 1, k / 2, PadMode::Reflect, rng};
        in_norm_ = {ps_, "in_norm", b};
        down1_ = {ps_, "down1", b, 2 * b, 3, 2, 1, PadMode::Reflect, rng};
        down1_norm_ = {ps_, "down1_norm", 2 * b};
        down2_ = {ps_, "down2", 2 * b, 4 * b, 3, 2, 1, PadMode::Reflect, rng};
        down2_norm_ = {ps_, "down2_norm", 4 * b};
        for (int i = 0; i < config.res_blocks; ++i) res_.emplace_back(ps_, "res" + std::to_string(i), 4 * b, rng);
        up1_ = {ps_, "up1", 4 * b, 2 * b, 3, 1, 1, PadMode::Reflect, rng};
        up1_norm_ = {ps_, "up1_norm", 2 * b};
        up2_ = {ps_, "up2", 2 * b, b, 3, 1, 1, PadMode::Reflect, rng};
        up2_norm_ = {ps_, "up2_norm", b};
        out_ = {ps_, "out", b, 3, k, 1, k / 2, PadMode::Reflect, rng, 0.01};
    }

    /// Requires H and W to be multiples of kStride and at least kMinSize.
    Var<T> operator()(const Var<T>& x) const {
        using namespace nn;
        Var<T> h = relu(in_norm_(in_(x)));
        h = relu(down1_norm_(down1_(h)));
        h = relu(down2_norm_(down2_(h)));
        for (const auto& r : res_) h = r(h);
        h = relu(up1_norm_(up1_(upsample2x(h))));
        h = relu(up2_norm_(up2_(upsample2x(h))));
        return sigmoid(out_(h));
    }

    nn::ParameterSet<T>& parameters() { return ps_; }
    const nn::ParameterSet<T>& parameters() const { return ps_; }
    const TransformNetConfig& config() const { return config_; }

private:
    TransformNetConfig config_;
    nn::ParameterSet<T> ps_;
    nn::Conv2d<T> in_, down1_, down2_, up1_, up2_, out_;
    nn::InstanceNorm<T> in_norm_, down1_norm_, down2_norm_, up1_norm_, up2_norm_;
    std::vector<nn::ResidualBlock<T>> res_;
};

/// Runs an image-to-image net whose spatial strides divide `stride` on an
/// arbitrary-size image: edge-replicate pad up to a valid size, run without
/// recording a graph, crop back and clamp to [0, 1].
template <typename T, typename Net>
RasterImage run_padded(const Net& net, const RasterImage& image, int stride, int min_size) {
    const auto round_up = [&](int v) { return std::max(min_size, (v + stride - 1) / stride * stride); };
    const int h = image.height(), w = image.width();
    const int ph = round_up(h), pw = round_up(w);
    Tensor<T> x({1, 3, ph, pw});
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < ph; ++y)
            for (int xx = 0; xx < pw; ++xx)
                x.at(0, c, y, xx) = static_cast<T>(image.at(std::min(y, h - 1), std::min(xx, w - 1), c));
    nn::NoGradGuard guard;
    const auto y = net(Var<T>::constant(std::move(x)));
    RasterImage out(h, w);
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < h; ++r)
            for (int cc = 0; cc < w; ++cc)
                out.at(r, cc, c) = std::clamp(static_cast<float>(y.value().at(0, c, r, cc)), 0.0f, 1.0f);
    return out;
}

// ---------------------------------------------------------------------------
// Style model artifact

struct StyleModel {
    std::string style_id;
    int image_size = 128;
    std::string created_at;
    json config;
    std::vector<LossRow> loss_history;
    std::shared_ptr<TransformNet<float>> net;
};

inline json history_to_json(const std::vector<LossRow>& rows) {
    json out = json::array();
    for (const auto& r : rows) out.push_back({r.step, r.content, r.style, r.tv});
    return out;
}

/// Writes `weights.bin` and `meta.json` into `dir`.
inline void save_style_model(const StyleModel& model, const fs::path& dir) {
    fs::create_directories(dir);
    nn::save_tensors(dir / "weights.bin", model.net->parameters().snapshot());
    const ordered_json meta{{"kind", "style"},
                            {"version", 1},
                            {"style_id", model.style_id},
                            {"image_size", model.image_size},
                            {"created_at", model.created_at},
                            {"config", model.config},
                            {"loss_history", history_to_json(model.loss_history)}};
    io::write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
}

inline StyleModel load_style_model(const fs::path& dir) {
    try {
        const auto meta = json::parse(io::read_file(dir / "meta.json"));
        if (meta.at("kind") != "style") fail(ErrorKind::ModelLoadError, "checkpoint kind is not style");
        if (meta.at("version") != 1) fail(ErrorKind::ModelLoadError, "unsupported style model version");
        StyleModel m;
        m.style_id = meta.at("style_id").get<std::string>();
        m.image_size = meta.at("image_size").get<int>();
        m.created_at = meta.value("created_at", "");
        m.config = meta.at("config");
        const auto weights = TransferConfig::from_json(m.config);
        for (const auto& r : meta.at("loss_history")) {
            LossRow row{r.at(0).get<int>(), r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>(), 0};
            row.total = weights.content_weight * row.content + weights.style_weight * row.style +
                        weights.tv_weight * row.tv;
            m.loss_history.push_back(row);
        }
        m.net = std::make_shared<TransformNet<float>>(TransformNetConfig::from_json(m.config.value("net", json::object())), 0);
        m.net->parameters().restore(nn::load_tensors<float>(dir / "weights.bin"));
        return m;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ModelLoadError) throw;
        fail(ErrorKind::ModelLoadError, dir.string() + ": " + e.what());
    } catch (const json::exception& e) {
        fail(ErrorKind::ModelLoadError, dir.string() + ": malformed meta.json: " + e.what());
    }
}

/// Output has the input's H x W, values in [0, 1].
inline RasterImage stylize(const RasterImage& image, const StyleModel& model) {
    if (!model.net) fail(ErrorKind::ModelLoadError, "style model has no network");
    return run_padded<float>(*model.net, image, TransformNet<float>::kStride, TransformNet<float>::kMinSize);
}

// ---------------------------------------------------------------------------
// Training the feed-forward model

struct StyleTrainOptions {
    std::string style_id = "style";
    int image_size = 128;
    int batch_size = 1;
    TransformNetConfig net;
    ExtractorConfig extractor;
    std::function<void(int step, int total)> on_step;

    json to_json(const TransferConfig& cfg) const {
        json j = cfg.to_json();
        j["batch_size"] = batch_size;
        j["net"] = net.to_json();
        j["extractor"] = extractor.to_json();
        return j;
    }
};

inline StyleModel train_style_model(const std::vector<RasterImage>& corpus, const RasterImage& style_image,
                                    const TransferConfig& cfg, const StyleTrainOptions& opts,
                                    const FeatureExtractor<float>& extractor) {
    cfg.validate();
    if (corpus.empty()) fail(ErrorKind::EmptyCorpus, "content corpus is empty");
    if (opts.image_size < TransformNet<float>::kMinSize || opts.image_size % TransformNet<float>::kStride != 0)
        fail(ErrorKind::InvalidArgument, "image_size must be a multiple of 4 and at least 8");
    if (opts.batch_size < 1) fail(ErrorKind::InvalidArgument, "batch_size must be positive");

    const auto targets = style_targets(fit_square(style_image, opts.image_size), extractor);

    StyleModel model;
    model.style_id = opts.style_id;
    model.image_size = opts.image_size;
    StyleTrainOptions recorded = opts;
    recorded.extractor = extractor.config();
    model.config = recorded.to_json(cfg);
    model.net = std::make_shared<TransformNet<float>>(opts.net, derive_seed(cfg.seed, 1));
    auto& net = *model.net;
    nn::Adam<float> opt(net.parameters().trainable(), {.learning_rate = cfg.learning_rate});
    Rng rng(cfg.seed);

    for (int step = 0; step < cfg.steps; ++step) {
        std::vector<RasterImage> batch;
        for (int i = 0; i < opts.batch_size; ++i)
            batch.push_back(random_square_crop(corpus[rng.below(corpus.size())], opts.image_size, rng));
        const auto content = Var<float>::constant(nn::to_tensor<float>(batch));
        opt.zero_grad();
        const auto generated = net(content);
        const auto terms = perceptual_objective(generated, content, targets, extractor, cfg);
        const LossRow row = terms.row(step);
        if (!finite_row(row))
            throw DivergenceError("non-finite loss at step " + std::to_string(step), model.loss_history);
        model.loss_history.push_back(row);
        nn::backward(terms.total);
        opt.step();
        if (opts.on_step) opts.on_step(step + 1, cfg.steps);
    }
    model.created_at = utc_timestamp();
    return model;
}

inline StyleModel train_style_model(const std::vector<RasterImage>& corpus, const RasterImage& style_image,
                                    const TransferConfig& cfg, const StyleTrainOptions& opts) {
    return train_style_model(corpus, style_image, cfg, opts, FeatureExtractor<float>(opts.extractor));
}

}  // namespace loomgen::style
