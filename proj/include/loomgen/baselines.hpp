#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "loomgen/checkpoint.hpp"
#include "loomgen/error.hpp"
#include "loomgen/image.hpp"
#include "loomgen/nn/layers.hpp"

namespace loomgen::baselines {

namespace fs = std::filesystem;
using nn::Tensor;
using nn::Var;

// ---------------------------------------------------------------------------
// Diversity diagnostic

struct DiversityReport {
    double mean_pairwise_l2 = 0;
    bool collapse_flag = false;
};

inline constexpr double kDefaultCollapseThreshold = 0.05;

/// RMS difference sqrt(mean((x - y)^2)) over all values, averaged over all
/// unordered pairs. Flags collapse when the mean falls below `tau`.
inline DiversityReport diversity_score(const std::vector<RasterImage>& samples,
                                       double tau = kDefaultCollapseThreshold) {
    if (samples.size() < 2) fail(ErrorKind::TooFewSamples, "diversity needs at least two samples");
    for (const auto& s : samples)
        if (!s.same_shape(samples[0])) fail(ErrorKind::DimensionMismatch, "samples differ in shape");
    double total = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = i + 1; j < samples.size(); ++j, ++pairs) {
            const auto& x = samples[i].values();
            const auto& y = samples[j].values();
            double s = 0;
            for (std::size_t k = 0; k < x.size(); ++k) s += (double(x[k]) - y[k]) * (double(x[k]) - y[k]);
            total += std::sqrt(s / static_cast<double>(x.size()));
        }
    DiversityReport r;
    r.mean_pairwise_l2 = total / static_cast<double>(pairs);
    r.collapse_flag = r.mean_pairwise_l2 < tau;
    return r;
}

struct DiversityPoint {
    int step = 0;
    int epoch = 0;
    DiversityReport report;

    json to_json() const {
        return {{"step", step},
                {"epoch", epoch},
                {"mean_pairwise_l2", report.mean_pairwise_l2},
                {"collapse_flag", report.collapse_flag}};
    }
    static DiversityPoint from_json(const json& j) {
        return {j.at("step").get<int>(), j.at("epoch").get<int>(),
                {j.at("mean_pairwise_l2").get<double>(), j.at("collapse_flag").get<bool>()}};
    }
};

// ---------------------------------------------------------------------------
// Configuration

struct LatentSpec {
    int dimension = 100;
};

struct BaselineConfig {
    int image_size = 64;  // 64 or 128
    LatentSpec latent;
    int base_channels = 16;
    int batch_size = 16;
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double collapse_threshold = kDefaultCollapseThreshold;
    int diversity_samples = 16;
    std::uint64_t seed = 0;

    void validate() const {
        if (image_size != 64 && image_size != 128) fail(ErrorKind::InvalidArgument, "image_size must be 64 or 128");
        if (latent.dimension < 1) fail(ErrorKind::InvalidArgument, "latent dimension must be >= 1");
        if (base_channels < 1) fail(ErrorKind::InvalidArgument, "base_channels must be positive");
        if (batch_size < 2) fail(ErrorKind::InvalidArgument, "batch_size must be >= 2 for batch norm");
        if (!(learning_rate > 0)) fail(ErrorKind::InvalidArgument, "learning rate must be positive");
        if (diversity_samples < 2) fail(ErrorKind::InvalidArgument, "diversity_samples must be >= 2");
    }
    json to_json() const {
        return {{"image_size", image_size},       {"latent_dimension", latent.dimension},
                {"base_channels", base_channels}, {"batch_size", batch_size},
                {"learning_rate", learning_rate}, {"beta1", beta1},
                {"collapse_threshold", collapse_threshold}, {"diversity_samples", diversity_samples},
                {"seed", seed}};
    }
    static BaselineConfig from_json(const json& j) {
        BaselineConfig c;
        c.image_size = j.value("image_size", c.image_size);
        c.latent.dimension = j.value("latent_dimension", c.latent.dimension);
        c.base_channels = j.value("base_channels", c.base_channels);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.beta1 = j.value("beta1", c.beta1);
        c.collapse_threshold = j.value("collapse_threshold", c.collapse_threshold);
        c.diversity_samples = j.value("diversity_samples", c.diversity_samples);
        c.seed = j.value("seed", c.seed);
        return c;
    }

    /// Number of 2x resolution stages between 4x4 and image_size.
    int stages() const { return image_size == 64 ? 4 : 5; }
    int top_channels() const { return base_channels << (stages() - 1); }
};

// ---------------------------------------------------------------------------
// Networks

/// latent -> linear -> top_channels x 4 x 4 -> (upsample, conv3, BN, ReLU)*
/// -> upsample, conv3 -> sigmoid.
template <typename T>
class ConvDecoder {
public:
    ConvDecoder(const BaselineConfig& c, std::uint64_t seed) : top_(c.top_channels()) {
        Rng rng(seed);
        fc_ = {ps_, "fc", c.latent.dimension, top_ * 16, rng};
        fc_norm_ = {ps_, "fc_norm", top_};
        int ch = top_;
        for (int i = 0; i < c.stages() - 1; ++i, ch /= 2) {
            const std::string name = "up" + std::to_string(i);
            convs_.emplace_back(ps_, name, ch, ch / 2, 3, 1, 1, nn::PadMode::Zero, rng);
            norms_.emplace_back(ps_, name + "_norm", ch / 2);
        }
        out_ = {ps_, "out", ch, 3, 3, 1, 1, nn::PadMode::Zero, rng};
    }

    Var<T> operator()(const Var<T>& z, bool training) const {
        const int n = z.dim(0);
        Var<T> h = nn::relu(fc_norm_(nn::reshape(fc_(z), {n, top_, 4, 4}), training));
        for (std::size_t i = 0; i < convs_.size(); ++i) h = nn::relu(norms_[i](convs_[i](nn::upsample2x(h)), training));
        return nn::sigmoid(out_(nn::upsample2x(h)));
    }

    nn::ParameterSet<T>& parameters() { return ps_; }
    const nn::ParameterSet<T>& parameters() const { return ps_; }

private:
    int top_;
    nn::ParameterSet<T> ps_;
    nn::Linear<T> fc_;
    nn::BatchNorm<T> fc_norm_;
    std::vector<nn::Conv2d<T>> convs_;
    std::vector<nn::BatchNorm<T>> norms_;
    nn::Conv2d<T> out_;
};

/// image -> (conv4 s2, [BN], LeakyReLU)* down to top_channels x 4 x 4,
/// flattened to N x features.
template <typename T>
class ConvEncoder {
public:
    ConvEncoder(const BaselineConfig& c, Rng& rng) {
        int ch = 3;
        for (int i = 0; i < c.stages(); ++i) {
            const int out = c.base_channels << i;
            const std::string name = "down" + std::to_string(i);
            convs_.emplace_back(ps_, name, ch, out, 4, 2, 1, nn::PadMode::Zero, rng);
            if (i > 0) norms_.emplace_back(ps_, name + "_norm", out);
            ch = out;
        }
        features_ = ch * 16;
    }

    Var<T> operator()(const Var<T>& x, bool training) const {
        Var<T> h = nn::leaky_relu(convs_[0](x));
        for (std::size_t i = 1; i < convs_.size(); ++i) h = nn::leaky_relu(norms_[i - 1](convs_[i](h), training));
        return nn::reshape(h, {x.dim(0), features_});
    }

    int features() const { return features_; }
    nn::ParameterSet<T>& parameters() { return ps_; }
    const nn::ParameterSet<T>& parameters() const { return ps_; }

private:
    nn::ParameterSet<T> ps_;
    std::vector<nn::Conv2d<T>> convs_;
    std::vector<nn::BatchNorm<T>> norms_;
    int features_ = 0;
};

template <typename T>
Tensor<T> latent_batch(int n, int dimension, Rng& rng) {
    return nn::randn<T>({n, dimension}, rng, 1.0);
}

inline void check_corpus(const std::vector<RasterImage>& corpus) {
    if (corpus.empty()) fail(ErrorKind::EmptyCorpus, "training corpus is empty");
}

/// Random crops (or fitted squares) of `size` from the corpus.
template <typename T>
Tensor<T> image_batch(const std::vector<RasterImage>& corpus, int n, int size, Rng& rng) {
    std::vector<RasterImage> batch;
    for (int i = 0; i < n; ++i) batch.push_back(random_square_crop(corpus[rng.below(corpus.size())], size, rng));
    return nn::to_tensor<T>(batch);
}

template <typename T>
std::vector<RasterImage> to_images(const Tensor<T>& t) {
    std::vector<RasterImage> out;
    for (int i = 0; i < t.dim(0); ++i) out.push_back(nn::to_image(t, i));
    return out;
}

struct TrainOptions {
    int steps = 200;
    fs::path checkpoint_dir;
    std::function<void(int step, int total)> on_step;
};

inline int epoch_length(std::size_t corpus_size, int batch_size) {
    return std::max(1, static_cast<int>((corpus_size + batch_size - 1) / batch_size));
}

// ---------------------------------------------------------------------------
// Shared trainer bookkeeping

template <typename T, typename Row>
class BaselineModel {
public:
    explicit BaselineModel(BaselineConfig config) : config_((config.validate(), std::move(config))) {}

    const BaselineConfig& config() const { return config_; }
    int step() const { return step_; }
    const std::vector<Row>& history() const { return history_; }
    const std::vector<DiversityPoint>& diversity_history() const { return diversity_; }

protected:
    json common_meta(const char* kind) const {
        json rows = json::array();
        for (const auto& r : history_) rows.push_back(r.to_json());
        json div = json::array();
        for (const auto& d : diversity_) div.push_back(d.to_json());
        json cfg = config_.to_json();
        cfg["dtype"] = checkpoint::dtype_name<T>();
        return {{"kind", kind},         {"version", 1},           {"image_size", config_.image_size},
                {"config", cfg},        {"loss_history", rows},   {"diversity_history", div},
                {"step", step_},        {"rng_state", rng_.state()}, {"created_at", utc_timestamp()}};
    }

    void restore_common(const json& meta) {
        if (meta.at("config").value("dtype", "") != checkpoint::dtype_name<T>())
            fail(ErrorKind::ModelLoadError, "checkpoint precision does not match");
        for (const auto& r : meta.at("loss_history")) history_.push_back(Row::from_json(r));
        for (const auto& d : meta.at("diversity_history")) diversity_.push_back(DiversityPoint::from_json(d));
        step_ = meta.at("step").get<int>();
        rng_.restore(meta.at("rng_state").get<std::string>());
    }

    void write_common(const fs::path& dir, const char* kind) const {
        json div = json::array();
        for (const auto& d : diversity_) div.push_back(d.to_json());
        io::write_file_atomic(dir / "diversity.json", div.dump(2) + "\n");
        const json meta = common_meta(kind);
        checkpoint::write_meta(dir, ordered_json(meta));
    }

    BaselineConfig config_;
    Rng rng_{0};
    int step_ = 0;
    std::vector<Row> history_;
    std::vector<DiversityPoint> diversity_;
};

template <typename Model>
void run_training(Model& model, const std::vector<RasterImage>& corpus, const TrainOptions& opts) {
    check_corpus(corpus);
    if (opts.steps < 0) fail(ErrorKind::InvalidArgument, "steps must be >= 0");
    const int per_epoch = epoch_length(corpus.size(), model.config().batch_size);
    for (int i = 0; i < opts.steps; ++i) {
        try {
            model.train_step(corpus);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::NonFiniteLoss && !opts.checkpoint_dir.empty()) model.save(opts.checkpoint_dir);
            throw;
        }
        if (model.step() % per_epoch == 0 || i + 1 == opts.steps) model.record_diversity(model.step() / per_epoch);
        if (opts.on_step) opts.on_step(i + 1, opts.steps);
    }
    if (!opts.checkpoint_dir.empty()) model.save(opts.checkpoint_dir);
}

// ---------------------------------------------------------------------------
// DCGAN

struct DcganRow {
    int step = 0;
    double d_loss = 0, g_loss = 0;
    friend bool operator==(const DcganRow&, const DcganRow&) = default;
    json to_json() const { return json::array({step, d_loss, g_loss}); }
    static DcganRow from_json(const json& j) { return {j.at(0).get<int>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
};

template <typename T>
class Dcgan : public BaselineModel<T, DcganRow> {
    using Base = BaselineModel<T, DcganRow>;

public:
    explicit Dcgan(BaselineConfig config)
        : Base(std::move(config)),
          init_rng_(derive_seed(this->config_.seed, 20)),
          generator_(this->config_, derive_seed(this->config_.seed, 21)),
          disc_(this->config_, init_rng_),
          head_(disc_params_, "head", disc_.features(), 1, init_rng_),
          opt_g_(generator_.parameters().trainable(), adam()),
          opt_d_(disc_trainable(), adam()) {
        this->rng_ = Rng(derive_seed(this->config_.seed, 22));
        eval_latents_ = latent_batch<T>(this->config_.diversity_samples, this->config_.latent.dimension, init_rng_);
    }

    Dcgan(const Dcgan&) = delete;
    Dcgan(Dcgan&&) = default;

    ConvDecoder<T>& generator() { return generator_; }
    const ConvDecoder<T>& generator() const { return generator_; }

    Var<T> discriminate(const Var<T>& x, bool training) const { return head_(disc_(x, training)); }

    DcganRow train_step(const std::vector<RasterImage>& corpus) {
        check_corpus(corpus);
        const auto& c = this->config_;
        auto& rng = this->rng_;
        const auto real = Var<T>::constant(image_batch<T>(corpus, c.batch_size, c.image_size, rng));
        const auto z = Var<T>::constant(latent_batch<T>(c.batch_size, c.latent.dimension, rng));

        opt_d_.zero_grad();
        const auto fake = generator_(z, true);
        const auto d_loss = nn::add(nn::bce_with_logits(discriminate(real, true), T{1}),
                                    nn::bce_with_logits(discriminate(nn::detach(fake), true), T{0}));
        if (!std::isfinite(static_cast<double>(d_loss.item())))
            fail(ErrorKind::NonFiniteLoss, "non-finite discriminator loss at step " + std::to_string(this->step_));
        nn::backward(d_loss);
        opt_d_.step();

        opt_g_.zero_grad();
        const auto g_loss = nn::bce_with_logits(discriminate(fake, true), T{1});
        if (!std::isfinite(static_cast<double>(g_loss.item())))
            fail(ErrorKind::NonFiniteLoss, "non-finite generator loss at step " + std::to_string(this->step_));
        nn::backward(g_loss);
        opt_g_.step();

        const DcganRow row{this->step_, static_cast<double>(d_loss.item()), static_cast<double>(g_loss.item())};
        this->history_.push_back(row);
        ++this->step_;
        return row;
    }

    /// n images from N(0, I) latents drawn with `seed`; batch norm in inference mode.
    std::vector<RasterImage> sample(int n, std::uint64_t seed) const {
        if (n < 1) fail(ErrorKind::InvalidArgument, "n must be positive");
        Rng rng(seed);
        return decode(latent_batch<T>(n, this->config_.latent.dimension, rng));
    }

    std::vector<RasterImage> decode(const Tensor<T>& z) const {
        nn::NoGradGuard guard;
        return to_images(generator_(Var<T>::constant(z), false).value());
    }

    void record_diversity(int epoch) {
        this->diversity_.push_back(
            {this->step_, epoch, diversity_score(decode(eval_latents_), this->config_.collapse_threshold)});
    }

    void save(const fs::path& dir) const {
        fs::create_directories(dir);
        nn::save_tensors(dir / "generator.bin", generator_.parameters().snapshot());
        auto d = disc_.parameters().snapshot();
        for (auto& [k, v] : disc_params_.snapshot()) d.emplace(k, v);
        nn::save_tensors(dir / "discriminator.bin", d);
        std::map<std::string, Tensor<T>> opt;
        opt_g_.save_state(opt, "g.");
        opt_d_.save_state(opt, "d.");
        opt.emplace("eval_latents", eval_latents_);
        nn::save_tensors(dir / "optimizer.bin", opt);
        this->write_common(dir, "dcgan");
    }

    static Dcgan load(const fs::path& dir) {
        const json meta = checkpoint::read_meta(dir);
        try {
            checkpoint::expect_kind(meta, {"dcgan"});
            Dcgan m(BaselineConfig::from_json(meta.at("config")));
            m.generator_.parameters().restore(nn::load_tensors<T>(dir / "generator.bin"));
            const auto d = nn::load_tensors<T>(dir / "discriminator.bin");
            m.disc_.parameters().restore(d);
            m.disc_params_.restore(d);
            const auto opt = nn::load_tensors<T>(dir / "optimizer.bin");
            m.opt_g_.load_state(opt, "g.");
            m.opt_d_.load_state(opt, "d.");
            m.eval_latents_ = opt.at("eval_latents");
            m.restore_common(meta);
            return m;
        } catch (const json::exception& e) {
            fail(ErrorKind::ModelLoadError, dir.string() + ": " + e.what());
        } catch (const std::out_of_range& e) {
            fail(ErrorKind::ModelLoadError, dir.string() + ": missing tensor");
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ModelLoadError) throw;
            fail(ErrorKind::ModelLoadError, dir.string() + ": " + e.what());
        }
    }

private:
    nn::AdamConfig adam() const { return {.learning_rate = this->config_.learning_rate, .beta1 = this->config_.beta1}; }
    std::vector<Var<T>> disc_trainable() const {
        auto v = disc_.parameters().trainable();
        for (auto& p : disc_params_.trainable()) v.push_back(p);
        return v;
    }

    Rng init_rng_;
    ConvDecoder<T> generator_;
    ConvEncoder<T> disc_;
    nn::ParameterSet<T> disc_params_;
    nn::Linear<T> head_;
    nn::Adam<T> opt_g_, opt_d_;
    Tensor<T> eval_latents_;
};

// ---------------------------------------------------------------------------
// VAE

struct VaeRow {
    int step = 0;
    double reconstruction = 0, kl = 0;
    friend bool operator==(const VaeRow&, const VaeRow&) = default;
    json to_json() const { return json::array({step, reconstruction, kl}); }
    static VaeRow from_json(const json& j) { return {j.at(0).get<int>(), j.at(1).get<double>(), j.at(2).get<double>()}; }
};

template <typename T>
struct VaeTerms {
    Var<T> reconstruction;  // per-image summed squared error, batch mean
    Var<T> kl;              // closed-form KL(q || N(0, I)), batch mean
    Var<T> total;
    Var<T> mu, logvar, output;
};

template <typename T>
class Vae : public BaselineModel<T, VaeRow> {
    using Base = BaselineModel<T, VaeRow>;

public:
    explicit Vae(BaselineConfig config)
        : Base(std::move(config)),
          init_rng_(derive_seed(this->config_.seed, 30)),
          encoder_(this->config_, init_rng_),
          mu_(head_params_, "mu", encoder_.features(), this->config_.latent.dimension, init_rng_),
          logvar_(head_params_, "logvar", encoder_.features(), this->config_.latent.dimension, init_rng_, 1e-3),
          decoder_(this->config_, derive_seed(this->config_.seed, 31)),
          opt_(all_trainable(), {.learning_rate = this->config_.learning_rate, .beta1 = this->config_.beta1}) {
        this->rng_ = Rng(derive_seed(this->config_.seed, 32));
        eval_latents_ = latent_batch<T>(this->config_.diversity_samples, this->config_.latent.dimension, init_rng_);
    }

    Vae(const Vae&) = delete;
    Vae(Vae&&) = default;

    const ConvDecoder<T>& decoder() const { return decoder_; }

    /// Encoder heads (mu, log variance) for an image batch.
    std::pair<Var<T>, Var<T>> encode(const Var<T>& x, bool training) const {
        const auto h = encoder_(x, training);
        return {mu_(h), logvar_(h)};
    }

    /// ELBO terms with z = mu + exp(logvar / 2) * eps.
    VaeTerms<T> terms(const Var<T>& x, const Tensor<T>& eps, bool training) const {
        VaeTerms<T> t;
        std::tie(t.mu, t.logvar) = encode(x, training);
        const auto z = nn::add(t.mu, nn::mul(nn::exp(nn::scale(t.logvar, T(0.5))), Var<T>::constant(eps)));
        t.output = decoder_(z, training);
        const T per_image = static_cast<T>(x.size() / static_cast<std::size_t>(x.dim(0)));
        t.reconstruction = nn::scale(nn::mse(t.output, x), per_image);
        t.kl = nn::kl_standard_normal(t.mu, t.logvar);
        t.total = nn::add(t.reconstruction, t.kl);
        return t;
    }

    VaeRow train_step(const std::vector<RasterImage>& corpus) {
        check_corpus(corpus);
        const auto& c = this->config_;
        auto& rng = this->rng_;
        const auto x = Var<T>::constant(image_batch<T>(corpus, c.batch_size, c.image_size, rng));
        const auto eps = latent_batch<T>(c.batch_size, c.latent.dimension, rng);
        opt_.zero_grad();
        const auto t = terms(x, eps, true);
        const VaeRow row{this->step_, static_cast<double>(t.reconstruction.item()), static_cast<double>(t.kl.item())};
        if (!std::isfinite(row.reconstruction) || !std::isfinite(row.kl))
            fail(ErrorKind::NonFiniteLoss, "non-finite ELBO at step " + std::to_string(this->step_));
        nn::backward(t.total);
        opt_.step();
        this->history_.push_back(row);
        ++this->step_;
        return row;
    }

    std::vector<RasterImage> sample(int n, std::uint64_t seed) const {
        if (n < 1) fail(ErrorKind::InvalidArgument, "n must be positive");
        Rng rng(seed);
        return decode(latent_batch<T>(n, this->config_.latent.dimension, rng));
    }

    std::vector<RasterImage> decode(const Tensor<T>& z) const {
        nn::NoGradGuard guard;
        return to_images(decoder_(Var<T>::constant(z), false).value());
    }

    void record_diversity(int epoch) {
        this->diversity_.push_back(
            {this->step_, epoch, diversity_score(decode(eval_latents_), this->config_.collapse_threshold)});
    }

    void save(const fs::path& dir) const {
        fs::create_directories(dir);
        auto enc = encoder_.parameters().snapshot();
        for (auto& [k, v] : head_params_.snapshot()) enc.emplace(k, v);
        nn::save_tensors(dir / "encoder.bin", enc);
        nn::save_tensors(dir / "decoder.bin", decoder_.parameters().snapshot());
        std::map<std::string, Tensor<T>> opt;
        opt_.save_state(opt, "vae.");
        opt.emplace("eval_latents", eval_latents_);
        nn::save_tensors(dir / "optimizer.bin", opt);
        this->write_common(dir, "vae");
    }

    static Vae load(const fs::path& dir) {
        const json meta = checkpoint::read_meta(dir);
        try {
            checkpoint::expect_kind(meta, {"vae"});
            Vae m(BaselineConfig::from_json(meta.at("config")));
            const auto enc = nn::load_tensors<T>(dir / "encoder.bin");
            m.encoder_.parameters().restore(enc);
            m.head_params_.restore(enc);
            m.decoder_.parameters().restore(nn::load_tensors<T>(dir / "decoder.bin"));
            const auto opt = nn::load_tensors<T>(dir / "optimizer.bin");
            m.opt_.load_state(opt, "vae.");
            m.eval_latents_ = opt.at("eval_latents");
            m.restore_common(meta);
            return m;
        } catch (const json::exception& e) {
            fail(ErrorKind::ModelLoadError, dir.string() + ": " + e.what());
        } catch (const std::out_of_range&) {
            fail(ErrorKind::ModelLoadError, dir.string() + ": missing tensor");
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ModelLoadError) throw;
            fail(ErrorKind::ModelLoadError, dir.string() + ": " + e.what());
        }
    }

private:
    std::vector<Var<T>> all_trainable() const {
        auto v = encoder_.parameters().trainable();
        for (auto& p : head_params_.trainable()) v.push_back(p);
        for (auto& p : decoder_.parameters().trainable()) v.push_back(p);
        return v;
    }

    Rng init_rng_;
    ConvEncoder<T> encoder_;
    nn::ParameterSet<T> head_params_;
    nn::Linear<T> mu_, logvar_;
    ConvDecoder<T> decoder_;
    nn::Adam<T> opt_;
    Tensor<T> eval_latents_;
};

template <typename T>
void train_dcgan(Dcgan<T>& model, const std::vector<RasterImage>& corpus, const TrainOptions& opts) {
    run_training(model, corpus, opts);
}

template <typename T>
void train_vae(Vae<T>& model, const std::vector<RasterImage>& corpus, const TrainOptions& opts) {
    run_training(model, corpus, opts);
}

}  // namespace loomgen::baselines
