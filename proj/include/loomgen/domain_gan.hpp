#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "loomgen/checkpoint.hpp"
#include "loomgen/dataset.hpp"
#include "loomgen/error.hpp"
#include "loomgen/image.hpp"
#include "loomgen/masking.hpp"
#include "loomgen/nn/layers.hpp"
#include "loomgen/style.hpp"

namespace loomgen::gan {

namespace fs = std::filesystem;
using nn::Tensor;
using nn::Var;

enum class GanKind { CycleGan, DiscoGan };
enum class AdversarialKind { LeastSquares, CrossEntropy };
enum class Direction { AtoB, BtoA };

inline std::string to_string(GanKind k) { return k == GanKind::CycleGan ? "cyclegan" : "discogan"; }
inline std::string to_string(AdversarialKind k) {
    return k == AdversarialKind::LeastSquares ? "least-squares" : "cross-entropy";
}
inline std::string to_string(Direction d) { return d == Direction::AtoB ? "a2b" : "b2a"; }

inline GanKind parse_gan_kind(std::string_view s) {
    if (s == "cyclegan") return GanKind::CycleGan;
    if (s == "discogan") return GanKind::DiscoGan;
    fail(ErrorKind::InvalidEnum, "unknown GAN kind '" + std::string(s) + "'");
}
inline AdversarialKind parse_adversarial_kind(std::string_view s) {
    if (s == "least-squares") return AdversarialKind::LeastSquares;
    if (s == "cross-entropy") return AdversarialKind::CrossEntropy;
    fail(ErrorKind::InvalidEnum, "unknown adversarial kind '" + std::string(s) + "'");
}
inline Direction parse_direction(std::string_view s) {
    if (s == "a2b") return Direction::AtoB;
    if (s == "b2a") return Direction::BtoA;
    fail(ErrorKind::InvalidEnum, "unknown direction '" + std::string(s) + "'");
}

/// Reserved experiment names.
inline constexpr const char* kCoco2Handloom = "coco2handloom";
inline constexpr const char* kSaree2Handloom = "saree2handloom";
inline constexpr const char* kMask2Design = "mask2design";

struct LossWeights {
    double lambda_cyc = 10.0;
    double lambda_recon = 1.0;
    AdversarialKind adversarial_kind = AdversarialKind::LeastSquares;

    void validate() const {
        if (!(lambda_cyc >= 0) || !(lambda_recon >= 0)) fail(ErrorKind::InvalidArgument, "loss weights must be >= 0");
    }
    json to_json() const {
        return {{"lambda_cyc", lambda_cyc},
                {"lambda_recon", lambda_recon},
                {"adversarial_kind", to_string(adversarial_kind)}};
    }
    static LossWeights from_json(const json& j) {
        LossWeights w;
        w.lambda_cyc = j.value("lambda_cyc", w.lambda_cyc);
        w.lambda_recon = j.value("lambda_recon", w.lambda_recon);
        w.adversarial_kind = parse_adversarial_kind(j.value("adversarial_kind", to_string(w.adversarial_kind)));
        return w;
    }
};

/// Least-squares for CycleGAN, cross-entropy for DiscoGAN.
inline LossWeights default_weights(GanKind kind) {
    LossWeights w;
    w.adversarial_kind = kind == GanKind::CycleGan ? AdversarialKind::LeastSquares : AdversarialKind::CrossEntropy;
    return w;
}

/// Network shapes for the generator pair and the two patch discriminators.
struct GanPairSpec {
    int image_size = 64;
    style::TransformNetConfig generator{16, 3, 7};
    int disc_channels = 16;
    /// Generators output gate * x + (1 - gate) * net(x). 1 is an exact
    /// identity; values near 1 give a near-identity initialization.
    double skip_gate = 0.0;

    void validate() const {
        if (image_size < 8 || image_size % 4 != 0)
            fail(ErrorKind::InvalidArgument, "image_size must be a multiple of 4 and at least 8");
        if (disc_channels < 1) fail(ErrorKind::InvalidArgument, "disc_channels must be positive");
        if (!(skip_gate >= 0 && skip_gate <= 1)) fail(ErrorKind::InvalidArgument, "skip_gate must lie in [0, 1]");
    }
    json to_json() const {
        return {{"image_size", image_size},
                {"generator", generator.to_json()},
                {"disc_channels", disc_channels},
                {"skip_gate", skip_gate}};
    }
    static GanPairSpec from_json(const json& j) {
        GanPairSpec s;
        s.image_size = j.value("image_size", s.image_size);
        if (j.contains("generator")) s.generator = style::TransformNetConfig::from_json(j.at("generator"));
        s.disc_channels = j.value("disc_channels", s.disc_channels);
        s.skip_gate = j.value("skip_gate", s.skip_gate);
        return s;
    }
};

struct GanConfig {
    GanKind kind = GanKind::CycleGan;
    GanPairSpec spec;
    LossWeights weights = default_weights(GanKind::CycleGan);
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    int batch_size = 1;
    int pool_size = 50;  // 0 disables the history buffer
    std::uint64_t seed = 0;

    static GanConfig defaults(GanKind kind) {
        GanConfig c;
        c.kind = kind;
        c.weights = default_weights(kind);
        return c;
    }
    void validate() const {
        spec.validate();
        weights.validate();
        if (!(learning_rate > 0)) fail(ErrorKind::InvalidArgument, "learning rate must be positive");
        if (batch_size < 1) fail(ErrorKind::InvalidArgument, "batch_size must be positive");
        if (pool_size < 0) fail(ErrorKind::InvalidArgument, "pool_size must be >= 0");
    }
    json to_json() const {
        return {{"kind", to_string(kind)},        {"spec", spec.to_json()}, {"weights", weights.to_json()},
                {"learning_rate", learning_rate}, {"beta1", beta1},         {"batch_size", batch_size},
                {"pool_size", pool_size},         {"seed", seed}};
    }
    static GanConfig from_json(const json& j) {
        GanConfig c = defaults(parse_gan_kind(j.value("kind", "cyclegan")));
        if (j.contains("spec")) c.spec = GanPairSpec::from_json(j.at("spec"));
        if (j.contains("weights")) c.weights = LossWeights::from_json(j.at("weights"));
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.beta1 = j.value("beta1", c.beta1);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.pool_size = j.value("pool_size", c.pool_size);
        c.seed = j.value("seed", c.seed);
        return c;
    }
};

struct Experiment {
    std::string name;
    std::string domain_a;
    std::string domain_b;
};

// ---------------------------------------------------------------------------
// Networks

template <typename T>
class Generator {
public:
    Generator(const GanPairSpec& spec, std::uint64_t seed) : net_(spec.generator, seed), gate_(spec.skip_gate) {}

    Var<T> operator()(const Var<T>& x) const {
        if (gate_ == 0) return net_(x);
        return nn::add(nn::scale(x, static_cast<T>(gate_)), nn::scale(net_(x), static_cast<T>(1 - gate_)));
    }

    nn::ParameterSet<T>& parameters() { return net_.parameters(); }
    const nn::ParameterSet<T>& parameters() const { return net_.parameters(); }

private:
    style::TransformNet<T> net_;
    double gate_;
};

/// Patch discriminator: two stride-2 4x4 convs, two 3x3 convs, one logit
/// per spatial cell (H/4 x W/4).
template <typename T>
class Discriminator {
public:
    Discriminator(int channels, std::uint64_t seed) {
        Rng rng(seed);
        const int d = channels;
        using nn::PadMode;
        c1_ = {ps_, "c1", 3, d, 4, 2, 1, PadMode::Zero, rng};
        c2_ = {ps_, "c2", d, 2 * d, 4, 2, 1, PadMode::Zero, rng};
        n2_ = {ps_, "n2", 2 * d};
        c3_ = {ps_, "c3", 2 * d, 4 * d, 3, 1, 1, PadMode::Zero, rng};
        n3_ = {ps_, "n3", 4 * d};
        c4_ = {ps_, "c4", 4 * d, 1, 3, 1, 1, PadMode::Zero, rng};
    }

    Var<T> operator()(const Var<T>& x) const {
        using nn::leaky_relu;
        Var<T> h = leaky_relu(c1_(x));
        h = leaky_relu(n2_(c2_(h)));
        h = leaky_relu(n3_(c3_(h)));
        return c4_(h);
    }

    nn::ParameterSet<T>& parameters() { return ps_; }
    const nn::ParameterSet<T>& parameters() const { return ps_; }

private:
    nn::ParameterSet<T> ps_;
    nn::Conv2d<T> c1_, c2_, c3_, c4_;
    nn::InstanceNorm<T> n2_, n3_;
};

/// History buffer of generated images shown to the discriminators.
template <typename T>
class ImagePool {
public:
    explicit ImagePool(int capacity = 50) : capacity_(capacity) {}

    /// Per image: while filling, store and return it; afterwards, with
    /// probability 1/2 swap it with a random stored image.
    Tensor<T> query(const Tensor<T>& batch, Rng& rng) {
        if (capacity_ == 0) return batch;
        const int n = batch.dim(0);
        const std::size_t per = batch.size() / static_cast<std::size_t>(n);
        Tensor<T> out = batch;
        for (int i = 0; i < n; ++i) {
            Tensor<T> img({1, batch.dim(1), batch.dim(2), batch.dim(3)});
            std::copy_n(batch.data() + i * per, per, img.data());
            if (static_cast<int>(images_.size()) < capacity_) {
                images_.push_back(std::move(img));
            } else if (rng.uniform() < 0.5) {
                const auto j = rng.below(images_.size());
                std::copy_n(images_[j].data(), per, out.data() + i * per);
                images_[j] = std::move(img);
            }
        }
        return out;
    }

    std::size_t size() const { return images_.size(); }

    void save(std::map<std::string, Tensor<T>>& out, const std::string& prefix) const {
        for (std::size_t i = 0; i < images_.size(); ++i) out.emplace(prefix + std::to_string(i), images_[i]);
    }
    void load(const std::map<std::string, Tensor<T>>& in, const std::string& prefix) {
        images_.clear();
        for (std::size_t i = 0;; ++i) {
            auto it = in.find(prefix + std::to_string(i));
            if (it == in.end()) break;
            images_.push_back(it->second);
        }
    }

private:
    int capacity_;
    std::vector<Tensor<T>> images_;
};

// ---------------------------------------------------------------------------
// Losses

struct GanLossRow {
    int step = 0;
    double adv_ab = 0, adv_ba = 0, cyc_a = 0, cyc_b = 0, recon_a = 0, recon_b = 0;
    friend bool operator==(const GanLossRow&, const GanLossRow&) = default;

    bool finite() const {
        for (double v : {adv_ab, adv_ba, cyc_a, cyc_b, recon_a, recon_b})
            if (!std::isfinite(v)) return false;
        return true;
    }
    json to_json() const { return json::array({step, adv_ab, adv_ba, cyc_a, cyc_b, recon_a, recon_b}); }
    static GanLossRow from_json(const json& j) {
        return {j.at(0).get<int>(),    j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>(),
                j.at(4).get<double>(), j.at(5).get<double>(), j.at(6).get<double>()};
    }
};

template <typename T>
struct GanLosses {
    Var<T> adv_ab, adv_ba;    // generator adversarial terms (G_ab vs D_b, G_ba vs D_a)
    Var<T> cyc_a, cyc_b;      // mean |G_ba(G_ab(a)) - a|, mean |G_ab(G_ba(b)) - b|
    Var<T> recon_a, recon_b;  // mean squared round-trip error
    Var<T> generator_total;
    Var<T> disc_a, disc_b;  // discriminator objectives on the current (detached) fakes
    Var<T> fake_a, fake_b;

    GanLossRow row(int step) const {
        const auto v = [](const Var<T>& x) { return x.valid() ? static_cast<double>(x.item()) : 0.0; };
        return {step, v(adv_ab), v(adv_ba), v(cyc_a), v(cyc_b), v(recon_a), v(recon_b)};
    }
};

template <typename T>
Var<T> adversarial_term(const Var<T>& logits, bool target_real, AdversarialKind kind) {
    const T target = target_real ? T{1} : T{0};
    return kind == AdversarialKind::LeastSquares ? nn::mse_to(logits, target) : nn::bce_with_logits(logits, target);
}

template <typename T>
Var<T> discriminator_objective(const Discriminator<T>& d, const Var<T>& real, const Var<T>& fake,
                               AdversarialKind kind) {
    return nn::scale(nn::add(adversarial_term(d(real), true, kind), adversarial_term(d(fake), false, kind)), T(0.5));
}

// ---------------------------------------------------------------------------
// Model + trainer state

template <typename T>
class GanModel {
public:
    explicit GanModel(GanConfig config)
        : config_((config.validate(), std::move(config))),
          g_ab_(config_.spec, derive_seed(config_.seed, 10)),
          g_ba_(config_.spec, derive_seed(config_.seed, 11)),
          d_a_(config_.spec.disc_channels, derive_seed(config_.seed, 12)),
          d_b_(config_.spec.disc_channels, derive_seed(config_.seed, 13)),
          opt_g_(concat(g_ab_.parameters(), g_ba_.parameters()), adam_config()),
          opt_d_(concat(d_a_.parameters(), d_b_.parameters()), adam_config()),
          pool_a_(config_.pool_size),
          pool_b_(config_.pool_size),
          rng_(derive_seed(config_.seed, 14)) {}

    GanModel(const GanModel&) = delete;
    GanModel& operator=(const GanModel&) = delete;
    GanModel(GanModel&&) = default;

    const GanConfig& config() const { return config_; }
    int step() const { return step_; }
    const std::vector<GanLossRow>& history() const { return history_; }
    Experiment& experiment() { return experiment_; }
    const Experiment& experiment() const { return experiment_; }

    const Generator<T>& g_ab() const { return g_ab_; }
    const Generator<T>& g_ba() const { return g_ba_; }
    const Discriminator<T>& d_a() const { return d_a_; }
    const Discriminator<T>& d_b() const { return d_b_; }
    Generator<T>& g_ab() { return g_ab_; }
    Generator<T>& g_ba() { return g_ba_; }
    Discriminator<T>& d_a() { return d_a_; }
    Discriminator<T>& d_b() { return d_b_; }
    const Generator<T>& generator(Direction d) const { return d == Direction::AtoB ? g_ab_ : g_ba_; }

    /// Full loss breakdown for one pair of batches (N x 3 x H x W).
    GanLosses<T> losses(const Var<T>& a, const Var<T>& b, const LossWeights& w) const {
        if (a.shape() != b.shape()) fail(ErrorKind::DimensionMismatch, "domain batches differ in shape");
        w.validate();
        GanLosses<T> L;
        L.fake_b = g_ab_(a);
        L.fake_a = g_ba_(b);
        L.adv_ab = adversarial_term(d_b_(L.fake_b), true, w.adversarial_kind);
        L.adv_ba = adversarial_term(d_a_(L.fake_a), true, w.adversarial_kind);
        const auto back_a = g_ba_(L.fake_b);
        const auto back_b = g_ab_(L.fake_a);
        Var<T> total = nn::add(L.adv_ab, L.adv_ba);
        if (config_.kind == GanKind::CycleGan) {
            L.cyc_a = nn::l1(back_a, a);
            L.cyc_b = nn::l1(back_b, b);
            total = nn::add(total, nn::scale(nn::add(L.cyc_a, L.cyc_b), static_cast<T>(w.lambda_cyc)));
        } else {
            L.recon_a = nn::mse(back_a, a);
            L.recon_b = nn::mse(back_b, b);
            total = nn::add(total, nn::scale(nn::add(L.recon_a, L.recon_b), static_cast<T>(w.lambda_recon)));
        }
        L.generator_total = total;
        L.disc_a = discriminator_objective(d_a_, a, nn::detach(L.fake_a), w.adversarial_kind);
        L.disc_b = discriminator_objective(d_b_, b, nn::detach(L.fake_b), w.adversarial_kind);
        return L;
    }

    Tensor<T> sample_batch(const std::vector<RasterImage>& domain) {
        std::vector<RasterImage> batch;
        for (int i = 0; i < config_.batch_size; ++i)
            batch.push_back(random_square_crop(domain[rng_.below(domain.size())], config_.spec.image_size, rng_));
        return nn::to_tensor<T>(batch);
    }

    /// One generator update followed by one discriminator update. Nothing is
    /// modified when a loss is non-finite.
    GanLossRow train_step(const std::vector<RasterImage>& domain_a, const std::vector<RasterImage>& domain_b) {
        if (domain_a.empty() || domain_b.empty()) fail(ErrorKind::EmptyDomain, "a training domain is empty");
        Rng rng_before = rng_;
        const auto a = Var<T>::constant(sample_batch(domain_a));
        const auto b = Var<T>::constant(sample_batch(domain_b));
        const auto L = losses(a, b, config_.weights);
        const GanLossRow row = L.row(step_);
        if (!row.finite()) {
            rng_ = rng_before;
            fail(ErrorKind::NonFiniteLoss, "non-finite generator loss at step " + std::to_string(step_));
        }
        auto pool_a = pool_a_, pool_b = pool_b_;
        const auto pa = Var<T>::constant(pool_a.query(L.fake_a.value(), rng_));
        const auto pb = Var<T>::constant(pool_b.query(L.fake_b.value(), rng_));
        const auto kind = config_.weights.adversarial_kind;
        const auto d_total = nn::add(discriminator_objective(d_a_, a, pa, kind), discriminator_objective(d_b_, b, pb, kind));
        if (!std::isfinite(static_cast<double>(d_total.item()))) {
            rng_ = rng_before;
            fail(ErrorKind::NonFiniteLoss, "non-finite discriminator loss at step " + std::to_string(step_));
        }
        opt_g_.zero_grad();
        opt_d_.zero_grad();
        nn::backward(L.generator_total);
        opt_g_.step();
        opt_d_.zero_grad();
        nn::backward(d_total);
        opt_d_.step();
        pool_a_ = std::move(pool_a);
        pool_b_ = std::move(pool_b);
        history_.push_back(row);
        ++step_;
        return row;
    }

    void save(const fs::path& dir) const {
        fs::create_directories(dir);
        nn::save_tensors(dir / "g_ab.bin", g_ab_.parameters().snapshot());
        nn::save_tensors(dir / "g_ba.bin", g_ba_.parameters().snapshot());
        nn::save_tensors(dir / "d_a.bin", d_a_.parameters().snapshot());
        nn::save_tensors(dir / "d_b.bin", d_b_.parameters().snapshot());
        std::map<std::string, Tensor<T>> opt, pool;
        opt_g_.save_state(opt, "g.");
        opt_d_.save_state(opt, "d.");
        pool_a_.save(pool, "a.");
        pool_b_.save(pool, "b.");
        nn::save_tensors(dir / "optimizer.bin", opt);
        nn::save_tensors(dir / "pool.bin", pool);
        json rows = json::array();
        for (const auto& r : history_) rows.push_back(r.to_json());
        json cfg = config_.to_json();
        cfg["dtype"] = checkpoint::dtype_name<T>();
        checkpoint::write_meta(dir, ordered_json{{"kind", to_string(config_.kind)},
                                                 {"version", 1},
                                                 {"image_size", config_.spec.image_size},
                                                 {"experiment",
                                                  {{"name", experiment_.name},
                                                   {"domain_a", experiment_.domain_a},
                                                   {"domain_b", experiment_.domain_b}}},
                                                 {"config", cfg},
                                                 {"loss_history", rows},
                                                 {"step", step_},
                                                 {"rng_state", rng_.state()},
                                                 {"created_at", utc_timestamp()}});
    }

    static GanModel load(const fs::path& dir) {
        const json meta = checkpoint::read_meta(dir);
        try {
            checkpoint::expect_kind(meta, {"cyclegan", "discogan"});
            const json& cfg = meta.at("config");
            if (cfg.value("dtype", "") != checkpoint::dtype_name<T>())
                fail(ErrorKind::ModelLoadError, "checkpoint precision does not match");
            GanModel m(GanConfig::from_json(cfg));
            m.g_ab_.parameters().restore(nn::load_tensors<T>(dir / "g_ab.bin"));
            m.g_ba_.parameters().restore(nn::load_tensors<T>(dir / "g_ba.bin"));
            m.d_a_.parameters().restore(nn::load_tensors<T>(dir / "d_a.bin"));
            m.d_b_.parameters().restore(nn::load_tensors<T>(dir / "d_b.bin"));
            const auto opt = nn::load_tensors<T>(dir / "optimizer.bin");
            m.opt_g_.load_state(opt, "g.");
            m.opt_d_.load_state(opt, "d.");
            const auto pool = nn::load_tensors<T>(dir / "pool.bin");
            m.pool_a_.load(pool, "a.");
            m.pool_b_.load(pool, "b.");
            for (const auto& r : meta.at("loss_history")) m.history_.push_back(GanLossRow::from_json(r));
            m.step_ = meta.at("step").get<int>();
            m.rng_.restore(meta.at("rng_state").get<std::string>());
            const json& e = meta.at("experiment");
            m.experiment_ = {e.value("name", ""), e.value("domain_a", ""), e.value("domain_b", "")};
            return m;
        } catch (const json::exception& e) {
            fail(ErrorKind::ModelLoadError, dir.string() + ": " + e.what());
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ModelLoadError) throw;
            fail(ErrorKind::ModelLoadError, dir.string() + ": " + e.what());
        }
    }

private:
    nn::AdamConfig adam_config() const {
        return {.learning_rate = config_.learning_rate, .beta1 = config_.beta1};
    }
    static std::vector<Var<T>> concat(const nn::ParameterSet<T>& x, const nn::ParameterSet<T>& y) {
        auto out = x.trainable();
        for (auto& v : y.trainable()) out.push_back(v);
        return out;
    }

    GanConfig config_;
    Generator<T> g_ab_, g_ba_;
    Discriminator<T> d_a_, d_b_;
    nn::Adam<T> opt_g_, opt_d_;
    ImagePool<T> pool_a_, pool_b_;
    Rng rng_;
    int step_ = 0;
    std::vector<GanLossRow> history_;
    Experiment experiment_;
};

/// Generator-side and discriminator-side losses with CycleGAN's L1 cycle term.
template <typename T>
GanLosses<T> cyclegan_losses(const GanModel<T>& model, const Var<T>& a, const Var<T>& b, const LossWeights& w) {
    if (model.config().kind != GanKind::CycleGan) fail(ErrorKind::InvalidArgument, "model is not a CycleGAN");
    return model.losses(a, b, w);
}

/// Generator-side and discriminator-side losses with DiscoGAN's squared
/// reconstruction term.
template <typename T>
GanLosses<T> discogan_losses(const GanModel<T>& model, const Var<T>& a, const Var<T>& b, const LossWeights& w) {
    if (model.config().kind != GanKind::DiscoGan) fail(ErrorKind::InvalidArgument, "model is not a DiscoGAN");
    return model.losses(a, b, w);
}

// ---------------------------------------------------------------------------
// Training and inference

struct TrainOptions {
    int steps = 200;
    fs::path checkpoint_dir;  // empty: keep in memory only
    std::function<void(int step, int total)> on_step;
};

/// Runs `opts.steps` updates and writes the checkpoint. On a non-finite
/// loss the last good state is checkpointed before the error propagates.
template <typename T>
void train(GanModel<T>& model, const std::vector<RasterImage>& domain_a, const std::vector<RasterImage>& domain_b,
           const TrainOptions& opts) {
    if (domain_a.empty()) fail(ErrorKind::EmptyDomain, "domain A has no images");
    if (domain_b.empty()) fail(ErrorKind::EmptyDomain, "domain B has no images");
    if (opts.steps < 0) fail(ErrorKind::InvalidArgument, "steps must be >= 0");
    for (int i = 0; i < opts.steps; ++i) {
        try {
            model.train_step(domain_a, domain_b);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::NonFiniteLoss && !opts.checkpoint_dir.empty()) model.save(opts.checkpoint_dir);
            throw;
        }
        if (opts.on_step) opts.on_step(i + 1, opts.steps);
    }
    if (!opts.checkpoint_dir.empty()) model.save(opts.checkpoint_dir);
}

/// Otsu masks of design patches, as 3-channel {0, 1} rasters. Patches with
/// a single gray level are skipped.
inline std::vector<RasterImage> mask_domain(const std::vector<RasterImage>& patches) {
    std::vector<RasterImage> out;
    for (const auto& p : patches) {
        try {
            out.push_back(mask_to_raster(masking::otsu_mask(p).mask));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateHistogram) throw;
        }
    }
    return out;
}

/// Folder-level entry point. For mask2design, domain A is derived from
/// domain B by Otsu masking and `dir_a` is ignored.
inline GanModel<float> train_from_folders(const fs::path& dir_a, const fs::path& dir_b, const GanConfig& config,
                                          const Experiment& experiment, const TrainOptions& opts) {
    auto domain_b = dataset::load_corpus(dir_b);
    if (domain_b.empty()) fail(ErrorKind::EmptyDomain, "no images in " + dir_b.string());
    std::vector<RasterImage> domain_a =
        experiment.name == kMask2Design ? mask_domain(domain_b) : dataset::load_corpus(dir_a);
    if (domain_a.empty()) fail(ErrorKind::EmptyDomain, "no images in domain A");
    GanModel<float> model(config);
    model.experiment() = experiment;
    train(model, domain_a, domain_b, opts);
    return model;
}

/// Same H x W as the input, values in [0, 1].
template <typename T>
RasterImage translate(const RasterImage& image, Direction direction, const GanModel<T>& model) {
    return style::run_padded<T>(model.generator(direction), image, 4, 8);
}

template <typename T>
RasterImage mask_to_design(const BinaryMask& mask, const GanModel<T>& model) {
    if (!masking::is_binary(mask)) fail(ErrorKind::NonBinaryInput, "mask values must be 0 or 1");
    return translate(mask_to_raster(mask), Direction::AtoB, model);
}

}  // namespace loomgen::gan
