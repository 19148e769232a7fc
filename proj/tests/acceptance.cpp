// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// An optional argument restricts the run to criteria whose name contains it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <thread>

#include "loomgen/baselines.hpp"
#include "loomgen/dataset.hpp"
#include "loomgen/domain_gan.hpp"
#include "loomgen/dual_style.hpp"
#include "loomgen/masking.hpp"
#include "loomgen/style.hpp"
#include "loomgen/survey.hpp"
#include "loomgen/service.hpp"
#include "support/fixtures.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace loomgen;
namespace fs = std::filesystem;
namespace lt = loomgen::testing;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome otsu_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(8008);
    int checked = 0, mismatches = 0;
    while (checked < 1000) {
        GrayImage g(8, 8);
        for (auto& v : g.values()) v = static_cast<std::uint8_t>(rng.below(256));
        const auto h = masking::histogram(g);
        if (h.nonzero_bins() < 2) continue;
        mismatches += masking::otsu_threshold(h) != lt::intra_class_oracle(h);
        ++checked;
    }
    const double s = seconds_since(t0);
    return {mismatches == 0 && s < 5.0, fmt("%d images, %d mismatches, %.2fs (limit 5s)", checked, mismatches, s)};
}

Outcome gradient_checks() {
    const auto t0 = std::chrono::steady_clock::now();
    const style::FeatureExtractor<double> extractor;
    const auto batch = [](std::uint64_t seed) {
        Rng rng(seed);
        return nn::rand_uniform<double>({1, 3, 8, 8}, rng, 0.05, 0.95);
    };
    const auto targets = style::style_targets<double>(lt::noise_image(8, 8, 7), extractor);
    const double style_err = lt::gradient_relative_error(
        [&](const nn::Var<double>& x) { return style::style_loss(x, targets, extractor); }, batch(8));
    const auto ref = nn::Var<double>::constant(batch(9));
    const double content_err = lt::gradient_relative_error(
        [&](const nn::Var<double>& x) { return style::content_loss(x, ref, extractor); }, batch(10));
    const double s = seconds_since(t0);
    return {style_err < 1e-4 && content_err < 1e-4 && s < 30.0,
            fmt("style rel err %.2e, content rel err %.2e (limit 1e-4), %.2fs (limit 30s)", style_err, content_err, s)};
}

Outcome compositor_identity() {
    const auto model = [](const std::string& id, std::uint64_t seed) {
        style::StyleModel m;
        m.style_id = id;
        m.net = std::make_shared<style::TransformNet<float>>(style::TransformNetConfig{4, 1}, seed);
        return m;
    };
    const auto a = model("a", 1), b = model("b", 2);
    int failures = 0;
    for (int i = 0; i < 20; ++i) {
        const auto target = lt::design_patch(16 + 2 * i, i % 3, 100 + i);
        Rng rng(500 + i);
        BinaryMask mask(target.height(), target.width());
        for (auto& v : mask.values()) v = static_cast<std::uint8_t>(rng.below(2));
        const auto single = style::stylize(target, a);
        failures += !(dual_style::composite(target, a, a).output == single);
        failures += !(dual_style::composite(target, a, a, {mask}).output == single);
        failures += !(dual_style::composite(target, a, b).output ==
                      dual_style::composite(target, b, a, {.invert = true}).output);
        failures += !(dual_style::composite(target, a, b, {mask}).output ==
                      dual_style::composite(target, b, a, {masking::invert(mask)}).output);
    }
    return {failures == 0, fmt("20 targets x 4 identities, %d failures", failures)};
}

Outcome gan_loss_oracle() {
    double worst = 0;
    int identity_nonzero = 0;
    for (auto kind : {gan::GanKind::CycleGan, gan::GanKind::DiscoGan}) {
        for (std::uint64_t s = 1; s <= 3; ++s) {
            auto c = gan::GanConfig::defaults(kind);
            c.spec.image_size = 8;
            c.spec.generator = {2, 1, 3};
            c.spec.disc_channels = 2;
            c.seed = s;
            const gan::GanModel<double> m(c);
            Rng rng(40 + s);
            const auto a = nn::rand_uniform<double>({2, 3, 8, 8}, rng, 0.0, 1.0);
            const auto b = nn::rand_uniform<double>({2, 3, 8, 8}, rng, 0.0, 1.0);
            const auto va = nn::Var<double>::constant(a), vb = nn::Var<double>::constant(b);
            const auto L = kind == gan::GanKind::CycleGan ? gan::cyclegan_losses(m, va, vb, c.weights)
                                                          : gan::discogan_losses(m, va, vb, c.weights);
            const auto o = lt::oracle(m, a, b, c.weights);
            const auto v = [](const nn::Var<double>& x) { return x.valid() ? x.item() : 0.0; };
            for (auto [got, want] : {std::pair{v(L.adv_ab), o.adv_ab}, {v(L.adv_ba), o.adv_ba}, {v(L.cyc_a), o.cyc_a},
                                     {v(L.cyc_b), o.cyc_b}, {v(L.recon_a), o.recon_a}, {v(L.recon_b), o.recon_b},
                                     {v(L.generator_total), o.total}, {v(L.disc_a), o.disc_a},
                                     {v(L.disc_b), o.disc_b}})
                worst = std::max(worst, std::fabs(got - want));

            c.spec.skip_gate = 1.0;
            const gan::GanModel<double> id(c);
            const auto row = id.losses(va, vb, c.weights).row(0);
            for (double t : {row.cyc_a, row.cyc_b, row.recon_a, row.recon_b}) identity_nonzero += t != 0.0;
        }
    }
    return {worst <= 1e-6 && identity_nonzero == 0,
            fmt("max |loss - oracle| %.2e (limit 1e-6), identity round-trip nonzero terms %d", worst,
                identity_nonzero)};
}

Outcome training_style() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<RasterImage> corpus;
    for (int i = 0; i < 100; ++i) corpus.push_back(lt::design_patch(128, i % 3, 1000 + i, 0.05f));
    style::TransferConfig cfg;
    cfg.steps = 500;
    cfg.seed = 1;
    style::StyleTrainOptions opts;
    opts.image_size = 128;
    const auto m = style::train_style_model(corpus, lt::noise_image(128, 128, 5), cfg, opts);
    const auto& h = m.loss_history;
    const std::size_t k = h.size() / 10;
    double last = 0;
    for (std::size_t i = h.size() - k; i < h.size(); ++i) last += h[i].total;
    last /= k;
    const double drop = 1.0 - last / h.front().total;
    return {drop >= 0.30, fmt("init %.4g, mean of final 50 steps %.4g, drop %.1f%% (need >= 30%%), %.0fs",
                              h.front().total, last, 100 * drop, seconds_since(t0))};
}

Outcome training_cyclegan() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<RasterImage> A, B;
    for (int i = 0; i < 20; ++i) {
        A.push_back(lt::design_patch(64, 0, i));
        B.push_back(lt::design_patch(64, 1, 100 + i));
    }
    auto c = gan::GanConfig::defaults(gan::GanKind::CycleGan);
    c.seed = 1;
    gan::GanModel<float> m(c);
    gan::train(m, A, B, {.steps = 200});
    const auto& h = m.history();
    const std::size_t k = h.size() / 10;
    double first = 0, last = 0;
    for (std::size_t i = 0; i < k; ++i) {
        first += h[i].cyc_a + h[i].cyc_b;
        last += h[h.size() - 1 - i].cyc_a + h[h.size() - 1 - i].cyc_b;
    }
    first /= k;
    last /= k;
    return {last < first, fmt("mean cycle loss first 10%% %.4f, final 10%% %.4f, %.0fs", first, last, seconds_since(t0))};
}

Outcome training_discogan() {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<RasterImage> patches;
    for (int i = 0; i < 30; ++i) patches.push_back(lt::design_patch(64, i % 3, 200 + i));
    const auto masks = gan::mask_domain(patches);
    if (masks.size() != patches.size()) return {false, "Otsu pairing dropped patches"};
    const auto paired_l1 = [&](const gan::GanModel<float>& m) {
        double s = 0;
        for (std::size_t i = 0; i < masks.size(); ++i)
            s += mean_abs_difference(gan::translate(masks[i], gan::Direction::AtoB, m), patches[i]);
        return s / masks.size();
    };
    auto c = gan::GanConfig::defaults(gan::GanKind::DiscoGan);
    c.seed = 1;
    gan::GanModel<float> m(c);
    m.experiment() = {gan::kMask2Design, "", ""};
    const double before = paired_l1(m);
    gan::train(m, masks, patches, {.steps = 200});
    const double after = paired_l1(m);
    return {after < before, fmt("paired L1 mask->design init %.4f, after 200 steps %.4f, %.0fs", before, after,
                                seconds_since(t0))};
}

Outcome collapse_diagnostic() {
    baselines::BaselineConfig c;
    c.latent.dimension = 8;
    c.base_channels = 4;
    c.batch_size = 2;
    baselines::Dcgan<float> m(c);
    for (auto e : m.generator().parameters().entries())
        if (e.name.rfind("out.", 0) == 0) e.var.mutable_value().fill(0.0f);
    const auto constant = baselines::diversity_score(m.sample(8, 1));
    std::vector<RasterImage> noise;
    for (int i = 0; i < 8; ++i) noise.push_back(lt::noise_image(64, 64, 70 + i));
    const auto varied = baselines::diversity_score(noise);
    return {constant.mean_pairwise_l2 == 0.0 && constant.collapse_flag && varied.mean_pairwise_l2 > 0.05 &&
                !varied.collapse_flag,
            fmt("constant generator score %.3g flag %d; uniform noise score %.4f flag %d", constant.mean_pairwise_l2,
                constant.collapse_flag, varied.mean_pairwise_l2, varied.collapse_flag)};
}

Outcome vae_kl() {
    Rng setting_rng(2718), rng(3141);
    constexpr int kSamples = 100000;
    double worst_z = 0;
    for (int s = 0; s < 10; ++s) {
        const double mu = setting_rng.uniform(-2, 2);
        const double logvar = setting_rng.uniform(-2, 1.5);
        const double sd = std::exp(0.5 * logvar);
        // KL(q || p) = E_q[log q(z) - log p(z)], sampled from q.
        double sum = 0, sum_sq = 0;
        for (int i = 0; i < kSamples; ++i) {
            const double z = mu + sd * rng.normal();
            const double e = (z - mu) / sd;
            const double v = -0.5 * e * e - 0.5 * logvar + 0.5 * z * z;
            sum += v;
            sum_sq += v * v;
        }
        const double mean = sum / kSamples;
        const double se = std::sqrt((sum_sq / kSamples - mean * mean) / kSamples);
        const double kl = nn::kl_standard_normal(nn::Var<double>::constant(nn::Tensor<double>({1, 1}, {mu})),
                                                 nn::Var<double>::constant(nn::Tensor<double>({1, 1}, {logvar})))
                              .item();
        worst_z = std::max(worst_z, std::fabs(kl - mean) / se);
    }
    return {worst_z < 3.0, fmt("10 settings, worst |closed form - MC| = %.2f standard errors (limit 3)", worst_z)};
}

Outcome survey_fixture() {
    using namespace survey;
    // Smallest per-participant count giving totals whose one-decimal
    // percentages are 45.8 / 29.7 / 24.5, found by exhaustive search.
    const auto tenths = [](long n, long total) { return (2000 * n + total) / (2 * total); };
    int k = 0;
    long good = 0, bad = 0;
    for (int kk = 1; kk <= 30 && !k; ++kk) {
        const long n = 53L * kk;
        for (long g = 0; g <= n && !k; ++g)
            for (long b = 0; g + b <= n; ++b)
                if (tenths(g, n) == 458 && tenths(b, n) == 297 && tenths(n - g - b, n) == 245) {
                    k = kk, good = g, bad = b;
                    break;
                }
    }
    if (!k) return {false, "no integer response set reproduces the fixture"};
    const long total = 53L * k;
    std::vector<Rating> pool;
    pool.insert(pool.end(), good, Rating::Good);
    pool.insert(pool.end(), bad, Rating::Bad);
    pool.insert(pool.end(), total - good - bad, Rating::Maybe);
    Rng rng(53);
    rng.shuffle(pool.begin(), pool.end());
    std::vector<SurveyResponse> responses;
    for (int p = 0; p < 53; ++p)
        for (int s = 0; s < k; ++s)
            responses.push_back({"p" + std::to_string(p), "g" + std::to_string(s), SampleType::Generated,
                                 Label::Generated, pool[p * k + s], p < 35 ? "male" : "female"});
    const auto report = tally(responses);
    const auto& r = report.ratings.at("generated");
    const bool fixture = r.percent("Good") == 45.8 && r.percent("Bad") == 29.7 && r.percent("Maybe") == 24.5 &&
                         report.participants == 53;

    int bad_sums = 0;
    Rng trial_rng(99);
    for (int t = 0; t < 500; ++t) {
        std::vector<SurveyResponse> rs;
        const int n = 1 + static_cast<int>(trial_rng.below(300));
        for (int i = 0; i < n; ++i)
            rs.push_back({"p" + std::to_string(i), "s", kSampleTypes[trial_rng.below(2)], kLabels[trial_rng.below(3)],
                          kRatings[trial_rng.below(3)], ""});
        const auto rep = tally(rs);
        for (const auto* group : {&rep.labels, &rep.ratings})
            for (const auto& [type, b] : *group) {
                double sum = 0;
                for (const auto& [cat, v] : b.percent_tenths) sum += v / 10.0;
                bad_sums += std::fabs(sum - 100.0) > 0.1 + 1e-9;
            }
    }
    return {fixture && bad_sums == 0,
            fmt("k=%d per participant, %ld responses -> Good %.1f / Bad %.1f / Maybe %.1f; "
                "500 random tallies, %d sums outside 100 +/- 0.1",
                k, total, r.percent("Good"), r.percent("Bad"), r.percent("Maybe"), bad_sums)};
}

Outcome determinism() {
    std::vector<std::string> broken;
    lt::TempDir tmp;

    // Patching.
    std::vector<dataset::SourceImage> sources{{"src0", dataset::ClassLabel::Regional, lt::design_patch(300, 0, 1)},
                                              {"src1", dataset::ClassLabel::Generic, lt::design_patch(280, 1, 2)}};
    dataset::BuildConfig bc;
    bc.patches_per_image = 2;
    bc.augmentations.assign(dataset::kAllAugmentations.begin(), dataset::kAllAugmentations.end());
    bc.seed = 17;
    dataset::build_dataset(sources, bc, tmp / "d1");
    dataset::build_dataset(sources, bc, tmp / "d2");
    if (io::read_file(tmp / "d1" / "manifest.jsonl") != io::read_file(tmp / "d2" / "manifest.jsonl"))
        broken.push_back("dataset manifest");
    for (const auto& r : dataset::read_manifest(tmp / "d1").entries)
        if (io::read_file(tmp / "d1" / r.file) != io::read_file(tmp / "d2" / r.file)) {
            broken.push_back("patch bytes");
            break;
        }

    // Training histories.
    const std::vector<RasterImage> corpus{lt::design_patch(24, 0, 1), lt::design_patch(24, 2, 2)};
    style::TransferConfig tc;
    tc.steps = 3;
    tc.seed = 5;
    style::StyleTrainOptions so;
    so.image_size = 16;
    so.net = {4, 1, 3};
    const auto s1 = style::train_style_model(corpus, lt::noise_image(16, 16, 3), tc, so);
    const auto s2 = style::train_style_model(corpus, lt::noise_image(16, 16, 3), tc, so);
    if (s1.loss_history != s2.loss_history || s1.net->parameters().snapshot() != s2.net->parameters().snapshot())
        broken.push_back("style training");

    auto gc = gan::GanConfig::defaults(gan::GanKind::CycleGan);
    gc.spec.image_size = 8;
    gc.spec.generator = {2, 1, 3};
    gc.spec.disc_channels = 2;
    gc.seed = 6;
    gan::GanModel<float> g1(gc), g2(gc);
    gan::train(g1, corpus, {lt::noise_image(12, 12, 1)}, {.steps = 3});
    gan::train(g2, corpus, {lt::noise_image(12, 12, 1)}, {.steps = 3});
    if (g1.history() != g2.history()) broken.push_back("gan training");

    baselines::BaselineConfig dc;
    dc.latent.dimension = 4;
    dc.base_channels = 2;
    dc.batch_size = 2;
    dc.diversity_samples = 3;
    dc.seed = 7;
    std::vector<RasterImage> big{lt::design_patch(64, 0, 1), lt::design_patch(64, 1, 2), lt::design_patch(64, 2, 3)};
    baselines::Dcgan<float> d1(dc), d2(dc);
    baselines::train_dcgan(d1, big, {.steps = 2});
    baselines::train_dcgan(d2, big, {.steps = 2});
    if (!(d1.history() == d2.history()) || !(d1.sample(3, 1) == d2.sample(3, 1))) broken.push_back("dcgan");

    // Inference.
    const auto target = lt::design_patch(40, 1, 9);
    if (!(style::stylize(target, s1) == style::stylize(target, s2))) broken.push_back("stylize");
    if (!(gan::translate(target, gan::Direction::AtoB, g1) == gan::translate(target, gan::Direction::AtoB, g2)))
        broken.push_back("translate");

    // Review sheets.
    lt::write_patch_folder(tmp / "real", 4, 16, 1);
    lt::write_patch_folder(tmp / "gen", 4, 16, 30);
    const auto pool = [&](const char* d) {
        std::vector<fs::path> out;
        for (const auto& e : fs::directory_iterator(tmp / d)) out.push_back(e.path());
        std::sort(out.begin(), out.end());
        return out;
    };
    survey::write_review_sheet(survey::make_review_sheet(pool("real"), pool("gen"), 5, 11), tmp / "sheet1");
    survey::write_review_sheet(survey::make_review_sheet(pool("real"), pool("gen"), 5, 11), tmp / "sheet2");
    for (const char* f : {"sheet.jsonl", "key.jsonl"})
        if (io::read_file(tmp / "sheet1" / f) != io::read_file(tmp / "sheet2" / f)) broken.push_back(f);

    std::string detail = "patching, style/gan/dcgan histories, stylize, translate, review sheets";
    if (!broken.empty()) {
        detail = "differs across runs:";
        for (const auto& b : broken) detail += " " + b;
    }
    return {broken.empty(), detail};
}

Outcome service_contract() {
    lt::TempDir models, data;
    lt::write_style_model(models / "ink", "ink", 1);
    lt::write_style_model(models / "silk", "silk", 2);
    lt::write_discogan_model(models / "m2d", 3);
    service::Config cfg;
    cfg.models_dir = models.path();
    service::Service svc(cfg);
    svc.load_models();
    const int port = svc.start_background();
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(120, 0);

    std::vector<std::string> failed;
    const auto expect = [&](const std::string& what, const httplib::Result& r, int status) {
        if (!r || r->status != status)
            failed.push_back(what + " (got " + (r ? std::to_string(r->status) : "no response") + ")");
    };
    const auto file = [](const std::string& name, const RasterImage& img) {
        return httplib::MultipartFormData{name, io::encode_png(img), name + ".png", "image/png"};
    };
    const auto text = [](const std::string& name, const std::string& v) {
        return httplib::MultipartFormData{name, v, "", ""};
    };
    const auto target = lt::design_patch(48, 0, 4);
    BinaryMask stripes(48, 48);
    for (int r = 0; r < 48; ++r)
        for (int c = 0; c < 48; ++c) stripes.at(r, c) = (c / 6) % 2;

    expect("healthz", client.Get("/api/v1/healthz"), 200);
    expect("models", client.Get("/api/v1/models"), 200);
    expect("stylize", client.Post("/api/v1/stylize", httplib::MultipartFormDataItems{file("image", target), text("style_id", "ink")}), 200);
    expect("stylize unknown model", client.Post("/api/v1/stylize", httplib::MultipartFormDataItems{file("image", target), text("style_id", "nope")}), 404);
    expect("stylize missing field", client.Post("/api/v1/stylize", httplib::MultipartFormDataItems{text("style_id", "ink")}), 400);
    expect("composite", client.Post("/api/v1/composite", httplib::MultipartFormDataItems{file("image", target), text("fg_style_id", "ink"), text("bg_style_id", "silk")}), 200);
    expect("composite flat image", client.Post("/api/v1/composite", httplib::MultipartFormDataItems{file("image", RasterImage(32, 32, 0.4f)), text("fg_style_id", "ink"), text("bg_style_id", "silk")}), 422);
    expect("mask2design", client.Post("/api/v1/mask2design", httplib::MultipartFormDataItems{{"mask", io::encode_mask(stripes), "mask.png", "image/png"}, text("model_id", "m2d")}), 200);
    expect("mask2design non-binary", client.Post("/api/v1/mask2design", httplib::MultipartFormDataItems{file("mask", lt::noise_image(32, 32, 1)), text("model_id", "m2d")}), 422);
    expect("mask2design wrong kind", client.Post("/api/v1/mask2design", httplib::MultipartFormDataItems{{"mask", io::encode_mask(stripes), "mask.png", "image/png"}, text("model_id", "ink")}), 404);

    lt::write_patch_folder(data / "corpus", 3, 24, 1);
    io::write_png(data / "style.png", lt::design_patch(24, 2, 9));
    const json body{{"kind", "style"},
                    {"params",
                     {{"model_id", "fresh"},
                      {"corpus", (data / "corpus").string()},
                      {"style_image", (data / "style.png").string()},
                      {"steps", 3},
                      {"image_size", 16},
                      {"base_channels", 4},
                      {"res_blocks", 1}}}};
    auto r = client.Post("/api/v1/jobs", body.dump(), "application/json");
    expect("job submit", r, 202);
    expect("duplicate job", client.Post("/api/v1/jobs", body.dump(), "application/json"), 409);
    expect("invalid job", client.Post("/api/v1/jobs", R"({"kind":"pix2pix","params":{}})", "application/json"), 400);
    expect("unknown job", client.Get("/api/v1/jobs/job-999999"), 404);
    if (r && r->status == 202) {
        const std::string id = json::parse(r->body)["job_id"];
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::minutes(5);
        std::string state;
        while (std::chrono::steady_clock::now() < deadline) {
            state = json::parse(client.Get("/api/v1/jobs/" + id)->body)["state"];
            if (state == "succeeded" || state == "failed") break;
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
        if (svc.jobs().transitions().at(id) !=
            std::vector<service::JobState>{service::JobState::Queued, service::JobState::Running,
                                           service::JobState::Succeeded})
            failed.push_back("job state sequence (final " + state + ")");
        expect("stylize with trained model", client.Post("/api/v1/stylize", httplib::MultipartFormDataItems{file("image", target), text("style_id", "fresh")}), 200);
    }
    svc.stop();
    std::string detail = "health, listing, stylize, composite, mask2design, jobs: 200/202/400/404/409/422 as specified";
    if (!failed.empty()) {
        detail = "failed:";
        for (const auto& f : failed) detail += " [" + f + "]";
    }
    return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string filter = argc > 1 ? argv[1] : "";
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"otsu-oracle-equivalence", otsu_oracle},
        {"gradient-checks", gradient_checks},
        {"compositor-identity", compositor_identity},
        {"gan-loss-oracle", gan_loss_oracle},
        {"training-sanity-style", training_style},
        {"training-sanity-cyclegan", training_cyclegan},
        {"training-sanity-discogan", training_discogan},
        {"collapse-diagnostic", collapse_diagnostic},
        {"vae-kl-monte-carlo", vae_kl},
        {"survey-fixture", survey_fixture},
        {"determinism", determinism},
        {"service-contract", service_contract},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        if (name.find(filter) == std::string::npos) continue;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw ") + e.what()};
        }
        failures += !o.pass;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
