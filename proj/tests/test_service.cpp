#include <gtest/gtest.h>

#include <chrono>
#include <thread>

#include "loomgen/service.hpp"
#include "support/fixtures.hpp"
#include "support/multipart.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace loomgen;
using namespace loomgen::service;
using loomgen::testing::design_patch;
using loomgen::testing::noise_image;
using loomgen::testing::parse_multipart;
using loomgen::testing::TempDir;

namespace {

httplib::MultipartFormData file_part(const std::string& name, const std::string& bytes) {
    return {name, bytes, name + ".png", "image/png"};
}

httplib::MultipartFormData text_part(const std::string& name, const std::string& value) {
    return {name, value, "", ""};
}

std::string png(const RasterImage& img) { return io::encode_png(img); }

RasterImage constant_image(int h, int w, float v) {
    RasterImage img(h, w);
    for (auto& x : img.values()) x = v;
    return img;
}

BinaryMask stripe_mask(int h, int w) {
    BinaryMask m(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) m.at(r, c) = (c / 5) % 2;
    return m;
}

class ServiceTest : public ::testing::Test {
protected:
    void SetUp() override {
        loomgen::testing::write_style_model(dir_ / "ink", "ink", 1);
        loomgen::testing::write_style_model(dir_ / "silk", "silk", 2);
        loomgen::testing::write_discogan_model(dir_ / "m2d", 3);
        std::filesystem::create_directories(dir_ / "broken");
        io::write_file(dir_ / "broken" / "meta.json", "{ not json");
        Config c;
        c.models_dir = dir_.path();
        c.workers = 4;
        service_ = std::make_unique<Service>(c);
        service_->load_models();
        port_ = service_->start_background();
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
        client_->set_read_timeout(120, 0);
    }

    void TearDown() override {
        client_.reset();
        service_.reset();
    }

    httplib::Result post(const std::string& path, const httplib::MultipartFormDataItems& items) {
        return client_->Post(path, items);
    }

    json wait_for_job(const std::string& id, std::vector<std::string>* states = nullptr,
                      std::vector<int>* steps = nullptr) {
        const auto deadline = std::chrono::steady_clock::now() + std::chrono::minutes(5);
        for (;;) {
            auto r = client_->Get("/api/v1/jobs/" + id);
            EXPECT_EQ(r->status, 200);
            const json j = json::parse(r->body);
            const std::string state = j["state"];
            if (states && (states->empty() || states->back() != state)) states->push_back(state);
            if (steps) steps->push_back(j["progress"]["step"]);
            if (state == "succeeded" || state == "failed") return j;
            if (std::chrono::steady_clock::now() > deadline) ADD_FAILURE() << "job timed out";
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
    }

    TempDir dir_;
    std::unique_ptr<Service> service_;
    std::unique_ptr<httplib::Client> client_;
    int port_ = 0;
};

std::string error_code(const httplib::Result& r) { return json::parse(r->body).value("error", ""); }

}  // namespace

TEST_F(ServiceTest, HealthAndModelListing) {
    auto r = client_->Get("/api/v1/healthz");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(json::parse(r->body), json({{"status", "ok"}}));

    r = client_->Get("/api/v1/models");
    const auto models = json::parse(r->body);
    ASSERT_EQ(models.size(), 4u);
    std::map<std::string, json> by_id;
    for (const auto& m : models) by_id[m["model_id"]] = m;
    EXPECT_EQ(by_id["ink"]["kind"], "style");
    EXPECT_EQ(by_id["ink"]["status"], "ready");
    EXPECT_EQ(by_id["ink"]["image_size"], 16);
    EXPECT_EQ(by_id["m2d"]["kind"], "discogan");
    EXPECT_EQ(by_id["broken"]["status"], "failed");
    // Every ready entry's checkpoint loads.
    for (const auto& m : models)
        if (m["status"] == "ready")
            EXPECT_NO_THROW(models::load_model(dir_ / m["model_id"].get<std::string>()));
}

TEST_F(ServiceTest, StylizeReturnsSameSizePngDeterministically) {
    const auto img = noise_image(256, 256, 4);
    auto r = post("/api/v1/stylize", {file_part("image", png(img)), text_part("style_id", "ink")});
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200) << r->body;
    EXPECT_EQ(r->get_header_value("Content-Type"), "image/png");
    const auto out = io::decode_image(r->body);
    EXPECT_EQ(out.height(), 256);
    EXPECT_EQ(out.width(), 256);
    auto again = post("/api/v1/stylize", {file_part("image", png(img)), text_part("style_id", "ink")});
    EXPECT_EQ(again->body, r->body);
    // Same bytes as the library path on the decoded upload.
    const auto model = style::load_style_model(dir_ / "ink");
    EXPECT_EQ(r->body, io::encode_png(style::stylize(io::decode_image(png(img)), model)));
}

TEST_F(ServiceTest, StylizeErrors) {
    const std::string img = png(noise_image(16, 16, 1));
    auto r = post("/api/v1/stylize", {file_part("image", img), text_part("style_id", "nope")});
    EXPECT_EQ(r->status, 404);
    EXPECT_EQ(error_code(r), "UnknownModel");

    r = post("/api/v1/stylize", {file_part("image", img), text_part("style_id", "m2d")});
    EXPECT_EQ(r->status, 404);
    EXPECT_NE(r->body.find("discogan"), std::string::npos);

    r = post("/api/v1/stylize", {file_part("image", img)});
    EXPECT_EQ(r->status, 400);

    r = post("/api/v1/stylize", {file_part("image", "not an image"), text_part("style_id", "ink")});
    EXPECT_EQ(r->status, 422);
    EXPECT_EQ(error_code(r), "DecodeError");

    r = post("/api/v1/stylize", {file_part("image", img), text_part("style_id", "broken")});
    EXPECT_EQ(r->status, 404);
}

TEST_F(ServiceTest, OversizedUploadRejectedBeforeDecoding) {
    // 10,000 x 10,000 = 100 MP against the 4 MP default cap.
    const cv::Mat big(10000, 10000, CV_8UC1, cv::Scalar(7));
    auto r = post("/api/v1/stylize", {file_part("image", io::encode_png(big)), text_part("style_id", "ink")});
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 422);
    EXPECT_EQ(error_code(r), "ImageTooLarge");
    r = post("/api/v1/mask2design", {file_part("mask", io::encode_png(cv::Mat(2001, 2000, CV_8UC1, cv::Scalar(0)))),
                                     text_part("model_id", "m2d")});
    EXPECT_EQ(r->status, 422);
    EXPECT_EQ(error_code(r), "ImageTooLarge");
}

TEST_F(ServiceTest, ModelLoadingGives503) {
    RegistryEntry e;
    e.model_id = "warming";
    e.kind = models::ModelKind::Style;
    e.status = ModelStatus::Loading;
    service_->registry().put(e);
    auto r = post("/api/v1/stylize", {file_part("image", png(noise_image(8, 8, 1))), text_part("style_id", "warming")});
    EXPECT_EQ(r->status, 503);
    const auto listed = json::parse(client_->Get("/api/v1/models")->body);
    bool found = false;
    for (const auto& m : listed) found |= m["model_id"] == "warming" && m["status"] == "loading";
    EXPECT_TRUE(found);
}

TEST_F(ServiceTest, AsyncLoadingEventuallyServes) {
    Config c;
    c.models_dir = dir_.path();
    Service s(c);
    s.load_models_async();
    const int port = s.start_background();
    httplib::Client client("127.0.0.1", port);
    const httplib::MultipartFormDataItems items{file_part("image", png(noise_image(8, 8, 1))),
                                                text_part("style_id", "ink")};
    for (int i = 0; i < 10000; ++i) {
        const auto r = client.Post("/api/v1/stylize", items);
        ASSERT_TRUE(r->status == 200 || r->status == 503) << r->status;
        if (r->status == 200) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    FAIL() << "model never became ready";
}

TEST_F(ServiceTest, CompositeWithSameStyleMatchesStylize) {
    const std::string img = png(design_patch(48, 0, 5));
    const auto plain = post("/api/v1/stylize", {file_part("image", img), text_part("style_id", "silk")});
    const auto r = post("/api/v1/composite", {file_part("image", img), text_part("fg_style_id", "silk"),
                                              text_part("bg_style_id", "silk")});
    ASSERT_EQ(r->status, 200) << r->body;
    const auto parts = parse_multipart(r->body, r->get_header_value("Content-Type"));
    ASSERT_TRUE(parts.contains("result") && parts.contains("mask") && parts.contains("meta"));
    EXPECT_EQ(parts.at("result").body, plain->body);
    const auto meta = json::parse(parts.at("meta").body);
    EXPECT_TRUE(meta.contains("threshold_used"));
    const auto mask = io::decode_mask(parts.at("mask").body);
    EXPECT_EQ(mask.height(), 48);
    EXPECT_EQ(mask, masking::otsu_mask(io::decode_image(img)).mask);
}

TEST_F(ServiceTest, CompositeMaskOverrideAndInvert) {
    const auto target = design_patch(40, 1, 6);
    const auto mask = stripe_mask(40, 40);
    auto r = post("/api/v1/composite", {file_part("image", png(target)), file_part("mask", io::encode_mask(mask)),
                                        text_part("fg_style_id", "ink"), text_part("bg_style_id", "silk")});
    ASSERT_EQ(r->status, 200) << r->body;
    auto parts = parse_multipart(r->body, r->get_header_value("Content-Type"));
    EXPECT_FALSE(json::parse(parts.at("meta").body).contains("threshold_used"));
    EXPECT_EQ(io::decode_mask(parts.at("mask").body), mask);
    const std::string with_override = parts.at("result").body;

    // Swapping styles and inverting the mask reproduces the same output.
    r = post("/api/v1/composite", {file_part("image", png(target)), file_part("mask", io::encode_mask(masking::invert(mask))),
                                   text_part("fg_style_id", "silk"), text_part("bg_style_id", "ink")});
    parts = parse_multipart(r->body, r->get_header_value("Content-Type"));
    EXPECT_EQ(parts.at("result").body, with_override);

    // Otsu path with the invert flag.
    r = post("/api/v1/composite", {file_part("image", png(target)), text_part("fg_style_id", "ink"),
                                   text_part("bg_style_id", "silk"), text_part("invert", "true")});
    ASSERT_EQ(r->status, 200);
    parts = parse_multipart(r->body, r->get_header_value("Content-Type"));
    EXPECT_EQ(io::decode_mask(parts.at("mask").body), masking::otsu_mask(io::decode_image(png(target)), true).mask);
}

TEST_F(ServiceTest, CompositeErrors) {
    const std::string flat = png(constant_image(16, 16, 0.4f));
    auto r = post("/api/v1/composite",
                  {file_part("image", flat), text_part("fg_style_id", "ink"), text_part("bg_style_id", "silk")});
    EXPECT_EQ(r->status, 422);
    EXPECT_EQ(error_code(r), "DegenerateHistogram");
    EXPECT_NE(r->body.find("mask"), std::string::npos);

    // The same flat image composes fine once a mask is supplied.
    r = post("/api/v1/composite", {file_part("image", flat), file_part("mask", io::encode_mask(stripe_mask(16, 16))),
                                   text_part("fg_style_id", "ink"), text_part("bg_style_id", "silk")});
    EXPECT_EQ(r->status, 200);

    r = post("/api/v1/composite", {file_part("image", flat), file_part("mask", io::encode_mask(stripe_mask(16, 17))),
                                   text_part("fg_style_id", "ink"), text_part("bg_style_id", "silk")});
    EXPECT_EQ(r->status, 422);
    EXPECT_EQ(error_code(r), "DimensionMismatch");

    cv::Mat gray(16, 16, CV_8UC1, cv::Scalar(0));
    gray.at<std::uint8_t>(3, 3) = 128;
    r = post("/api/v1/composite", {file_part("image", flat), file_part("mask", io::encode_png(gray)),
                                   text_part("fg_style_id", "ink"), text_part("bg_style_id", "silk")});
    EXPECT_EQ(r->status, 422);
    EXPECT_EQ(error_code(r), "NonBinaryInput");

    r = post("/api/v1/composite", {file_part("image", flat), text_part("fg_style_id", "ink"),
                                   text_part("bg_style_id", "nope")});
    EXPECT_EQ(r->status, 404);

    r = post("/api/v1/composite", {file_part("image", png(design_patch(16, 0, 1))), text_part("fg_style_id", "ink"),
                                   text_part("bg_style_id", "silk"), text_part("invert", "maybe")});
    EXPECT_EQ(r->status, 400);
}

TEST_F(ServiceTest, MaskToDesign) {
    BinaryMask mask(256, 256);
    for (int r = 0; r < 256; ++r)
        for (int c = 0; c < 256; ++c) mask.at(r, c) = (r / 32 + c / 32) % 2;
    auto r = post("/api/v1/mask2design", {file_part("mask", io::encode_mask(mask)), text_part("model_id", "m2d")});
    ASSERT_EQ(r->status, 200) << r->body;
    const cv::Mat out = io::decode_mat(r->body, cv::IMREAD_UNCHANGED);
    EXPECT_EQ(out.rows, 256);
    EXPECT_EQ(out.cols, 256);
    EXPECT_EQ(out.channels(), 3);
    auto again = post("/api/v1/mask2design", {file_part("mask", io::encode_mask(mask)), text_part("model_id", "m2d")});
    EXPECT_EQ(again->body, r->body);

    cv::Mat gray(32, 32, CV_8UC1, cv::Scalar(255));
    gray.at<std::uint8_t>(0, 0) = 128;
    r = post("/api/v1/mask2design", {file_part("mask", io::encode_png(gray)), text_part("model_id", "m2d")});
    EXPECT_EQ(r->status, 422);
    EXPECT_EQ(error_code(r), "NonBinaryInput");

    r = post("/api/v1/mask2design", {file_part("mask", io::encode_mask(mask)), text_part("model_id", "ink")});
    EXPECT_EQ(r->status, 404);
    EXPECT_EQ(error_code(r), "WrongModelKind");
    EXPECT_NE(r->body.find("style"), std::string::npos);
    EXPECT_NE(r->body.find("discogan"), std::string::npos);

    r = post("/api/v1/mask2design", {file_part("mask", io::encode_mask(mask)), text_part("model_id", "ghost")});
    EXPECT_EQ(r->status, 404);
}

TEST_F(ServiceTest, InferenceDoesNotMutateModels) {
    const auto before = service_->registry().get("ink")->model.style->net->parameters().snapshot();
    std::vector<std::thread> threads;
    std::vector<std::string> bodies(4);
    const std::string img = png(noise_image(40, 40, 9));
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&, t] {
            httplib::Client c("127.0.0.1", port_);
            bodies[t] = c.Post("/api/v1/stylize", httplib::MultipartFormDataItems{file_part("image", img), text_part("style_id", "ink")})->body;
        });
    for (auto& t : threads) t.join();
    for (int t = 1; t < 4; ++t) EXPECT_EQ(bodies[t], bodies[0]);
    const auto after = service_->registry().get("ink")->model.style->net->parameters().snapshot();
    EXPECT_EQ(before, after);
}

TEST_F(ServiceTest, JobLifecycle) {
    TempDir data;
    const auto corpus = data / "corpus";
    loomgen::testing::write_patch_folder(corpus, 3, 24, 1);
    io::write_png(data / "style.png", design_patch(24, 2, 9));
    const json body{{"kind", "style"},
                    {"params",
                     {{"model_id", "fresh"},
                      {"corpus", corpus.string()},
                      {"style_image", (data / "style.png").string()},
                      {"steps", 4},
                      {"image_size", 16},
                      {"base_channels", 4},
                      {"res_blocks", 1}}}};
    auto r = client_->Post("/api/v1/jobs", body.dump(), "application/json");
    ASSERT_EQ(r->status, 202) << r->body;
    const auto job = json::parse(r->body);
    EXPECT_EQ(job["state"], "queued");
    EXPECT_EQ(job["progress"]["total"], 4);

    // Duplicate for the same model_id while queued/running, or after it exists.
    auto dup = client_->Post("/api/v1/jobs", body.dump(), "application/json");
    EXPECT_EQ(dup->status, 409);

    std::vector<std::string> states;
    std::vector<int> steps;
    const auto done = wait_for_job(job["job_id"], &states, &steps);
    EXPECT_EQ(done["state"], "succeeded") << done.dump();
    EXPECT_EQ(done["progress"]["step"], 4);
    EXPECT_TRUE(std::is_sorted(steps.begin(), steps.end()));
    const std::vector<std::string> legal{"queued", "running", "succeeded"};
    EXPECT_TRUE(std::includes(legal.begin(), legal.end(), states.begin(), states.end(),
                              [&](const std::string& a, const std::string& b) {
                                  return std::find(legal.begin(), legal.end(), a) <
                                         std::find(legal.begin(), legal.end(), b);
                              }));
    EXPECT_EQ(service_->jobs().transitions().at(job["job_id"]),
              (std::vector<JobState>{JobState::Queued, JobState::Running, JobState::Succeeded}));

    bool ready = false;
    for (const auto& m : json::parse(client_->Get("/api/v1/models")->body))
        ready |= m["model_id"] == "fresh" && m["status"] == "ready";
    EXPECT_TRUE(ready);
    r = post("/api/v1/stylize", {file_part("image", png(noise_image(20, 20, 1))), text_part("style_id", "fresh")});
    EXPECT_EQ(r->status, 200);

    dup = client_->Post("/api/v1/jobs", body.dump(), "application/json");
    EXPECT_EQ(dup->status, 409);
}

TEST_F(ServiceTest, FailingJobReportsError) {
    TempDir empty;
    const json body{{"kind", "vae"}, {"params", {{"model_id", "hollow"}, {"corpus", empty.path().string()}, {"steps", 2}}}};
    auto r = client_->Post("/api/v1/jobs", body.dump(), "application/json");
    ASSERT_EQ(r->status, 202) << r->body;
    std::vector<std::string> states;
    const auto done = wait_for_job(json::parse(r->body)["job_id"], &states);
    EXPECT_EQ(done["state"], "failed");
    EXPECT_NE(done["error"].get<std::string>().find("EmptyCorpus"), std::string::npos);
    EXPECT_EQ(states.back(), "failed");
    const auto entry = service_->registry().get("hollow");
    ASSERT_TRUE(entry);
    EXPECT_EQ(entry->status, ModelStatus::Failed);
    EXPECT_FALSE(std::filesystem::exists(dir_ / "hollow"));
    // A failed model id can be resubmitted.
    r = client_->Post("/api/v1/jobs", body.dump(), "application/json");
    EXPECT_EQ(r->status, 202);
    wait_for_job(json::parse(r->body)["job_id"]);
}

TEST_F(ServiceTest, InvalidJobRequests) {
    const auto submit = [&](const std::string& body) {
        return client_->Post("/api/v1/jobs", body, "application/json")->status;
    };
    EXPECT_EQ(submit("{oops"), 400);
    EXPECT_EQ(submit(R"({"params":{}})"), 400);
    EXPECT_EQ(submit(R"({"kind":"pix2pix","params":{"model_id":"x"}})"), 400);
    EXPECT_EQ(submit(R"({"kind":"vae","params":{"corpus":"c"}})"), 400);                       // missing model_id
    EXPECT_EQ(submit(R"({"kind":"vae","params":{"model_id":"x","corpus":"c","bogus":1}})"), 400);  // unknown key
    EXPECT_EQ(submit(R"({"kind":"vae","params":{"model_id":"x","corpus":"c","steps":"3"}})"), 400);  // type
    EXPECT_EQ(submit(R"({"kind":"vae","params":{"model_id":"x","corpus":"c","image_size":96}})"), 400);
    EXPECT_EQ(submit(R"({"kind":"dcgan","params":{"model_id":"../x","corpus":"c"}})"), 400);
    EXPECT_EQ(submit(R"({"kind":"cyclegan","params":{"model_id":"x","domain_b":"b"}})"), 400);  // needs domain_a
    EXPECT_EQ(submit(R"({"kind":"style","params":{"model_id":"ink","corpus":"c","style_image":"s"}})"), 409);
    EXPECT_EQ(client_->Get("/api/v1/jobs/job-999999")->status, 404);
}

TEST(JobStateMachine, OnlyDeclaredEdges) {
    const JobState all[] = {JobState::Queued, JobState::Running, JobState::Succeeded, JobState::Failed};
    int allowed = 0;
    for (auto from : all)
        for (auto to : all) allowed += valid_transition(from, to);
    EXPECT_EQ(allowed, 3);
    EXPECT_TRUE(valid_transition(JobState::Queued, JobState::Running));
    EXPECT_TRUE(valid_transition(JobState::Running, JobState::Succeeded));
    EXPECT_TRUE(valid_transition(JobState::Running, JobState::Failed));
}
