#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "loomgen/dual_style.hpp"
#include "loomgen/image_io.hpp"
#include "loomgen/masking.hpp"
#include "loomgen/models.hpp"
#include "loomgen/training.hpp"
#include "loomgen/util.hpp"

// After Eigen: <resolv.h>, pulled in by httplib, defines a `_res` macro
// that collides with Eigen parameter names.
#include "httplib.h"

namespace loomgen::service {

namespace fs = std::filesystem;
using models::ModelKind;

struct Config {
    fs::path models_dir = "models";
    std::string host = "127.0.0.1";
    int port = 8080;
    std::int64_t max_pixels = 4'000'000;
    int workers = 4;  // concurrent request handlers
};

// ---------------------------------------------------------------------------
// Model registry

enum class ModelStatus { Loading, Ready, Training, Failed };

constexpr const char* to_string(ModelStatus s) {
    switch (s) {
        case ModelStatus::Loading: return "loading";
        case ModelStatus::Ready: return "ready";
        case ModelStatus::Training: return "training";
        case ModelStatus::Failed: return "failed";
    }
    return "";
}

struct RegistryEntry {
    std::string model_id;
    ModelKind kind = ModelKind::Style;
    int image_size = 0;
    std::string created_at;
    ModelStatus status = ModelStatus::Loading;
    std::string error;
    models::AnyModel model;  // set iff status is ready

    json to_json() const {
        json j{{"model_id", model_id},
               {"kind", models::to_string(kind)},
               {"image_size", image_size},
               {"created_at", created_at},
               {"status", to_string(status)}};
        if (!error.empty()) j["error"] = error;
        return j;
    }
};

/// Thread-safe map from model_id to entry. Loaded models are immutable and
/// shared read-only between requests.
class Registry {
public:
    std::vector<RegistryEntry> list() const {
        std::lock_guard lock(mutex_);
        std::vector<RegistryEntry> out;
        for (const auto& [id, e] : entries_) out.push_back(e);
        return out;
    }

    std::optional<RegistryEntry> get(const std::string& id) const {
        std::lock_guard lock(mutex_);
        const auto it = entries_.find(id);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void put(RegistryEntry e) {
        std::lock_guard lock(mutex_);
        entries_[e.model_id] = std::move(e);
    }

    void set_status(const std::string& id, ModelStatus status, std::string error = {}) {
        std::lock_guard lock(mutex_);
        auto& e = entries_.at(id);
        e.status = status;
        e.error = std::move(error);
        if (status != ModelStatus::Ready) e.model = {};
    }

    /// Registers every checkpoint directory under `dir` as loading and
    /// returns their ids. Hidden directories (staging, job records) are skipped.
    std::vector<std::string> discover(const fs::path& dir) {
        std::vector<std::string> ids;
        if (!fs::is_directory(dir)) return ids;
        for (const auto& d : fs::directory_iterator(dir)) {
            const std::string id = d.path().filename().string();
            if (!d.is_directory() || id.starts_with(".") || !fs::exists(d.path() / "meta.json")) continue;
            RegistryEntry e;
            e.model_id = id;
            try {
                const auto info = models::peek_checkpoint(d.path());
                e.kind = info.kind;
                e.image_size = info.image_size;
                e.created_at = info.created_at;
            } catch (const Error& err) {
                e.status = ModelStatus::Failed;
                e.error = err.what();
            }
            put(e);
            if (e.status == ModelStatus::Loading) ids.push_back(id);
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    /// Loads one discovered checkpoint; the entry becomes ready or failed.
    void load(const std::string& id, const fs::path& dir) {
        try {
            auto model = models::load_model(dir);
            std::lock_guard lock(mutex_);
            auto& e = entries_.at(id);
            e.model = std::move(model);
            e.kind = e.model.kind;
            e.status = ModelStatus::Ready;
            e.error.clear();
        } catch (const std::exception& ex) {
            set_status(id, ModelStatus::Failed, ex.what());
        }
    }

private:
    mutable std::mutex mutex_;
    std::map<std::string, RegistryEntry> entries_;
};

// ---------------------------------------------------------------------------
// Training jobs

enum class JobState { Queued, Running, Succeeded, Failed };

constexpr const char* to_string(JobState s) {
    switch (s) {
        case JobState::Queued: return "queued";
        case JobState::Running: return "running";
        case JobState::Succeeded: return "succeeded";
        case JobState::Failed: return "failed";
    }
    return "";
}

/// Allowed edges: queued -> running -> {succeeded, failed}.
constexpr bool valid_transition(JobState from, JobState to) {
    return (from == JobState::Queued && to == JobState::Running) ||
           (from == JobState::Running && (to == JobState::Succeeded || to == JobState::Failed));
}

struct Job {
    std::string job_id;
    training::Request request;
    std::string params_digest;
    JobState state = JobState::Queued;
    int step = 0;
    int total = 0;
    std::string error;
    std::string created_at;

    bool active() const { return state == JobState::Queued || state == JobState::Running; }

    json to_json() const {
        json j{{"job_id", job_id},
               {"kind", models::to_string(request.kind)},
               {"model_id", request.model_id()},
               {"params_digest", params_digest},
               {"state", to_string(state)},
               {"progress", {{"step", step}, {"total", total}}},
               {"created_at", created_at}};
        j["error"] = error.empty() ? json(nullptr) : json(error);
        return j;
    }
};

/// A request failure mapped onto an HTTP status with a machine-readable code.
struct HttpError {
    int status;
    std::string code;
    std::string message;
};

/// FIFO queue with a single worker thread, so training runs one job at a
/// time. A finished model is staged under a hidden directory and renamed
/// into place before it is registered.
class JobQueue {
public:
    JobQueue(Registry& registry, fs::path models_dir) : registry_(registry), models_dir_(std::move(models_dir)) {}
    ~JobQueue() { stop(); }

    void start() {
        if (worker_.joinable()) return;
        worker_ = std::thread([this] { run(); });
    }

    void stop() {
        {
            std::lock_guard lock(mutex_);
            stopping_ = true;
        }
        cv_.notify_all();
        if (worker_.joinable()) worker_.join();
    }

    Job submit(const std::string& kind, const json& params) {
        training::Request req;
        try {
            req = training::make_request(kind, params);
        } catch (const Error& e) {
            throw HttpError{400, std::string(e.name()), e.what()};
        }
        std::lock_guard lock(mutex_);
        const std::string id = req.model_id();
        for (const auto& [jid, j] : jobs_)
            if (j.active() && j.request.model_id() == id)
                throw HttpError{409, "Conflict", "job " + jid + " is already active for " + id};
        if (const auto existing = registry_.get(id); existing && existing->status != ModelStatus::Failed)
            throw HttpError{409, "Conflict",
                            "model '" + id + "' already exists with status " + to_string(existing->status)};
        Job job;
        job.job_id = next_id();
        job.request = req;
        job.params_digest = req.digest();
        job.total = req.params.at("steps");
        job.created_at = utc_timestamp();
        jobs_[job.job_id] = job;
        order_.push_back(job.job_id);
        persist(job);
        RegistryEntry entry;
        entry.model_id = id;
        entry.kind = req.kind;
        entry.image_size = req.params.at("image_size");
        entry.created_at = job.created_at;
        entry.status = ModelStatus::Training;
        registry_.put(entry);
        cv_.notify_all();
        return job;
    }

    std::optional<Job> get(const std::string& job_id) const {
        std::lock_guard lock(mutex_);
        const auto it = jobs_.find(job_id);
        if (it == jobs_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<Job> list() const {
        std::lock_guard lock(mutex_);
        std::vector<Job> out;
        for (const auto& [id, j] : jobs_) out.push_back(j);
        return out;
    }

    /// Every transition observed so far, per job; used to audit the state machine.
    std::map<std::string, std::vector<JobState>> transitions() const {
        std::lock_guard lock(mutex_);
        return transitions_;
    }

private:
    std::string next_id() {
        std::string n = std::to_string(++counter_);
        return "job-" + std::string(n.size() < 6 ? 6 - n.size() : 0, '0') + n;
    }

    void persist(const Job& job) {
        // Best effort: the in-memory record is authoritative.
        try {
            fs::create_directories(models_dir_ / ".jobs");
            io::write_file_atomic(models_dir_ / ".jobs" / (job.job_id + ".json"), job.to_json().dump(2) + "\n");
        } catch (const std::exception&) {
        }
        transitions_[job.job_id].push_back(job.state);
    }

    void transition(const std::string& id, JobState to, const std::string& error = {}) {
        std::lock_guard lock(mutex_);
        auto& job = jobs_.at(id);
        if (!valid_transition(job.state, to))
            fail(ErrorKind::InvalidArgument,
                 std::string("illegal job transition ") + to_string(job.state) + " -> " + to_string(to));
        job.state = to;
        job.error = error;
        persist(job);
    }

    void run() {
        for (;;) {
            std::string id;
            training::Request req;
            {
                std::unique_lock lock(mutex_);
                cv_.wait(lock, [&] { return stopping_ || !order_.empty(); });
                if (stopping_) return;
                id = order_.front();
                order_.pop_front();
                req = jobs_.at(id).request;
            }
            transition(id, JobState::Running);
            const fs::path staging = models_dir_ / (".staging-" + id);
            const fs::path target = models_dir_ / req.model_id();
            try {
                fs::remove_all(staging);
                training::run(req, staging, [&](int step, int total) {
                    std::lock_guard lock(mutex_);
                    auto& job = jobs_.at(id);
                    job.step = std::max(job.step, step);
                    job.total = total;
                });
                fs::remove_all(target);
                fs::rename(staging, target);
                registry_.load(req.model_id(), target);
                const auto entry = registry_.get(req.model_id());
                if (!entry || entry->status != ModelStatus::Ready)
                    fail(ErrorKind::ModelLoadError, entry ? entry->error : "model vanished from registry");
                transition(id, JobState::Succeeded);
            } catch (const std::exception& e) {
                std::error_code ec;
                fs::remove_all(staging, ec);
                registry_.set_status(req.model_id(), ModelStatus::Failed, e.what());
                transition(id, JobState::Failed, e.what());
            }
        }
    }

    Registry& registry_;
    fs::path models_dir_;
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::map<std::string, Job> jobs_;
    std::map<std::string, std::vector<JobState>> transitions_;
    std::deque<std::string> order_;
    std::uint64_t counter_ = 0;
    bool stopping_ = false;
    std::thread worker_;
};

// ---------------------------------------------------------------------------
// HTTP surface

inline void send_error(httplib::Response& res, const HttpError& e) {
    res.status = e.status;
    res.set_content(json{{"error", e.code}, {"message", e.message}}.dump(), "application/json");
}

/// Maps module errors raised while serving an inference request.
inline HttpError inference_error(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::DegenerateHistogram:
            return {422, "DegenerateHistogram",
                    std::string(e.what()) + "; the image has a single gray level, upload a mask to composite it"};
        case ErrorKind::ModelLoadError: return {500, std::string(e.name()), e.what()};
        case ErrorKind::InvalidArgument: return {400, std::string(e.name()), e.what()};
        default: return {422, std::string(e.name()), e.what()};
    }
}

inline std::string multipart_boundary(std::string_view seed) { return "loomgen-" + hex64(fnv1a64(seed)); }

struct Part {
    std::string name;
    std::string filename;
    std::string content_type;
    std::string body;
};

/// multipart/form-data body; the boundary is derived from the content so
/// identical responses are byte-identical.
inline std::pair<std::string, std::string> encode_multipart(const std::vector<Part>& parts) {
    std::string all;
    for (const auto& p : parts) all += p.body;
    const std::string boundary = multipart_boundary(all);
    std::string body;
    for (const auto& p : parts) {
        body += "--" + boundary + "\r\n";
        body += "Content-Disposition: form-data; name=\"" + p.name + "\"";
        if (!p.filename.empty()) body += "; filename=\"" + p.filename + "\"";
        body += "\r\nContent-Type: " + p.content_type + "\r\n\r\n";
        body += p.body + "\r\n";
    }
    body += "--" + boundary + "--\r\n";
    return {body, "multipart/form-data; boundary=" + boundary};
}

class Service {
public:
    explicit Service(Config config) : config_(std::move(config)), jobs_(registry_, config_.models_dir) {
        fs::create_directories(config_.models_dir);
        server_.new_task_queue = [n = std::max(1, config_.workers)] { return new httplib::ThreadPool(n); };
        routes();
    }

    ~Service() {
        stop();
        if (loader_.joinable()) loader_.join();
    }

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Discovers checkpoints (all marked loading) and loads them on a
    /// background thread; requests for a loading model get 503 meanwhile.
    void load_models_async() {
        const auto ids = registry_.discover(config_.models_dir);
        loader_ = std::thread([this, ids] {
            for (const auto& id : ids) registry_.load(id, config_.models_dir / id);
            loaded_ = true;
        });
    }

    void load_models() {
        for (const auto& id : registry_.discover(config_.models_dir)) registry_.load(id, config_.models_dir / id);
        loaded_ = true;
    }

    bool models_loaded() const { return loaded_; }

    /// Blocks until stop().
    bool listen() {
        jobs_.start();
        return server_.listen(config_.host, config_.port);
    }

    /// Binds an ephemeral port and serves on a background thread; returns the port.
    int start_background() {
        jobs_.start();
        const int port = server_.bind_to_any_port(config_.host);
        if (port < 0) fail(ErrorKind::IoError, "cannot bind " + config_.host);
        listener_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return port;
    }

    void stop() {
        server_.stop();
        if (listener_.joinable()) listener_.join();
        jobs_.stop();
    }

    Registry& registry() { return registry_; }
    JobQueue& jobs() { return jobs_; }
    const Config& config() const { return config_; }

private:
    template <typename Handler>
    static void guarded(httplib::Response& res, Handler&& handler) {
        try {
            handler();
        } catch (const HttpError& e) {
            send_error(res, e);
        } catch (const Error& e) {
            send_error(res, inference_error(e));
        } catch (const std::exception& e) {
            send_error(res, {500, "InternalError", e.what()});
        }
    }

    static std::string field(const httplib::Request& req, const std::string& name) {
        if (!req.has_file(name)) throw HttpError{400, "MissingField", "multipart field '" + name + "' is required"};
        return req.get_file_value(name).content;
    }

    static std::optional<std::string> optional_field(const httplib::Request& req, const std::string& name) {
        if (!req.has_file(name)) return std::nullopt;
        return req.get_file_value(name).content;
    }

    static bool parse_flag(const std::optional<std::string>& v, const std::string& name) {
        if (!v || *v == "false" || *v == "0" || v->empty()) return false;
        if (*v == "true" || *v == "1") return true;
        throw HttpError{400, "InvalidField", "field '" + name + "' must be true, false, 1 or 0"};
    }

    /// Ready model of one of `kinds`, or the matching HTTP error.
    models::AnyModel require_model(const std::string& id, std::initializer_list<ModelKind> kinds) const {
        const auto e = registry_.get(id);
        if (!e) throw HttpError{404, "UnknownModel", "no model '" + id + "'"};
        bool kind_ok = false;
        std::string wanted;
        for (ModelKind k : kinds) {
            kind_ok |= e->kind == k;
            wanted += (wanted.empty() ? "" : " or ") + std::string(models::to_string(k));
        }
        if (!kind_ok)
            throw HttpError{404, "WrongModelKind",
                            "model '" + id + "' is a " + models::to_string(e->kind) + " model; this endpoint needs " +
                                wanted};
        switch (e->status) {
            case ModelStatus::Ready: return e->model;
            case ModelStatus::Loading:
            case ModelStatus::Training:
                throw HttpError{503, "ModelUnavailable", "model '" + id + "' is " + to_string(e->status)};
            case ModelStatus::Failed:
                throw HttpError{404, "ModelFailed", "model '" + id + "' failed: " + e->error};
        }
        throw HttpError{500, "InternalError", "unreachable"};
    }

    void check_pixels(int width, int height) const {
        const std::int64_t pixels = static_cast<std::int64_t>(width) * height;
        if (pixels > config_.max_pixels)
            throw HttpError{422, "ImageTooLarge",
                            std::to_string(width) + "x" + std::to_string(height) + " exceeds the cap of " +
                                std::to_string(config_.max_pixels) + " pixels"};
    }

    /// Size check from the header first so oversized uploads are never decoded.
    RasterImage decode_upload(const std::string& bytes) const {
        if (const auto dims = io::peek_dimensions(bytes)) check_pixels(dims->width, dims->height);
        RasterImage img = io::decode_image(bytes);
        check_pixels(img.width(), img.height());
        return img;
    }

    BinaryMask decode_mask_upload(const std::string& bytes) const {
        if (const auto dims = io::peek_dimensions(bytes)) check_pixels(dims->width, dims->height);
        BinaryMask mask = io::decode_mask(bytes);
        check_pixels(mask.width(), mask.height());
        return mask;
    }

    void routes() {
        server_.Get("/api/v1/healthz", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"status":"ok"})", "application/json");
        });

        server_.Get("/api/v1/models", [this](const httplib::Request&, httplib::Response& res) {
            json out = json::array();
            for (const auto& e : registry_.list()) out.push_back(e.to_json());
            res.set_content(out.dump(), "application/json");
        });

        server_.Post("/api/v1/stylize", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const std::string style_id = field(req, "style_id");
                const std::string image = field(req, "image");
                const auto model = require_model(style_id, {ModelKind::Style});
                const auto out = style::stylize(decode_upload(image), *model.style);
                res.set_content(io::encode_png(out), "image/png");
            });
        });

        server_.Post("/api/v1/composite", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const std::string fg_id = field(req, "fg_style_id");
                const std::string bg_id = field(req, "bg_style_id");
                const std::string image = field(req, "image");
                dual_style::CompositeOptions opts;
                opts.invert = parse_flag(optional_field(req, "invert"), "invert");
                const auto fg = require_model(fg_id, {ModelKind::Style});
                const auto bg = require_model(bg_id, {ModelKind::Style});
                const RasterImage target = decode_upload(image);
                if (const auto mask = optional_field(req, "mask")) opts.mask_override = decode_mask_upload(*mask);
                const auto result = dual_style::composite(target, *fg.style, *bg.style, opts);
                json meta{{"fg_style_id", result.fg_style_id}, {"bg_style_id", result.bg_style_id}};
                if (result.threshold_used) meta["threshold_used"] = *result.threshold_used;
                const auto [body, type] =
                    encode_multipart({{"result", "result.png", "image/png", io::encode_png(result.output)},
                                      {"mask", "mask.png", "image/png", io::encode_mask(result.mask_used)},
                                      {"meta", "", "application/json", meta.dump()}});
                res.set_content(body, type);
            });
        });

        server_.Post("/api/v1/mask2design", [this](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
                const std::string model_id = field(req, "model_id");
                const std::string mask = field(req, "mask");
                const auto model = require_model(model_id, {ModelKind::DiscoGan});
                const auto out = gan::mask_to_design(decode_mask_upload(mask), *model.gan);
                res.set_content(io::encode_png(out), "image/png");
            });
        });

        server_.Post("/api/v1/jobs", [this](const httplib::Request& req, httplib::Response& res) {
            try {
                json body;
                try {
                    body = json::parse(req.body);
                } catch (const json::exception& e) {
                    throw HttpError{400, "InvalidJson", e.what()};
                }
                if (!body.is_object() || !body.contains("kind") || !body.at("kind").is_string())
                    throw HttpError{400, "InvalidArgument", "body must be {\"kind\": string, \"params\": object}"};
                const auto job = jobs_.submit(body.at("kind").get<std::string>(), body.value("params", json::object()));
                res.status = 202;
                res.set_content(job.to_json().dump(), "application/json");
            } catch (const HttpError& e) {
                send_error(res, e);
            }
        });

        server_.Get("/api/v1/jobs", [this](const httplib::Request&, httplib::Response& res) {
            json out = json::array();
            for (const auto& j : jobs_.list()) out.push_back(j.to_json());
            res.set_content(out.dump(), "application/json");
        });

        server_.Get(R"(/api/v1/jobs/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
            const auto job = jobs_.get(req.matches[1]);
            if (!job) return send_error(res, {404, "UnknownJob", "no job '" + std::string(req.matches[1]) + "'"});
            res.set_content(job->to_json().dump(), "application/json");
        });
    }

    Config config_;
    Registry registry_;
    JobQueue jobs_;
    httplib::Server server_;
    std::thread listener_;
    std::thread loader_;
    std::atomic<bool> loaded_{false};
};

}  // namespace loomgen::service
