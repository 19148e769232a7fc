#pragma once

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loomgen/baselines.hpp"
#include "loomgen/dataset.hpp"
#include "loomgen/domain_gan.hpp"
#include "loomgen/dual_style.hpp"
#include "loomgen/image_io.hpp"
#include "loomgen/masking.hpp"
#include "loomgen/models.hpp"
#include "loomgen/service.hpp"
#include "loomgen/survey.hpp"
#include "loomgen/training.hpp"

#include "CLI11.hpp"

namespace loomgen::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline std::string flag_name(const std::string& param) {
    std::string s = param;
    std::replace(s.begin(), s.end(), '_', '-');
    return "--" + s;
}

inline std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::replace(s.begin(), s.end(), '\r', ' ');
    return s;
}

inline std::vector<fs::path> image_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) fail(ErrorKind::EmptyFolder, dir.string() + " is not a directory");
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && io::has_image_extension(e.path())) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

/// Training flags generated from the parameter table of `kind`, so flag
/// names and defaults match the job API. `seed` comes from the global flag.
struct TrainingFlags {
    models::ModelKind kind;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string out;

    void attach(CLI::App& app) {
        app.add_option("--out", out, "checkpoint directory to write")->required();
        for (const auto& spec : training::param_specs(kind)) {
            if (spec.name == "seed") continue;
            std::string help = spec.help;
            if (!spec.fallback.is_null()) help += " (default " + spec.fallback.dump() + ")";
            if (spec.name == "model_id") help += " (default: name of --out)";
            auto* opt = app.add_option(flag_name(spec.name), values[spec.name], help);
            options[spec.name] = opt;
            if (spec.required && spec.name != "model_id") opt->required();
            if (spec.type == training::ParamType::Integer) opt->check(CLI::TypeValidator<long long>("INT"));
            if (spec.type == training::ParamType::Number) opt->check(CLI::Number);
        }
    }

    training::Request request(std::optional<std::uint64_t> seed) const {
        json params = json::object();
        for (const auto& spec : training::param_specs(kind)) {
            const auto it = values.find(spec.name);
            const auto opt = options.find(spec.name);
            if (opt == options.end() || opt->second->count() == 0) continue;
            switch (spec.type) {
                case training::ParamType::Integer: params[spec.name] = std::stoll(it->second); break;
                case training::ParamType::Number: params[spec.name] = std::stod(it->second); break;
                case training::ParamType::Boolean: params[spec.name] = it->second == "true"; break;
                case training::ParamType::String: params[spec.name] = it->second; break;
            }
        }
        if (!params.contains("model_id")) params["model_id"] = fs::path(out).lexically_normal().filename().string();
        if (params["model_id"] == "") params["model_id"] = fs::absolute(out).parent_path().filename().string();
        if (seed) params["seed"] = *seed;
        return training::make_request(kind, params);
    }
};

}  // namespace detail

/// Parses `args` (without the program name), runs the command and returns
/// the exit code. Failures print one line `error: <ErrorKind>: <detail>`.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"loomgen: handloom design generation toolkit", "loomgen"};
    app.require_subcommand(1);
    app.fallthrough();
    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "seed for every randomized step (default 0)");
    const auto seed_or_zero = [&] { return seed.value_or(0); };

    std::function<void()> action;

    // dataset build
    auto* dataset_cmd = app.add_subcommand("dataset", "patch dataset tools")->require_subcommand(1);
    auto* build = dataset_cmd->add_subcommand("build", "cut patches from source folders");
    std::vector<std::string> regional_dirs, generic_dirs, augment_names;
    std::string dataset_out;
    dataset::BuildConfig build_cfg;
    build->add_option("--regional", regional_dirs, "folder(s) of regional-class images");
    build->add_option("--generic", generic_dirs, "folder(s) of generic-class images");
    build->add_option("--out", dataset_out, "output dataset directory")->required();
    build->add_option("--patch-size", build_cfg.patch_size, "square patch side (default 256)");
    build->add_option("--patches-per-image", build_cfg.patches_per_image, "random crops per image (default 5)");
    build->add_option("--augment", augment_names, "augmentation kind, repeatable, or 'all'");
    build->add_option("--brightness-range", build_cfg.brightness_range, "brightness jitter half-width (default 0.2)");
    build->add_option("--contrast-range", build_cfg.contrast_range, "contrast jitter half-width (default 0.2)");
    build->callback([&] {
        action = [&] {
            if (regional_dirs.empty() && generic_dirs.empty())
                throw CLI::ValidationError("--regional/--generic", "at least one source folder is required");
            build_cfg.seed = seed_or_zero();
            for (const auto& n : augment_names) {
                if (n == "all") {
                    build_cfg.augmentations.assign(dataset::kAllAugmentations.begin(), dataset::kAllAugmentations.end());
                } else {
                    build_cfg.augmentations.push_back(dataset::parse_augmentation(n));
                }
            }
            std::vector<dataset::SourceImage> sources;
            const auto ingest = [&](const std::vector<std::string>& dirs, dataset::ClassLabel label) {
                for (const auto& d : dirs)
                    for (auto& [id, img] : dataset::ingest_folder(d, label).images)
                        sources.push_back({id, label, std::move(img)});
            };
            ingest(regional_dirs, dataset::ClassLabel::Regional);
            ingest(generic_dirs, dataset::ClassLabel::Generic);
            const auto manifest = dataset::build_dataset(sources, build_cfg, dataset_out);
            out << json{{"patches", manifest.entries.size()}, {"skipped", manifest.skipped.size()},
                        {"out", dataset_out}}
                       .dump()
                << "\n";
        };
    });

    // mask otsu
    auto* mask_cmd = app.add_subcommand("mask", "binary mask tools")->require_subcommand(1);
    auto* otsu = mask_cmd->add_subcommand("otsu", "Otsu-threshold an image into a binary mask");
    std::string otsu_in, otsu_out;
    bool otsu_invert = false;
    otsu->add_option("--input", otsu_in, "input image")->required();
    otsu->add_option("--out", otsu_out, "mask PNG to write")->required();
    otsu->add_flag("--invert", otsu_invert, "mark dark pixels as foreground");
    otsu->callback([&] {
        action = [&] {
            const auto m = masking::otsu_mask(io::read_image(otsu_in), otsu_invert);
            io::write_mask(otsu_out, m.mask);
            out << json{{"threshold", m.threshold}}.dump() << "\n";
        };
    });

    // style train | apply
    auto* style_cmd = app.add_subcommand("style", "feed-forward style models")->require_subcommand(1);
    auto* style_train = style_cmd->add_subcommand("train", "train a style model");
    detail::TrainingFlags style_flags{models::ModelKind::Style, {}, {}, {}};
    style_flags.attach(*style_train);
    auto* style_apply = style_cmd->add_subcommand("apply", "stylize an image");
    std::string apply_model, apply_in, apply_out;
    style_apply->add_option("--model", apply_model, "style model directory")->required();
    style_apply->add_option("--input", apply_in, "input image")->required();
    style_apply->add_option("--out", apply_out, "output PNG")->required();

    const auto train_action = [&](detail::TrainingFlags& flags) {
        return [&] {
            action = [&] {
                const auto req = flags.request(seed);
                training::run(req, flags.out, [&](int step, int total) {
                    if (step == total || step % 50 == 0) err << "step " << step << "/" << total << "\n";
                });
                out << json{{"model_id", req.model_id()}, {"kind", models::to_string(req.kind)}, {"out", flags.out}}
                           .dump()
                    << "\n";
            };
        };
    };
    style_train->callback(train_action(style_flags));
    style_apply->callback([&] {
        action = [&] {
            const auto model = style::load_style_model(apply_model);
            io::write_png(apply_out, style::stylize(io::read_image(apply_in), model));
        };
    });

    // composite
    auto* comp = app.add_subcommand("composite", "two-style composite through a binary mask");
    std::string comp_in, comp_fg, comp_bg, comp_out, comp_mask, comp_mask_out;
    dual_style::CompositeOptions comp_opts;
    comp->add_option("--input", comp_in, "target image")->required();
    comp->add_option("--fg", comp_fg, "foreground style model directory")->required();
    comp->add_option("--bg", comp_bg, "background style model directory")->required();
    comp->add_option("--out", comp_out, "output PNG")->required();
    comp->add_option("--mask", comp_mask, "binary mask PNG overriding Otsu");
    comp->add_option("--mask-out", comp_mask_out, "write the mask used");
    comp->add_flag("--invert", comp_opts.invert, "invert the Otsu mask polarity");
    comp->add_option("--feather", comp_opts.feather_radius, "feather radius in pixels (default 0: hard mask)")
        ->check(CLI::NonNegativeNumber);
    comp->callback([&] {
        action = [&] {
            const auto target = io::read_image(comp_in);
            const auto fg = style::load_style_model(comp_fg);
            const auto bg = comp_bg == comp_fg ? fg : style::load_style_model(comp_bg);
            if (!comp_mask.empty()) comp_opts.mask_override = io::read_mask(comp_mask);
            const auto r = dual_style::composite(target, fg, bg, comp_opts);
            io::write_png(comp_out, r.output);
            if (!comp_mask_out.empty()) io::write_mask(comp_mask_out, r.mask_used);
            json info{{"fg_style_id", r.fg_style_id}, {"bg_style_id", r.bg_style_id}};
            if (r.threshold_used) info["threshold_used"] = *r.threshold_used;
            out << info.dump() << "\n";
        };
    });

    // gan train <kind> | translate | sample
    auto* gan_cmd = app.add_subcommand("gan", "generative models")->require_subcommand(1);
    auto* gan_train = gan_cmd->add_subcommand("train", "train a generative model")->require_subcommand(1);
    std::vector<std::unique_ptr<detail::TrainingFlags>> gan_flags;
    for (auto kind : {models::ModelKind::CycleGan, models::ModelKind::DiscoGan, models::ModelKind::Dcgan,
                      models::ModelKind::Vae}) {
        gan_flags.push_back(std::make_unique<detail::TrainingFlags>(detail::TrainingFlags{kind, {}, {}, {}}));
        auto* sub = gan_train->add_subcommand(models::to_string(kind), std::string("train a ") + models::to_string(kind));
        gan_flags.back()->attach(*sub);
        sub->callback(train_action(*gan_flags.back()));
    }

    auto* translate = gan_cmd->add_subcommand("translate", "translate an image with a cyclegan/discogan model");
    std::string tr_model, tr_in, tr_out, tr_direction = "a2b";
    bool tr_from_mask = false;
    translate->add_option("--model", tr_model, "model directory")->required();
    translate->add_option("--input", tr_in, "input image (or mask with --from-mask)")->required();
    translate->add_option("--out", tr_out, "output PNG")->required();
    translate->add_option("--direction", tr_direction, "a2b or b2a (default a2b)")
        ->check(CLI::IsMember({"a2b", "b2a"}));
    translate->add_flag("--from-mask", tr_from_mask, "read the input as a binary mask (mask-to-design)");
    translate->callback([&] {
        action = [&] {
            const auto model = gan::GanModel<float>::load(tr_model);
            const auto img = tr_from_mask ? gan::mask_to_design(io::read_mask(tr_in), model)
                                          : gan::translate(io::read_image(tr_in), gan::parse_direction(tr_direction), model);
            io::write_png(tr_out, img);
        };
    });

    auto* sample = gan_cmd->add_subcommand("sample", "sample a dcgan/vae model and score diversity");
    std::string sm_model, sm_out;
    int sm_n = 16;
    sample->add_option("--model", sm_model, "model directory")->required();
    sample->add_option("--n", sm_n, "number of samples (default 16)")->check(CLI::PositiveNumber);
    sample->add_option("--out", sm_out, "directory for sample PNGs")->required();
    sample->callback([&] {
        action = [&] {
            const auto m = models::load_model(sm_model);
            std::vector<RasterImage> images;
            double tau = baselines::kDefaultCollapseThreshold;
            if (m.dcgan) {
                images = m.dcgan->sample(sm_n, seed_or_zero());
                tau = m.dcgan->config().collapse_threshold;
            } else if (m.vae) {
                images = m.vae->sample(sm_n, seed_or_zero());
                tau = m.vae->config().collapse_threshold;
            } else {
                fail(ErrorKind::InvalidArgument,
                     std::string("sampling needs a dcgan or vae model, got ") + models::to_string(m.kind));
            }
            fs::create_directories(sm_out);
            for (std::size_t i = 0; i < images.size(); ++i) {
                char name[32];
                std::snprintf(name, sizeof(name), "sample_%04zu.png", i);
                io::write_png(fs::path(sm_out) / name, images[i]);
            }
            json report{{"samples", images.size()}};
            if (images.size() >= 2) {
                const auto d = baselines::diversity_score(images, tau);
                report["mean_pairwise_l2"] = d.mean_pairwise_l2;
                report["collapse_flag"] = d.collapse_flag;
            }
            out << report.dump() << "\n";
        };
    });

    // eval survey | sheet
    auto* eval_cmd = app.add_subcommand("eval", "user study tooling")->require_subcommand(1);
    auto* survey_cmd = eval_cmd->add_subcommand("survey", "tally survey responses");
    std::string sv_responses, sv_out;
    survey_cmd->add_option("--responses", sv_responses, "responses CSV")->required();
    survey_cmd->add_option("--out", sv_out, "report JSON to write");
    survey_cmd->callback([&] {
        action = [&] {
            const auto report = survey::tally(survey::read_responses(sv_responses)).to_json();
            if (!sv_out.empty()) io::write_file_atomic(sv_out, report.dump(2) + "\n");
            out << report.dump() << "\n";
        };
    });
    auto* sheet_cmd = eval_cmd->add_subcommand("sheet", "assemble a blind review sheet");
    std::string sh_real, sh_generated, sh_out;
    int sh_count = 0;
    sheet_cmd->add_option("--real", sh_real, "folder of real patches")->required();
    sheet_cmd->add_option("--generated", sh_generated, "folder of generated patches")->required();
    sheet_cmd->add_option("--count", sh_count, "samples per participant")->required();
    sheet_cmd->add_option("--out", sh_out, "output directory")->required();
    sheet_cmd->callback([&] {
        action = [&] {
            const auto real = fs::is_directory(sh_real) ? detail::image_files(sh_real) : std::vector<fs::path>{};
            const auto gen = fs::is_directory(sh_generated) ? detail::image_files(sh_generated) : std::vector<fs::path>{};
            const auto sheet = survey::make_review_sheet(real, gen, sh_count, seed_or_zero());
            survey::write_review_sheet(sheet, sh_out);
            out << json{{"entries", sheet.entries.size()}, {"out", sh_out}}.dump() << "\n";
        };
    });

    // serve
    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    service::Config svc;
    std::string models_dir = "models";
    serve->add_option("--models", models_dir, "models directory (default models)");
    serve->add_option("--host", svc.host, "listen address (default 127.0.0.1)");
    serve->add_option("--port", svc.port, "listen port (default 8080)");
    serve->add_option("--max-pixels", svc.max_pixels, "upload cap in pixels (default 4000000)")
        ->check(CLI::PositiveNumber);
    serve->add_option("--workers", svc.workers, "concurrent request handlers (default 4)")->check(CLI::PositiveNumber);
    serve->callback([&] {
        action = [&] {
            svc.models_dir = models_dir;
            service::Service s(svc);
            s.load_models_async();
            err << "listening on " << svc.host << ":" << svc.port << "\n";
            if (!s.listen()) fail(ErrorKind::IoError, "cannot listen on " + svc.host + ":" + std::to_string(svc.port));
        };
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (action) action();
        return kExitOk;
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << detail::one_line(e.what()) << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << detail::one_line(e.what()) << "\n";
        return kExitDomainError;
    } catch (const fs::filesystem_error& e) {
        err << "error: IoError: " << detail::one_line(e.what()) << "\n";
        return kExitDomainError;
    } catch (const std::exception& e) {
        err << "error: InternalError: " << detail::one_line(e.what()) << "\n";
        return kExitDomainError;
    }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace loomgen::cli
