#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "loomgen/error.hpp"
#include "loomgen/image_io.hpp"
#include "loomgen/rng.hpp"
#include "loomgen/style.hpp"
#include "loomgen/util.hpp"

namespace loomgen::survey {

namespace fs = std::filesystem;

enum class SampleType { Real, Generated };
enum class Label { Real, Generated, NotSure };
enum class Rating { Good, Bad, Maybe };

inline constexpr std::array<SampleType, 2> kSampleTypes{SampleType::Real, SampleType::Generated};
inline constexpr std::array<Label, 3> kLabels{Label::Real, Label::Generated, Label::NotSure};
inline constexpr std::array<Rating, 3> kRatings{Rating::Good, Rating::Bad, Rating::Maybe};

constexpr const char* to_string(SampleType t) { return t == SampleType::Real ? "real" : "generated"; }
constexpr const char* to_string(Label l) {
    switch (l) {
        case Label::Real: return "Real";
        case Label::Generated: return "Generated";
        case Label::NotSure: return "NotSure";
    }
    return "";
}
constexpr const char* to_string(Rating r) {
    switch (r) {
        case Rating::Good: return "Good";
        case Rating::Bad: return "Bad";
        case Rating::Maybe: return "Maybe";
    }
    return "";
}

/// Exact, case-sensitive match against the enumeration's string forms.
template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::array<E, N>& values, const char* what) {
    for (E v : values)
        if (s == to_string(v)) return v;
    fail(ErrorKind::InvalidEnum, std::string("invalid ") + what + " '" + s + "'");
}

inline SampleType parse_sample_type(const std::string& s) { return parse_enum(s, kSampleTypes, "true_type"); }
inline Label parse_label(const std::string& s) { return parse_enum(s, kLabels, "label"); }
inline Rating parse_rating(const std::string& s) { return parse_enum(s, kRatings, "rating"); }

// ---------------------------------------------------------------------------
// Review sheets

struct SheetEntry {
    std::string sample_id;
    fs::path source;
    SampleType true_type = SampleType::Real;
};

struct ReviewSheet {
    std::uint64_t seed = 0;
    std::vector<SheetEntry> entries;
};

/// Draws `per_participant_count` patches without replacement from the union
/// of both pools in a seeded random order. Sample ids are assigned after
/// shuffling so they carry no information about the source pool.
inline ReviewSheet make_review_sheet(const std::vector<fs::path>& real, const std::vector<fs::path>& generated,
                                     int per_participant_count, std::uint64_t seed) {
    if (real.empty()) fail(ErrorKind::EmptyPool, "real pool is empty");
    if (generated.empty()) fail(ErrorKind::EmptyPool, "generated pool is empty");
    const std::size_t pool = real.size() + generated.size();
    if (per_participant_count < 1 || static_cast<std::size_t>(per_participant_count) > pool)
        fail(ErrorKind::InvalidArgument,
             "per_participant_count must be in [1, " + std::to_string(pool) + "], got " +
                 std::to_string(per_participant_count));
    std::vector<SheetEntry> all;
    for (const auto& p : real) all.push_back({"", p, SampleType::Real});
    for (const auto& p : generated) all.push_back({"", p, SampleType::Generated});
    Rng rng(seed);
    rng.shuffle(all.begin(), all.end());
    all.resize(static_cast<std::size_t>(per_participant_count));
    const int width = static_cast<int>(std::to_string(all.size()).size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        std::string n = std::to_string(i + 1);
        all[i].sample_id = "s" + std::string(width - n.size(), '0') + n;
    }
    return {seed, std::move(all)};
}

/// Writes the participant-facing `sheet.jsonl` with images copied to
/// `images/<sample_id><ext>`, and the answer key to `key.jsonl`.
inline void write_review_sheet(const ReviewSheet& sheet, const fs::path& out_dir) {
    fs::create_directories(out_dir / "images");
    std::string sheet_lines, key_lines;
    for (const auto& e : sheet.entries) {
        const std::string image = "images/" + e.sample_id + e.source.extension().string();
        std::error_code ec;
        fs::copy_file(e.source, out_dir / image, fs::copy_options::overwrite_existing, ec);
        if (ec) fail(ErrorKind::IoError, "cannot copy " + e.source.string() + ": " + ec.message());
        sheet_lines += ordered_json{{"sample_id", e.sample_id}, {"image", image}}.dump() + "\n";
        key_lines += ordered_json{{"sample_id", e.sample_id},
                                  {"true_type", to_string(e.true_type)},
                                  {"source", e.source.string()}}
                         .dump() +
                     "\n";
    }
    io::write_file_atomic(out_dir / "sheet.jsonl", sheet_lines);
    io::write_file_atomic(out_dir / "key.jsonl", key_lines);
}

// ---------------------------------------------------------------------------
// Responses and tallies

struct SurveyResponse {
    std::string participant_id;
    std::string sample_id;
    SampleType true_type = SampleType::Real;
    Label label = Label::NotSure;
    Rating rating = Rating::Maybe;
    std::string demographic;  // optional; empty when not declared
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    if (quoted) fail(ErrorKind::InvalidArgument, "unterminated quote in CSV line");
    return out;
}

inline constexpr std::array<const char*, 5> kCsvColumns{"participant_id", "sample_id", "true_type", "label", "rating"};

/// CSV with header `participant_id,sample_id,true_type,label,rating` and an
/// optional sixth column `demographic`.
inline std::vector<SurveyResponse> parse_responses(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<SurveyResponse> out;
    bool header = true, with_demographic = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (header) {
            bool ok = cells.size() == 5 || (cells.size() == 6 && cells[5] == "demographic");
            for (std::size_t i = 0; ok && i < kCsvColumns.size(); ++i) ok = cells[i] == kCsvColumns[i];
            if (!ok) fail(ErrorKind::InvalidArgument, "unexpected CSV header: " + line);
            with_demographic = cells.size() == 6;
            header = false;
            continue;
        }
        if (cells.size() != (with_demographic ? 6u : 5u))
            fail(ErrorKind::InvalidArgument, "line " + std::to_string(line_no) + ": wrong number of columns");
        out.push_back({cells[0], cells[1], parse_sample_type(cells[2]), parse_label(cells[3]), parse_rating(cells[4]),
                       with_demographic ? cells[5] : std::string()});
    }
    return out;
}

inline std::vector<SurveyResponse> read_responses(const fs::path& path) { return parse_responses(io::read_file(path)); }

/// 100 * count / total rounded half-up to one decimal, computed exactly in
/// integers and returned in tenths of a percent.
constexpr std::int64_t percent_tenths(std::int64_t count, std::int64_t total) {
    return (2000 * count + total) / (2 * total);
}

struct Breakdown {
    std::int64_t total = 0;
    std::map<std::string, std::int64_t> counts;        // category -> count
    std::map<std::string, std::int64_t> percent_tenths;  // category -> rounded percentage * 10

    double percent(const std::string& category) const { return percent_tenths.at(category) / 10.0; }
};

struct SurveyReport {
    std::map<std::string, Breakdown> labels;   // keyed by true_type
    std::map<std::string, Breakdown> ratings;  // keyed by true_type
    std::int64_t responses = 0;
    std::int64_t participants = 0;
    std::map<std::string, std::int64_t> participants_by_demographic;

    json to_json() const {
        auto group = [](const std::map<std::string, Breakdown>& m) {
            json j = json::object();
            for (const auto& [type, b] : m) {
                json pct = json::object();
                for (const auto& [cat, t] : b.percent_tenths) pct[cat] = t / 10.0;
                j[type] = {{"total", b.total}, {"counts", b.counts}, {"percent", pct}};
            }
            return j;
        };
        return {{"responses", responses},
                {"participants", {{"total", participants}, {"by_demographic", participants_by_demographic}}},
                {"labels", group(labels)},
                {"ratings", group(ratings)}};
    }
};

inline SurveyReport tally(const std::vector<SurveyResponse>& responses) {
    if (responses.empty()) fail(ErrorKind::EmptyResponses, "no survey responses");
    SurveyReport report;
    std::set<std::pair<std::string, std::string>> seen;
    std::map<std::string, std::string> demographic;
    for (const auto& r : responses) {
        if (!seen.emplace(r.participant_id, r.sample_id).second)
            fail(ErrorKind::InvalidArgument,
                 "duplicate response for participant '" + r.participant_id + "', sample '" + r.sample_id + "'");
        auto [it, inserted] = demographic.emplace(r.participant_id, r.demographic);
        if (!inserted && it->second != r.demographic)
            fail(ErrorKind::InvalidArgument, "participant '" + r.participant_id + "' declares two demographics");
        const std::string type = to_string(r.true_type);
        auto& lb = report.labels[type];
        auto& rb = report.ratings[type];
        if (lb.counts.empty()) {
            for (Label l : kLabels) lb.counts[to_string(l)] = 0;
            for (Rating x : kRatings) rb.counts[to_string(x)] = 0;
        }
        ++lb.total;
        ++rb.total;
        ++lb.counts[to_string(r.label)];
        ++rb.counts[to_string(r.rating)];
    }
    for (auto* group : {&report.labels, &report.ratings})
        for (auto& [type, b] : *group)
            for (const auto& [cat, n] : b.counts) b.percent_tenths[cat] = percent_tenths(n, b.total);
    report.responses = static_cast<std::int64_t>(responses.size());
    report.participants = static_cast<std::int64_t>(demographic.size());
    for (const auto& [p, d] : demographic) ++report.participants_by_demographic[d.empty() ? "unspecified" : d];
    return report;
}

// ---------------------------------------------------------------------------
// Quantitative proxy

/// Sum over the extractor's style layers of ||G_l(image) - G_l(style_ref)||_F.
template <typename T>
double gram_distance(const RasterImage& image, const RasterImage& style_ref,
                     const style::FeatureExtractor<T>& extractor) {
    const auto a = style::style_targets<T>(image, extractor);
    const auto b = style::style_targets<T>(style_ref, extractor);
    double total = 0;
    for (const auto& [layer, ga] : a) {
        const auto& gb = b.at(layer);
        double sq = 0;
        for (std::size_t i = 0; i < ga.size(); ++i) {
            const double d = static_cast<double>(ga[i]) - static_cast<double>(gb[i]);
            sq += d * d;
        }
        total += std::sqrt(sq);
    }
    return total;
}

}  // namespace loomgen::survey
