#pragma once

#include <filesystem>
#include <string>

#include "loomgen/error.hpp"
#include "loomgen/image_io.hpp"
#include "loomgen/util.hpp"

namespace loomgen::checkpoint {

namespace fs = std::filesystem;

template <typename T>
constexpr const char* dtype_name() {
    static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
    return std::is_same_v<T, float> ? "float32" : "float64";
}

/// Parsed `meta.json` of a checkpoint directory.
inline json read_meta(const fs::path& dir) {
    try {
        return json::parse(io::read_file(dir / "meta.json"));
    } catch (const json::exception& e) {
        fail(ErrorKind::ModelLoadError, (dir / "meta.json").string() + ": " + e.what());
    } catch (const Error& e) {
        fail(ErrorKind::ModelLoadError, e.what());
    }
}

inline void write_meta(const fs::path& dir, const ordered_json& meta) {
    io::write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
}

/// Checks `kind` is one of `accepted` and version is 1; returns the kind.
inline std::string expect_kind(const json& meta, std::initializer_list<const char*> accepted) {
    const std::string kind = meta.value("kind", "");
    bool ok = false;
    for (const char* a : accepted) ok |= kind == a;
    if (!ok) fail(ErrorKind::ModelLoadError, "unexpected checkpoint kind '" + kind + "'");
    if (meta.value("version", 0) != 1) fail(ErrorKind::ModelLoadError, "unsupported checkpoint version");
    return kind;
}

}  // namespace loomgen::checkpoint
