#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loomgen {

/// Domain error categories. The string form of each kind is part of the CLI
/// and service contracts (it is printed verbatim on failure).
enum class ErrorKind {
    InvalidArgument,
    EmptyFolder,
    DecodeError,
    ImageTooSmall,
    DegenerateHistogram,
    LayerMismatch,
    NonFiniteLoss,
    EmptyCorpus,
    ModelLoadError,
    DimensionMismatch,
    EmptyDomain,
    NonBinaryInput,
    TooFewSamples,
    EmptyPool,
    EmptyResponses,
    InvalidEnum,
    IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::EmptyFolder: return "EmptyFolder";
        case ErrorKind::DecodeError: return "DecodeError";
        case ErrorKind::ImageTooSmall: return "ImageTooSmall";
        case ErrorKind::DegenerateHistogram: return "DegenerateHistogram";
        case ErrorKind::LayerMismatch: return "LayerMismatch";
        case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorKind::EmptyCorpus: return "EmptyCorpus";
        case ErrorKind::ModelLoadError: return "ModelLoadError";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EmptyDomain: return "EmptyDomain";
        case ErrorKind::NonBinaryInput: return "NonBinaryInput";
        case ErrorKind::TooFewSamples: return "TooFewSamples";
        case ErrorKind::EmptyPool: return "EmptyPool";
        case ErrorKind::EmptyResponses: return "EmptyResponses";
        case ErrorKind::InvalidEnum: return "InvalidEnum";
        case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return to_string(kind_); }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& detail) {
    throw Error(kind, detail);
}

}  // namespace loomgen
