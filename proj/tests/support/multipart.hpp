#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace loomgen::testing {

struct ParsedPart {
    std::string headers;
    std::string body;
};

/// Splits a multipart/form-data body into parts keyed by their `name`.
inline std::map<std::string, ParsedPart> parse_multipart(const std::string& body, const std::string& content_type) {
    const auto b = content_type.find("boundary=");
    if (b == std::string::npos) throw std::runtime_error("no boundary in " + content_type);
    const std::string delim = "--" + content_type.substr(b + 9);
    std::map<std::string, ParsedPart> parts;
    std::size_t pos = body.find(delim);
    while (pos != std::string::npos) {
        pos += delim.size();
        if (body.compare(pos, 2, "--") == 0) break;
        pos += 2;  // CRLF after the delimiter
        const auto head_end = body.find("\r\n\r\n", pos);
        const auto next = body.find("\r\n" + delim, head_end);
        if (head_end == std::string::npos || next == std::string::npos) throw std::runtime_error("truncated part");
        ParsedPart part{body.substr(pos, head_end - pos), body.substr(head_end + 4, next - head_end - 4)};
        const auto n = part.headers.find("name=\"");
        const auto n_end = part.headers.find('"', n + 6);
        parts[part.headers.substr(n + 6, n_end - n - 6)] = part;
        pos = next + 2;
    }
    return parts;
}

}  // namespace loomgen::testing
