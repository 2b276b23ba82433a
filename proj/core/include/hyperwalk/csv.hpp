#pragma once

#include <string>
#include <string_view>

namespace hyperwalk {

// RFC 4180 field: quoted only when it contains a comma, quote or line break.
inline std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace hyperwalk
