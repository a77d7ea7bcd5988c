#pragma once

#include <array>
#include <string_view>
#include <utility>

namespace magnetodisk {

inline constexpr std::string_view kVersion = "1.0.0";

/// Per-module versions, recorded in the metadata of every output file.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 7> kModuleVersions{{
    {"grid", "1.0.0"},
    {"operators", "1.0.0"},
    {"eigen", "1.0.0"},
    {"solver", "1.0.0"},
    {"bifurcation", "1.0.0"},
    {"fields", "1.0.0"},
    {"cli", "1.0.0"},
}};

} // namespace magnetodisk
