#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace ecmtk::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Header written at the top of every output file: tool version, command and
/// every resolved config value (one per line, without comment markers).
std::vector<std::string> header_lines(const RunConfig& config, std::string_view command);

// 64-bit FNV-1a of the resolved config, for formats with no room for a header.
std::string config_digest(const RunConfig& config);

// Writes through a temporary stream; FileError names the path on failure.
void write_file(const std::filesystem::path& path,
                const std::function<void(std::ostream&)>& body);

/// Flat report object with the common fields filled in.
nlohmann::ordered_json report(const RunConfig& config, std::string_view command);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

// JSON number, or null when not finite.
nlohmann::ordered_json number_or_null(double v);

}  // namespace ecmtk::cli
