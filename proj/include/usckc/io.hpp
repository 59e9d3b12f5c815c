#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

namespace usckc {

using json = nlohmann::json;

/// Whole-file read. Throws AssetLoadError when the file cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

/// Parse a single JSON document from disk. Syntax errors become AssetLoadError.
json load_json_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Shortest round-trip decimal form of a double ("0.05", "1", "0.3333333333333333").
std::string format_number(double value);

}  // namespace usckc
