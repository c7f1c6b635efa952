#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace hessiansys {

/// Parses the TOML subset used by run configs: [section] and [a.b] headers,
/// key = value lines, '#' comments, strings, numbers, booleans and
/// (nested, possibly multi-line) arrays. Throws FormatError with a line number.
nlohmann::json parse_toml_subset(const std::string& text);

/// JSON if the first non-blank character is '{', the TOML subset otherwise.
nlohmann::json parse_config_text(const std::string& text);
nlohmann::json load_config(const std::string& path);

/// Rejects unknown sections, unknown keys and mistyped values.
void validate_config(const nlohmann::json& cfg);

/// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& cfg);

}  // namespace hessiansys
