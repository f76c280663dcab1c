#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace tbdyn {

/// A parsed scenario file: a two-level JSON object plus the source line of every key.
///
/// The text format is line oriented:
///   # comment            (also ';'; a '#' after whitespace starts a trailing comment)
///   key = value          (keys before the first section live at the top level)
///   [section]
///   key = value
/// Values are booleans (true/false), numbers, comma separated lists, or strings
/// (optionally in double quotes). JSON files carry the same schema as nested objects.
struct ConfigDocument {
  nlohmann::json root = nlohmann::json::object();
  /// "section.key" (or "key") -> 1-based line; empty for JSON input.
  std::map<std::string, int> lines;
  std::filesystem::path source;

  int line_of(const std::string& field) const;
};

ConfigDocument parse_ini(std::string_view text, const std::filesystem::path& source = {});
ConfigDocument parse_json(std::string_view text, const std::filesystem::path& source = {});

/// Reads a file, choosing JSON for a ".json" extension or a leading '{'.
ConfigDocument load_config(const std::filesystem::path& path);

}  // namespace tbdyn
