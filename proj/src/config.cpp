#include "tbdyn/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tbdyn/error.hpp"

namespace tbdyn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing comment that starts with whitespace followed by '#' or ';' outside quotes.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (quoted) continue;
    if ((s[i] == '#' || s[i] == ';') && (i == 0 || std::isspace(static_cast<unsigned char>(s[i - 1])))) {
      return s.substr(0, i);
    }
  }
  return s;
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

nlohmann::json scalar(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    return std::string(s.substr(1, s.size() - 2));
  }
  if (s == "true") return true;
  if (s == "false") return false;
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) return x;
  return std::string(s);
}

nlohmann::json value(std::string_view s) {
  s = trim(s);
  bool quoted = s.size() >= 2 && s.front() == '"' && s.back() == '"';
  if (!quoted && s.find(',') != std::string_view::npos) {
    auto list = nlohmann::json::array();
    std::size_t start = 0;
    while (true) {
      const auto comma = s.find(',', start);
      const auto item = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
      if (!item.empty()) list.push_back(scalar(item));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return list;
  }
  return scalar(s);
}

std::string location(const std::filesystem::path& source, int line) {
  return source.empty() ? fmt::format("line {}", line) : fmt::format("{}:{}", source.string(), line);
}

}  // namespace

int ConfigDocument::line_of(const std::string& field) const {
  const auto it = lines.find(field);
  return it == lines.end() ? 0 : it->second;
}

ConfigDocument parse_ini(std::string_view text, const std::filesystem::path& source) {
  ConfigDocument doc;
  doc.source = source;
  std::string section;
  std::map<std::string, int> section_lines;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const auto raw = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    const auto line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(fmt::format("{}: unterminated section header", location(source, line_no)),
                          {}, line_no);
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!valid_name(section)) {
        throw ConfigError(fmt::format("{}: bad section name '{}'", location(source, line_no), section),
                          section, line_no);
      }
      if (section_lines.count(section)) {
        throw ConfigError(fmt::format("{}: section [{}] repeats the one on line {}",
                                      location(source, line_no), section, section_lines[section]),
                          section, line_no);
      }
      section_lines[section] = line_no;
      doc.root[section] = nlohmann::json::object();
      doc.lines[section] = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}: expected 'key = value'", location(source, line_no)), {},
                        line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string field = section.empty() ? key : section + "." + key;
    if (!valid_name(key)) {
      throw ConfigError(fmt::format("{}: bad key '{}'", location(source, line_no), key), field,
                        line_no);
    }
    if (doc.lines.count(field)) {
      throw ConfigError(fmt::format("{}: '{}' already set on line {}", location(source, line_no),
                                    field, doc.lines[field]),
                        field, line_no);
    }
    auto& target = section.empty() ? doc.root : doc.root[section];
    if (section.empty() && doc.root.contains(key)) {
      throw ConfigError(fmt::format("{}: '{}' clashes with a section name", location(source, line_no),
                                    key),
                        field, line_no);
    }
    target[key] = value(line.substr(eq + 1));
    doc.lines[field] = line_no;
  }
  return doc;
}

ConfigDocument parse_json(std::string_view text, const std::filesystem::path& source) {
  ConfigDocument doc;
  doc.source = source;
  try {
    doc.root = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", source.empty() ? "json" : source.string(), e.what()));
  }
  if (!doc.root.is_object()) throw ConfigError("scenario JSON must be an object");
  return doc;
}

ConfigDocument load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open scenario file {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (path.extension() == ".json" || (first != std::string::npos && text[first] == '{')) {
    return parse_json(text, path);
  }
  return parse_ini(text, path);
}

}  // namespace tbdyn
