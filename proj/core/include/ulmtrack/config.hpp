#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ulmtrack {

/// Minimal TOML-style key/value document: `[section]` headers, `key = value`
/// lines, `#` comments, quoted strings, and flat `[a, b, c]` arrays. Keys are
/// addressed as "section.key"; keys before any header live in the root.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<long long> get_int(const std::string& key) const;
  std::optional<std::vector<std::string>> get_list(const std::string& key) const;
  std::optional<std::vector<double>> get_double_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;  // raw, unquoted text
};

}  // namespace ulmtrack
