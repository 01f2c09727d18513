#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rann {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Flat, sectioned, versioned text configuration:
///
///   rannlab-config v1
///   [section]
///   key = value        # comment
///
/// Keys are addressed as "section.key". The schema (known keys, defaults and
/// role comments) is fixed; unknown keys are rejected with line numbers.
class Config {
 public:
  /// Built-in defaults (the schema itself).
  static Config defaults();

  /// Parse a file on top of the defaults. Collects every unknown key and
  /// malformed line into one ConfigError.
  static Config from_file(const std::string& path);

  /// Parse config text (same rules as from_file).
  static Config from_text(const std::string& text, const std::string& origin);

  /// Apply one "section.key=value" override.
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const;
  const std::string& get_raw(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value);

  /// Render the fully-resolved effective config, comments included.
  std::string render() const;

 private:
  struct Entry {
    std::string value;
    std::string comment;
  };
  std::vector<std::string> order_;  // schema order, "section.key"
  std::map<std::string, Entry> entries_;
};

}  // namespace rann
