#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rlr/pipeline.hpp"

namespace rlr {

/// Flat `key = value` text. `#` starts a comment; keys may repeat.
class ConfigFile {
 public:
  struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
  };

  static ConfigFile parse(std::istream& in, const std::string& source = "<config>");
  static ConfigFile load(const std::filesystem::path& path);

  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& source() const { return source_; }

  /// Last value given for `key`.
  std::optional<std::string> get(std::string_view key) const;
  std::vector<std::string> all(std::string_view key) const;
  bool has(std::string_view key) const { return get(key).has_value(); }

  /// Throws ValidationError naming file and line for the first key that is
  /// neither listed nor under one of `prefixes`.
  void checkKeys(const std::set<std::string, std::less<>>& known,
                 const std::vector<std::string>& prefixes = {}) const;

  /// "file:line" of the last occurrence of `key`.
  std::string where(std::string_view key) const;

 private:
  std::string source_;
  std::vector<Entry> entries_;
};

/// Keys understood by applyPipelineConfig.
const std::set<std::string, std::less<>>& pipelineConfigKeys();

/// Overwrites fields of `cfg` for every pipeline key present.
void applyPipelineConfig(const ConfigFile& file, PipelineConfig& cfg);

int parseInt(std::string_view text, const std::string& what);
double parseDouble(std::string_view text, const std::string& what);
bool parseBool(std::string_view text, const std::string& what);
std::vector<int> parseIntList(std::string_view text, const std::string& what);
std::vector<double> parseDoubleList(std::string_view text, const std::string& what);
std::uint64_t parseSeed(std::string_view text, const std::string& what);

}  // namespace rlr
