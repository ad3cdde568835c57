#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rowtracker {

/// Parsed "key = value" file. Blank lines and lines starting with '#' are
/// ignored; keys are unique.
class KeyValues {
 public:
  static KeyValues parse(std::istream& in, const std::string& source);
  static KeyValues load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& text(const std::string& key) const;
  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;

  std::optional<double> number_or(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
};

/// Shortest decimal form that parses back to the same double.
std::string format_exact(double value);

}  // namespace rowtracker
