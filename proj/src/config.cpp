#include "rowtracker/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "rowtracker/error.hpp"

namespace rowtracker {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValues KeyValues::parse(std::istream& in, const std::string& source) {
  KeyValues kv;
  kv.source_ = source;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidConfig,
                  fmt::format("{}:{}: expected 'key = value'", source, line_no));
    }
    std::string key = trim(t.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::InvalidConfig, fmt::format("{}:{}: empty key", source, line_no));
    }
    if (!kv.values_.emplace(key, trim(t.substr(eq + 1))).second) {
      throw Error(ErrorCode::InvalidConfig,
                  fmt::format("{}:{}: duplicate key '{}'", source, line_no, key));
    }
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::MissingFile, fmt::format("cannot open {}", path.string()));
  }
  return parse(in, path.string());
}

const std::string& KeyValues::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("{}: missing key '{}'", source_, key));
  }
  return it->second;
}

double KeyValues::number(const std::string& key) const {
  const auto values = numbers(key);
  if (values.size() != 1) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("{}: '{}' must be a single number", source_, key));
  }
  return values.front();
}

int KeyValues::integer(const std::string& key) const {
  const std::string& s = text(key);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("{}: '{}' is not an integer: '{}'", source_, key, s));
  }
  return value;
}

std::vector<double> KeyValues::numbers(const std::string& key) const {
  std::istringstream ss(text(key));
  std::vector<double> out;
  std::string token;
  while (ss >> token) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw Error(ErrorCode::InvalidConfig,
                  fmt::format("{}: '{}' has a non-numeric value '{}'", source_, key, token));
    }
    out.push_back(value);
  }
  return out;
}

std::string format_exact(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace rowtracker
