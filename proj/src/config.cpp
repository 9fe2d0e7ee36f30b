#include "subrct/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "subrct/errors.hpp"

namespace subrct {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  KeyValueConfig config;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (!config.values_.emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": duplicate key '" + key + "'");
  }
  return config;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) {
  consumed_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string KeyValueConfig::require_string(const std::string& key) {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end() || it->second.empty())
    throw ConfigError("missing required config key '" + key + "'");
  return it->second;
}

double KeyValueConfig::get_real(const std::string& key, double fallback) {
  const std::string raw = get_string(key, "");
  if (raw.empty()) return fallback;
  try {
    size_t used = 0;
    const double value = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument(raw);
    return value;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + raw + "' is not a number");
  }
}

long KeyValueConfig::get_int(const std::string& key, long fallback) {
  const std::string raw = get_string(key, "");
  if (raw.empty()) return fallback;
  long value = 0;
  const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
  if (ec != std::errc() || ptr != raw.data() + raw.size())
    throw ConfigError("config key '" + key + "': '" + raw + "' is not an integer");
  return value;
}

unsigned long long KeyValueConfig::get_uint64(const std::string& key,
                                              unsigned long long fallback) {
  const std::string raw = get_string(key, "");
  if (raw.empty()) return fallback;
  unsigned long long value = 0;
  const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
  if (ec != std::errc() || ptr != raw.data() + raw.size())
    throw ConfigError("config key '" + key + "': '" + raw +
                      "' is not an unsigned integer");
  return value;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) {
  const std::string raw = get_string(key, "");
  if (raw.empty()) return fallback;
  if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
  if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
  throw ConfigError("config key '" + key + "': '" + raw + "' is not a boolean");
}

std::vector<std::string> KeyValueConfig::get_list(
    const std::string& key, const std::vector<std::string>& fallback) {
  const std::string raw = get_string(key, "");
  if (raw.empty()) return fallback;
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  if (out.empty())
    throw ConfigError("config key '" + key + "': empty list");
  return out;
}

std::map<std::string, double> KeyValueConfig::get_real_group(
    const std::string& prefix) {
  std::map<std::string, double> out;
  const std::string want = prefix + ".";
  for (const auto& [key, value] : values_) {
    if (key.rfind(want, 0) != 0) continue;
    out[key.substr(want.size())] = get_real(key, 0.0);
  }
  return out;
}

void KeyValueConfig::require_consumed() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (consumed_.count(key)) continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += key;
  }
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

}  // namespace subrct
