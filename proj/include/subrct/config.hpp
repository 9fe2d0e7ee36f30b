#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace subrct {

// Flat key = value run configuration. '#' starts a comment, blank lines are
// skipped, duplicate keys are rejected. Every key must be consumed by a
// getter before require_consumed(), so misspelled keys fail loudly.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_string(const std::string& text);
  static KeyValueConfig parse_file(const std::string& path);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback);
  std::string require_string(const std::string& key);
  double get_real(const std::string& key, double fallback);
  long get_int(const std::string& key, long fallback);
  unsigned long long get_uint64(const std::string& key, unsigned long long fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback);

  // Keys like "rate.<block label>" -> value, for per-block settings.
  std::map<std::string, double> get_real_group(const std::string& prefix);

  void require_consumed() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

}  // namespace subrct
