#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace saaf {

/// Flat key-value experiment configuration with dotted section names, e.g.
///
///   # comment
///   seed = 42
///   net.hidden = 16,16
///   train.lr = 0.001
///
/// Values are verbatim strings; the typed getters parse on access. Unknown
/// keys are rejected up front by validate(), so typos fail before any
/// compute runs.
class ExperimentConfig {
 public:
  ExperimentConfig() = default;

  /// Parses a config file. Lines are `key = value`; blank lines and lines
  /// starting with '#' are ignored. Throws UsageError on malformed lines.
  static ExperimentConfig load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_seed() const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key,
                                    const std::vector<std::string>& fallback) const;

  /// Throws UsageError if any present key is not in `allowed`.
  void validate(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace saaf
