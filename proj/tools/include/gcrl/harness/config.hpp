#pragma once

// Flat "key = value" run configuration with [sections].
//
//   # comment                 (also ';')
//   [train]
//   epochs = 200              -> key "train.epochs"
//   critic_hidden = 64, 64
//
// Keys outside the registry are rejected. Values are validated against their
// declared type when set, so a loaded RunConfig is always well-typed.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gcrl::harness {

enum class ValueType { integer, real, boolean, text, int_list };

struct KeySpec {
  std::string name;
  ValueType type;
  std::string default_value;
  std::string help;
};

/// Every recognised key, sorted by name.
const std::vector<KeySpec>& key_registry();
const KeySpec* find_key(std::string_view name);

class RunConfig {
 public:
  /// All keys at their defaults.
  RunConfig();

  static RunConfig parse(std::istream& in, const std::string& origin = "<config>");
  static RunConfig load(const std::string& path);

  /// Throws ParseError for unknown keys or badly typed values.
  void set(const std::string& key, const std::string& value);
  /// "key=value" form used by --set.
  void apply_override(const std::string& assignment);

  bool explicitly_set(const std::string& key) const;
  const std::string& raw(const std::string& key) const;
  long long integer(const std::string& key) const;
  double real(const std::string& key) const;
  bool boolean(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  std::vector<int> int_list(const std::string& key) const;

  /// Canonical text: one section block per prefix, keys sorted.
  std::string resolved_text() const;
  /// FNV-1a 64 of the canonical text without run.out_dir and run.jobs, as 16
  /// hex digits. Those two never change results.
  std::string hash() const;

 private:
  std::string canonical_text(bool with_runtime_keys) const;

  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
};

std::uint64_t fnv1a64(std::string_view data);

}  // namespace gcrl::harness
