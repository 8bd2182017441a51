#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace smcf::cli {

// Anything wrong with a config file or its values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One parsed TOML value. Numbers keep their cleaned token so integer
// targets of either signedness can re-read them with full range checks.
struct TomlValue {
  enum class Kind { integer, floating, boolean, string, array };
  Kind kind = Kind::string;
  std::string token;             // scalar payload
  std::vector<TomlValue> items;  // array payload
  int line = 0;

  std::int64_t as_int() const;
  std::uint64_t as_uint() const;
  double as_double() const;
  bool as_bool() const;
  const std::string& as_string() const;
  const std::vector<TomlValue>& as_array() const;
};

using TomlSection = std::map<std::string, TomlValue>;
using TomlTable = std::map<std::string, TomlSection>;

// Strict parser for the TOML subset the config format uses: [section]
// headers, bare keys, integers, floats, booleans, basic strings and flat
// arrays. Duplicate keys or sections, keys outside a section, and any
// syntax this subset does not cover are errors.
TomlTable parse_toml(std::string_view text);

}  // namespace smcf::cli
