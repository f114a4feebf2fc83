#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace tgrowth::toml {

/// The subset of TOML used by run and sweep configs: `[section]` headers,
/// `key = value` lines, `#` comments, and values that are booleans,
/// integers, floats, basic strings or flat arrays of numbers.
using Value = std::variant<bool, std::int64_t, double, std::string, std::vector<double>>;

struct Entry {
  Value value;
  int line = 0;
};

/// Section name -> key -> entry. Keys before the first header live in "".
using Document = std::map<std::string, std::map<std::string, Entry>>;

/// Throws ParseError with the offending line number.
Document parse(const std::string& text);

/// Shortest decimal text that reads back to the same double, always
/// spelled as a TOML float ("10.0", "1e-05").
std::string format_double(double v);

}  // namespace tgrowth::toml
