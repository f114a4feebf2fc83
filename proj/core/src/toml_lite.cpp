#include "tgrowth/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "tgrowth/error.hpp"

namespace tgrowth::toml {

namespace {

class LineCursor {
 public:
  LineCursor(const std::string& text, int line) : s_(text), line_(line) {}

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end_or_comment() {
    skip_space();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void expect(char c) {
    skip_space();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_); }

  std::string bare_key() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' || s_[pos_] == '-'))
      ++pos_;
    if (pos_ == start) fail("expected a key");
    return s_.substr(start, pos_ - start);
  }

  Value value() {
    skip_space();
    const char c = peek();
    if (c == '"') return string_value();
    if (c == '[') return array_value();
    if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return false;
    }
    return number();
  }

 private:
  std::string string_value() {
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= s_.size()) fail("unterminated escape");
      switch (s_[pos_++]) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        default: fail("unsupported escape sequence");
      }
    }
  }

  std::vector<double> array_value() {
    ++pos_;
    std::vector<double> out;
    skip_space();
    if (peek() == ']') {
      ++pos_;
      return out;
    }
    while (true) {
      const Value v = number();
      out.push_back(std::holds_alternative<double>(v) ? std::get<double>(v)
                                                      : static_cast<double>(std::get<std::int64_t>(v)));
      skip_space();
      if (peek() == ',') {
        ++pos_;
        skip_space();
        if (peek() == ']') {
          ++pos_;
          return out;
        }
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        return out;
      }
      fail("expected ',' or ']' in array");
    }
  }

  Value number() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                s_[pos_] == '+' || s_[pos_] == '-' || s_[pos_] == '_'))
      ++pos_;
    std::string token = s_.substr(start, pos_ - start);
    if (token.empty()) fail("expected a value");
    std::erase(token, '_');
    const bool is_float = token.find_first_of(".eE") != std::string::npos || token == "inf" || token == "nan" ||
                          token == "+inf" || token == "-inf";
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (*first == '+') ++first;
    if (is_float) {
      double d = 0.0;
      const auto [ptr, ec] = std::from_chars(first, last, d);
      if (ec != std::errc() || ptr != last) fail("invalid number '" + token + "'");
      return d;
    }
    std::int64_t i = 0;
    const auto [ptr, ec] = std::from_chars(first, last, i);
    if (ec != std::errc() || ptr != last) fail("invalid value '" + token + "'");
    return i;
  }

  const std::string& s_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace

Document parse(const std::string& text) {
  Document doc;
  doc[""];
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    LineCursor cur(raw, line);
    if (cur.at_end_or_comment()) continue;
    if (cur.peek() == '[') {
      cur.expect('[');
      section = cur.bare_key();
      cur.expect(']');
      if (!cur.at_end_or_comment()) cur.fail("trailing characters after section header");
      if (doc.count(section) && section != "") cur.fail("duplicate section [" + section + "]");
      doc[section];
      continue;
    }
    const std::string key = cur.bare_key();
    cur.expect('=');
    Value v = cur.value();
    if (!cur.at_end_or_comment()) cur.fail("trailing characters after value");
    auto& table = doc[section];
    if (table.count(key)) cur.fail("duplicate key '" + key + "'");
    table.emplace(key, Entry{std::move(v), line});
  }
  return doc;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace tgrowth::toml
