#include "toml_lite.hpp"

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdlib>

namespace smcf::cli {

namespace {

[[noreturn]] void fail(int line, const std::string& message) {
  throw ConfigError("config line " + std::to_string(line) + ": " + message);
}

bool bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

// Removes a trailing comment, respecting basic strings.
std::string_view strip_comment(std::string_view s, int line) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '#') {
      return s.substr(0, i);
    }
  }
  if (in_string) fail(line, "unterminated string");
  return s;
}

std::string parse_basic_string(std::string_view s, int line,
                               std::size_t& pos) {
  std::string out;
  ++pos;  // opening quote
  while (pos < s.size()) {
    const char c = s[pos];
    if (c == '"') {
      ++pos;
      return out;
    }
    if (c == '\\') {
      ++pos;
      if (pos >= s.size()) fail(line, "dangling escape");
      switch (s[pos]) {
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        default: fail(line, "unsupported escape sequence");
      }
      ++pos;
    } else {
      out.push_back(c);
      ++pos;
    }
  }
  fail(line, "unterminated string");
}

bool integer_token(std::string_view t) {
  std::size_t i = (t[0] == '+' || t[0] == '-') ? 1 : 0;
  if (i == t.size()) return false;
  for (; i < t.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(t[i]))) return false;
  return true;
}

bool float_token(std::string_view t) {
  errno = 0;
  char* end = nullptr;
  const std::string copy(t);
  std::strtod(copy.c_str(), &end);
  return end == copy.c_str() + copy.size() && !copy.empty() && errno != ERANGE;
}

TomlValue parse_value(std::string_view s, int line, std::size_t& pos);

TomlValue parse_array(std::string_view s, int line, std::size_t& pos) {
  TomlValue v;
  v.kind = TomlValue::Kind::array;
  v.line = line;
  ++pos;  // opening bracket
  bool expect_value = true;
  while (pos < s.size()) {
    while (pos < s.size() &&
           std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
    if (pos >= s.size()) break;
    if (s[pos] == ']') {
      ++pos;
      return v;
    }
    if (s[pos] == ',') {
      if (expect_value) fail(line, "misplaced comma in array");
      expect_value = true;
      ++pos;
      continue;
    }
    if (!expect_value) fail(line, "missing comma in array");
    v.items.push_back(parse_value(s, line, pos));
    expect_value = false;
  }
  fail(line, "unterminated array");
}

TomlValue parse_value(std::string_view s, int line, std::size_t& pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
    ++pos;
  if (pos >= s.size()) fail(line, "missing value");
  TomlValue v;
  v.line = line;
  const char c = s[pos];
  if (c == '"') {
    v.kind = TomlValue::Kind::string;
    v.token = parse_basic_string(s, line, pos);
    return v;
  }
  if (c == '[') return parse_array(s, line, pos);
  std::size_t end = pos;
  while (end < s.size() && s[end] != ',' && s[end] != ']' &&
         !std::isspace(static_cast<unsigned char>(s[end])))
    ++end;
  std::string token(trim(s.substr(pos, end - pos)));
  pos = end;
  if (token == "true" || token == "false") {
    v.kind = TomlValue::Kind::boolean;
    v.token = token;
    return v;
  }
  // TOML allows underscores between digits; strip them before classifying.
  std::string cleaned;
  cleaned.reserve(token.size());
  for (std::size_t i = 0; i < token.size(); ++i) {
    if (token[i] == '_') {
      const bool digit_before =
          i > 0 && std::isdigit(static_cast<unsigned char>(token[i - 1]));
      const bool digit_after =
          i + 1 < token.size() &&
          std::isdigit(static_cast<unsigned char>(token[i + 1]));
      if (!digit_before || !digit_after)
        fail(line, "misplaced underscore in number");
      continue;
    }
    cleaned.push_back(token[i]);
  }
  if (integer_token(cleaned)) {
    v.kind = TomlValue::Kind::integer;
    v.token = cleaned;
    return v;
  }
  if (float_token(cleaned)) {
    v.kind = TomlValue::Kind::floating;
    v.token = cleaned;
    return v;
  }
  fail(line, "cannot parse value '" + token + "'");
}

}  // namespace

std::int64_t TomlValue::as_int() const {
  if (kind != Kind::integer)
    fail(line, "expected an integer");
  std::int64_t out = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), out);
  if (ec != std::errc() || ptr != token.data() + token.size())
    fail(line, "integer out of range");
  return out;
}

std::uint64_t TomlValue::as_uint() const {
  if (kind != Kind::integer)
    fail(line, "expected an integer");
  std::string_view t = token;
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  if (!t.empty() && t.front() == '-')
    fail(line, "expected a nonnegative integer");
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || ptr != t.data() + t.size())
    fail(line, "integer out of range");
  return out;
}

double TomlValue::as_double() const {
  if (kind != Kind::integer && kind != Kind::floating)
    fail(line, "expected a number");
  return std::strtod(token.c_str(), nullptr);
}

bool TomlValue::as_bool() const {
  if (kind != Kind::boolean) fail(line, "expected true or false");
  return token == "true";
}

const std::string& TomlValue::as_string() const {
  if (kind != Kind::string) fail(line, "expected a string");
  return token;
}

const std::vector<TomlValue>& TomlValue::as_array() const {
  if (kind != Kind::array) fail(line, "expected an array");
  return items;
}

TomlTable parse_toml(std::string_view text) {
  TomlTable table;
  std::string current;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string_view raw =
        text.substr(start, nl == std::string_view::npos ? nl : nl - start);
    start = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const std::string_view body = trim(strip_comment(raw, line_no));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']')
        fail(line_no, "malformed section header");
      const std::string_view name = trim(body.substr(1, body.size() - 2));
      if (name.empty()) fail(line_no, "empty section name");
      for (char c : name)
        if (!bare_key_char(c)) fail(line_no, "invalid section name");
      if (table.count(std::string(name)))
        fail(line_no, "duplicate section [" + std::string(name) + "]");
      current = std::string(name);
      table[current];
      continue;
    }
    const std::size_t eq = [&] {
      bool in_string = false;
      for (std::size_t i = 0; i < body.size(); ++i) {
        if (in_string) {
          if (body[i] == '\\') ++i;
          else if (body[i] == '"') in_string = false;
        } else if (body[i] == '"') {
          in_string = true;
        } else if (body[i] == '=') {
          return i;
        }
      }
      return std::string_view::npos;
    }();
    if (eq == std::string_view::npos)
      fail(line_no, "expected key = value");
    const std::string_view key = trim(body.substr(0, eq));
    if (key.empty()) fail(line_no, "empty key");
    for (char c : key)
      if (!bare_key_char(c)) fail(line_no, "invalid key '" + std::string(key) + "'");
    if (current.empty()) fail(line_no, "key outside any [section]");
    TomlSection& section = table[current];
    if (section.count(std::string(key)))
      fail(line_no, "duplicate key '" + std::string(key) + "'");
    std::size_t pos = eq + 1;
    const TomlValue value = parse_value(body, line_no, pos);
    while (pos < body.size() &&
           std::isspace(static_cast<unsigned char>(body[pos])))
      ++pos;
    if (pos != body.size())
      fail(line_no, "trailing characters after value");
    section.emplace(std::string(key), value);
  }
  return table;
}

}  // namespace smcf::cli
