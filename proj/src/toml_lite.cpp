#include "netdiff/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "netdiff/error.hpp"

namespace netdiff::toml {

namespace {

using nlohmann::json;

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  json run() {
    json root = json::object();
    json* current = &root;
    for (;;) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        current = header(root);
      } else {
        key_value(*current);
      }
      end_of_line();
    }
    return root;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;

  bool eof() const noexcept { return pos_ >= s_.size(); }
  char peek() const noexcept { return eof() ? '\0' : s_[pos_]; }
  char get() {
    const char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::SchemaError, "TOML line " + std::to_string(line_) + ": " + what);
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  // Whitespace, comments and newlines (inside arrays).
  void skip_all() {
    for (;;) {
      skip_ws();
      skip_comment();
      if (peek() == '\n' || peek() == '\r') {
        get();
      } else {
        return;
      }
    }
  }

  void skip_blank_lines() { skip_all(); }

  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    get();
  }

  std::string bare_or_quoted_key() {
    skip_ws();
    if (peek() == '"') return basic_string();
    if (peek() == '\'') return literal_string();
    std::string k;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                      peek() == '-')) {
      k += get();
    }
    if (k.empty()) fail("expected a key");
    return k;
  }

  std::vector<std::string> dotted_key() {
    std::vector<std::string> parts{bare_or_quoted_key()};
    for (;;) {
      skip_ws();
      if (peek() != '.') return parts;
      ++pos_;
      parts.push_back(bare_or_quoted_key());
    }
  }

  json* descend(json& base, const std::vector<std::string>& parts, std::size_t count) {
    json* node = &base;
    for (std::size_t i = 0; i < count; ++i) {
      json& next = (*node)[parts[i]];
      if (next.is_null()) next = json::object();
      if (next.is_array()) {
        if (next.empty() || !next.back().is_object()) fail("key '" + parts[i] + "' is not a table");
        node = &next.back();
      } else if (next.is_object()) {
        node = &next;
      } else {
        fail("key '" + parts[i] + "' is not a table");
      }
    }
    return node;
  }

  json* header(json& root) {
    ++pos_;
    const bool array = peek() == '[';
    if (array) ++pos_;
    const auto parts = dotted_key();
    skip_ws();
    if (peek() != ']') fail("expected ']'");
    ++pos_;
    if (array) {
      if (peek() != ']') fail("expected ']]'");
      ++pos_;
    }
    json* parent = descend(root, parts, parts.size() - 1);
    json& slot = (*parent)[parts.back()];
    if (array) {
      if (slot.is_null()) slot = json::array();
      if (!slot.is_array()) fail("'" + parts.back() + "' is not an array of tables");
      slot.push_back(json::object());
      return &slot.back();
    }
    if (slot.is_null()) slot = json::object();
    if (!slot.is_object()) fail("'" + parts.back() + "' is not a table");
    return &slot;
  }

  void key_value(json& table) {
    const auto parts = dotted_key();
    skip_ws();
    if (peek() != '=') fail("expected '='");
    ++pos_;
    skip_ws();
    json* parent = descend(table, parts, parts.size() - 1);
    if (parent->contains(parts.back())) fail("duplicate key '" + parts.back() + "'");
    (*parent)[parts.back()] = value();
  }

  json value() {
    skip_ws();
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') return array();
    if (c == '{') return inline_table();
    if (s_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return number();
  }

  std::string basic_string() {
    ++pos_;
    std::string out;
    for (;;) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      const char e = get();
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
  }

  std::string literal_string() {
    ++pos_;
    std::string out;
    for (;;) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '\'') return out;
      out += c;
    }
  }

  json array() {
    ++pos_;
    json out = json::array();
    for (;;) {
      skip_all();
      if (peek() == ']') {
        ++pos_;
        return out;
      }
      out.push_back(value());
      skip_all();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  json inline_table() {
    ++pos_;
    json out = json::object();
    skip_ws();
    if (peek() == '}') {
      ++pos_;
      return out;
    }
    for (;;) {
      key_value(out);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == '}') {
        ++pos_;
        return out;
      }
      fail("expected ',' or '}' in inline table");
    }
  }

  json number() {
    std::string tok;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' ||
                      peek() == '-' || peek() == '.' || peek() == '_')) {
      const char c = get();
      if (c != '_') tok += c;
    }
    if (tok.empty()) fail("expected a value");
    std::string_view body = tok;
    bool neg = false;
    if (body.front() == '+' || body.front() == '-') {
      neg = body.front() == '-';
      body.remove_prefix(1);
    }
    if (body == "inf") return neg ? -std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::infinity();
    if (body == "nan") return std::numeric_limits<double>::quiet_NaN();
    const bool is_float = body.find_first_of(".eE") != std::string_view::npos;
    if (!is_float) {
      std::int64_t v = 0;
      const auto r = std::from_chars(body.data(), body.data() + body.size(), v);
      if (r.ec != std::errc() || r.ptr != body.data() + body.size()) fail("bad integer '" + tok + "'");
      return neg ? -v : v;
    }
    double v = 0.0;
    const auto r = std::from_chars(body.data(), body.data() + body.size(), v);
    if (r.ec != std::errc() || r.ptr != body.data() + body.size()) fail("bad number '" + tok + "'");
    return neg ? -v : v;
  }
};

}  // namespace

nlohmann::json parse(std::string_view text) { return Parser(text).run(); }

}  // namespace netdiff::toml
