#include "hessiansys/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hessiansys/error.hpp"

namespace hessiansys {

namespace {

class TomlReader {
public:
  explicit TomlReader(const std::string& text) : s_(text) {}

  nlohmann::json parse() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = &open_table(root);
      } else {
        const std::string key = read_key();
        skip_inline_space();
        expect('=');
        skip_inline_space();
        nlohmann::json value = read_value();
        if (table->contains(key)) fail("duplicate key '" + key + "'");
        (*table)[key] = std::move(value);
      }
      end_of_line();
    }
    return root;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError("config line " + std::to_string(line_) + ": " + msg);
  }
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  char get() {
    const char c = s_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    get();
  }
  void skip_inline_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) get();
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') get();
  }
  void skip_blank_lines() {
    while (!eof()) {
      skip_inline_space();
      skip_comment();
      if (peek() == '\n') {
        get();
      } else {
        break;
      }
    }
  }
  // Whitespace, comments and newlines, allowed inside arrays.
  void skip_any_space() {
    while (!eof()) {
      skip_inline_space();
      skip_comment();
      if (peek() != '\n') break;
      get();
    }
  }
  void end_of_line() {
    skip_inline_space();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    get();
  }

  static bool key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }
  std::string read_key() {
    std::string k;
    while (!eof() && key_char(peek())) k += get();
    if (k.empty()) fail("expected a key");
    return k;
  }

  nlohmann::json& open_table(nlohmann::json& root) {
    expect('[');
    skip_inline_space();
    nlohmann::json* t = &root;
    std::string path;
    while (true) {
      const std::string k = read_key();
      path += (path.empty() ? "" : ".") + k;
      if (!t->contains(k)) (*t)[k] = nlohmann::json::object();
      t = &(*t)[k];
      if (!t->is_object()) fail("'" + k + "' is not a table");
      skip_inline_space();
      if (peek() != '.') break;
      get();
      skip_inline_space();
    }
    expect(']');
    if (!headers_.insert(path).second) fail("table [" + path + "] defined twice");
    return *t;
  }

  nlohmann::json read_value() {
    const char c = peek();
    if (c == '"') return read_string();
    if (c == '[') return read_array();
    if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return true;
    }
    if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return false;
    }
    return read_number();
  }

  nlohmann::json read_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = get();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) fail("unterminated escape");
        const char e = get();
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape '\\") + e + "'");
        }
      }
      out += c;
    }
    return out;
  }

  nlohmann::json read_array() {
    expect('[');
    nlohmann::json arr = nlohmann::json::array();
    skip_any_space();
    if (peek() == ']') {
      get();
      return arr;
    }
    while (true) {
      skip_any_space();
      arr.push_back(read_value());
      skip_any_space();
      if (peek() == ',') {
        get();
        skip_any_space();
        if (peek() == ']') {
          get();
          break;
        }
        continue;
      }
      expect(']');
      break;
    }
    return arr;
  }

  nlohmann::json read_number() {
    std::size_t end = pos_;
    while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '+' ||
                               s_[end] == '-' || s_[end] == '.' || s_[end] == '_'))
      ++end;
    std::string tok = s_.substr(pos_, end - pos_);
    std::erase(tok, '_');
    if (tok.empty()) fail("expected a value");
    const bool integral = tok.find_first_of(".eE") == std::string::npos && tok != "inf" && tok != "nan";
    if (integral) {
      long long v = 0;
      const char* b = tok.data() + (tok[0] == '+' ? 1 : 0);
      const auto [p, ec] = std::from_chars(b, tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size()) fail("invalid number '" + tok + "'");
      pos_ = end;
      return v;
    }
    double v = 0.0;
    const char* b = tok.data() + (tok[0] == '+' ? 1 : 0);
    const auto [p, ec] = std::from_chars(b, tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) fail("invalid number '" + tok + "'");
    pos_ = end;
    return v;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  std::set<std::string> headers_;
  int line_ = 1;
};

enum class Kind { number, integer, string, boolean, array, table };

const std::map<std::string, std::map<std::string, Kind>>& schema() {
  static const std::map<std::string, std::map<std::string, Kind>> s = {
      {"domain",
       {{"kind", Kind::string}, {"n", Kind::integer}, {"lower", Kind::array}, {"upper", Kind::array},
        {"m", Kind::integer}, {"refine", Kind::array}}},
      {"operator", {{"id", Kind::string}, {"params", Kind::table}}},
      {"tensor",
       {{"n", Kind::integer}, {"N", Kind::integer}, {"entries", Kind::array}, {"matrix", Kind::array},
        {"tol", Kind::number}}},
      {"sh",
       {{"n", Kind::integer}, {"N", Kind::integer}, {"B", Kind::array}, {"A", Kind::array},
        {"tol", Kind::number}, {"rescale", Kind::boolean}}},
      {"solver",
       {{"tol", Kind::number}, {"max_iter", Kind::integer}, {"linear_tol", Kind::number},
        {"method", Kind::string}, {"guard_window", Kind::integer}}},
      {"certification",
       {{"seed", Kind::integer}, {"samples", Kind::integer}, {"beta", Kind::number},
        {"gamma", Kind::number}, {"lambda", Kind::number}, {"kappa", Kind::number},
        {"ct_alpha", Kind::number}, {"ct_beta", Kind::number}, {"ct_gamma", Kind::number},
        {"fit", Kind::boolean}}},
      {"mt",
       {{"domain", Kind::string}, {"R", Kind::number}, {"a", Kind::number}, {"b", Kind::number},
        {"function", Kind::string}, {"quad_orders", Kind::array}, {"tol", Kind::number},
        {"sandwich_samples", Kind::integer}, {"probes", Kind::integer}, {"seed", Kind::integer}}},
      {"perturbation",
       {{"id", Kind::string}, {"params", Kind::table}, {"tol", Kind::number},
        {"max_iter", Kind::integer}}},
      {"output", {{"directory", Kind::string}, {"formats", Kind::array}}},
  };
  return s;
}

bool matches(const nlohmann::json& v, Kind k) {
  switch (k) {
    case Kind::number: return v.is_number();
    case Kind::integer: return v.is_number_integer();
    case Kind::string: return v.is_string();
    case Kind::boolean: return v.is_boolean();
    case Kind::array: return v.is_array();
    case Kind::table: return v.is_object();
  }
  return false;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::number: return "a number";
    case Kind::integer: return "an integer";
    case Kind::string: return "a string";
    case Kind::boolean: return "a boolean";
    case Kind::array: return "an array";
    case Kind::table: return "a table";
  }
  return "?";
}

}  // namespace

nlohmann::json parse_toml_subset(const std::string& text) { return TomlReader(text).parse(); }

nlohmann::json parse_config_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("config JSON: ") + e.what());
    }
  }
  return parse_toml_subset(text);
}

nlohmann::json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate_config(const nlohmann::json& cfg) {
  if (!cfg.is_object()) throw FormatError("config must be a table of sections");
  for (const auto& [section, body] : cfg.items()) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw FormatError("unknown config section '" + section + "'");
    if (!body.is_object()) throw FormatError("config section '" + section + "' must be a table");
    for (const auto& [key, value] : body.items()) {
      const auto k = it->second.find(key);
      if (k == it->second.end())
        throw FormatError("unknown key '" + key + "' in section [" + section + "]");
      if (!matches(value, k->second))
        throw FormatError("[" + section + "] " + key + " must be " + kind_name(k->second));
    }
  }
}

std::string config_hash(const nlohmann::json& cfg) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : cfg.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream ss;
  ss << std::hex;
  ss.width(16);
  ss.fill('0');
  ss << h;
  return ss.str();
}

}  // namespace hessiansys
