#include "reviewchain/text.hpp"

#include <cctype>

#include "reviewchain/types.hpp"

namespace reviewchain {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_token = false;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '\\' && i + 1 < line.size()) {
        cur.push_back(line[++i]);
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
      continue;
    }
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (in_token) {
        out.push_back(std::move(cur));
        cur.clear();
        in_token = false;
      }
      continue;
    }
    in_token = true;
    if (c == '"') {
      quoted = true;
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, "unterminated quote");
  if (in_token) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

KeyValues KeyValues::parse(const std::vector<std::string>& tokens, std::size_t first) {
  KeyValues kv;
  for (std::size_t i = first; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      kv.positional.push_back(t);
      continue;
    }
    auto key = t.substr(0, eq);
    if (!kv.named.emplace(key, t.substr(eq + 1)).second) {
      throw Error(ErrorCode::ParseError, "duplicate key: " + key);
    }
  }
  return kv;
}

const std::string& KeyValues::get(const std::string& key) const {
  auto it = named.find(key);
  if (it == named.end()) throw Error(ErrorCode::ParseError, "missing key: " + key);
  return it->second;
}

std::string KeyValues::get_or(const std::string& key, std::string fallback) const {
  auto it = named.find(key);
  return it == named.end() ? fallback : it->second;
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace reviewchain
