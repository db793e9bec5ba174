#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace reviewchain {

/// Splits on whitespace; double quotes group, backslash escapes inside
/// quotes. A '#' outside quotes starts a comment.
std::vector<std::string> tokenize(std::string_view line);

/// Splits "a,b,c" into parts; empty input gives no parts.
std::vector<std::string> split_list(std::string_view s, char sep = ',');

/// Tokens of the form key=value. Tokens without '=' are returned in
/// `positional`, in order.
struct KeyValues {
  std::vector<std::string> positional;
  std::map<std::string, std::string> named;

  static KeyValues parse(const std::vector<std::string>& tokens, std::size_t first = 0);
  bool has(const std::string& key) const { return named.contains(key); }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, std::string fallback) const;
};

std::string quote(std::string_view s);

/// Strips leading and trailing spaces, tabs and carriage returns.
std::string_view trim(std::string_view s);

}  // namespace reviewchain
