#include "ftfloor/util.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace ftfloor::util {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

std::string snake_case(std::string_view camel) {
  std::string out;
  out.reserve(camel.size() + 4);
  for (std::size_t i = 0; i < camel.size(); ++i) {
    const char c = camel[i];
    if (std::isupper(static_cast<unsigned char>(c))) {
      if (i > 0 && out.back() != '_') out += '_';
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      out += c;
    }
  }
  return out;
}

std::string title_snake(std::string_view snake) {
  std::string out(snake);
  bool at_start = true;
  for (char& c : out) {
    if (at_start) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    at_start = (c == '_');
  }
  return out;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
      auto hex = [](char c) {
        return c <= '9' ? c - '0' : (std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
      };
      out += static_cast<char>(hex(s[i + 1]) * 16 + hex(s[i + 2]));
      i += 2;
    } else if (s[i] == '+') {
      out += ' ';
    } else {
      out += s[i];
    }
  }
  return out;
}

ParsedUrl parse_url(std::string_view url) {
  ParsedUrl out;
  std::string_view rest = url;
  // "://" only marks a scheme when it precedes the first slash; a query may
  // embed full URLs as parameter values.
  auto scheme = rest.find("://");
  if (scheme != std::string_view::npos && scheme < rest.find('/'))
    rest = rest.substr(scheme + 3);
  auto path_start = rest.find('/');
  if (path_start == std::string_view::npos) {
    out.host = std::string(rest);
    out.path = "/";
    return out;
  }
  out.host = std::string(rest.substr(0, path_start));
  rest = rest.substr(path_start);
  auto qmark = rest.find('?');
  if (qmark == std::string_view::npos) {
    out.path = std::string(rest);
    return out;
  }
  out.path = std::string(rest.substr(0, qmark));
  // Split on the raw separators first, then decode each piece.
  for (const std::string& pair : split(rest.substr(qmark + 1), '&')) {
    if (pair.empty()) continue;
    auto eq = pair.find('=');
    if (eq == std::string::npos)
      out.query.emplace_back(percent_decode(pair), "");
    else
      out.query.emplace_back(percent_decode(pair.substr(0, eq)),
                             percent_decode(pair.substr(eq + 1)));
  }
  return out;
}

std::optional<std::string> query_value(const ParsedUrl& url, std::string_view key) {
  for (const auto& [k, v] : url.query)
    if (k == key) return v;
  return std::nullopt;
}

std::string iso_timestamp(std::int64_t epoch_ms) {
  const std::time_t secs = static_cast<std::time_t>(epoch_ms / 1000);
  const int ms = static_cast<int>(epoch_ms % 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
  return buf;
}

}  // namespace ftfloor::util
