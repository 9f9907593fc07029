#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ftfloor::util {

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

/// "pickUpAndTransport" -> "pick_up_and_transport"
std::string snake_case(std::string_view camel);
/// "pick_up_and_transport" -> "Pick_Up_And_Transport"; "sink_1" -> "Sink_1"
std::string title_snake(std::string_view snake);

struct ParsedUrl {
  std::string host;                                       // may be empty
  std::string path;                                       // starts with '/'
  std::vector<std::pair<std::string, std::string>> query; // in given order
};

/// Decodes %XX escapes and '+' spaces.
std::string percent_decode(std::string_view s);

/// Splits scheme://host/path?k=v&k=v. Query keys and values are
/// percent-decoded after splitting, so encoded URLs survive as values.
ParsedUrl parse_url(std::string_view url);

std::optional<std::string> query_value(const ParsedUrl& u, std::string_view key);

/// Milliseconds since the Unix epoch -> "YYYY-MM-DDThh:mm:ss.mmmZ".
std::string iso_timestamp(std::int64_t epoch_ms);

}  // namespace ftfloor::util
