#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace citescope::xmlmini {

// Minimal tag extraction for the flat harvesting payloads (OAI-PMH,
// E-utilities). Not a general XML parser: it assumes tags of a given name
// are not nested inside themselves, which holds for the record formats
// consumed here.

// Inner content of every <tag ...>...</tag> occurrence, in document order.
std::vector<std::string_view> blocks(std::string_view xml, std::string_view tag);

// Inner content of the first occurrence.
std::optional<std::string_view> first_block(std::string_view xml, std::string_view tag);

// Raw attribute text of the first <tag ...> opening; lets callers test for
// markers like status="deleted".
std::optional<std::string_view> first_open_tag(std::string_view xml, std::string_view tag);

// Decodes the five named entities plus numeric character references.
std::string unescape(std::string_view s);

// Trims and collapses internal whitespace runs to single spaces.
std::string collapse_ws(std::string_view s);

// unescape + collapse_ws, the usual treatment for harvested titles and
// abstracts.
std::string text(std::string_view s);

}  // namespace citescope::xmlmini
