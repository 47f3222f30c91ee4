#pragma once

#include <map>
#include <string>
#include <string_view>

namespace lmlcc {

/// Ordered flat key-value text: one `key = value` per line, `#` starts a comment.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::string_view text);
KeyValues read_key_values_file(const std::string& path);
std::string format_key_values(const KeyValues& kv);

}  // namespace lmlcc
