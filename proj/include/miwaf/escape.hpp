#ifndef MIWAF_ESCAPE_HPP
#define MIWAF_ESCAPE_HPP

#include <optional>
#include <string>
#include <string_view>

namespace miwaf {

// Reversible text-safe encoding for arbitrary byte strings.
//
//   '\\'                       -> "\\\\"
//   control bytes (< 0x20, 0x7f) -> "\\xHH"
//   bytes outside valid UTF-8  -> "\\xHH"
//
// Everything else, including well-formed multi-byte UTF-8, is copied as is,
// so the output is always valid UTF-8 and contains no whitespace other than
// ' '.
std::string escape_bytes(std::string_view bytes);

/// Inverse of escape_bytes. Returns nullopt on a dangling or unknown escape.
std::optional<std::string> unescape_bytes(std::string_view text);

/// Length of the well-formed UTF-8 sequence starting at s[pos], or 0.
std::size_t utf8_sequence_length(std::string_view s, std::size_t pos);

bool is_valid_utf8(std::string_view s);

} // namespace miwaf

#endif
