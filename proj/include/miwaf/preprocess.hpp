#ifndef MIWAF_PREPROCESS_HPP
#define MIWAF_PREPROCESS_HPP

#include "miwaf/request_model.hpp"

#include <set>
#include <string>
#include <string_view>

namespace miwaf {

/// Which request headers take part in canonicalization. Names are compared
/// case-insensitively and stored folded.
class HeaderFilter {
public:
  enum class Mode { Allowlist, Denylist };

  /// Denylist {host, date, content-length, connection}.
  HeaderFilter();

  static HeaderFilter denylist(const std::set<std::string> &names);
  /// Throws InvalidArgument when names is empty.
  static HeaderFilter allowlist(const std::set<std::string> &names);

  Mode mode() const noexcept { return mode_; }
  const std::set<std::string> &names() const noexcept { return names_; }

  bool keeps(std::string_view header_name) const;

  bool operator==(const HeaderFilter &) const = default;

private:
  HeaderFilter(Mode mode, const std::set<std::string> &names);

  Mode mode_;
  std::set<std::string> names_;
};

struct PreprocessConfig {
  HeaderFilter filter;
  bool include_body = true;

  bool operator==(const PreprocessConfig &) const = default;
};

/// Lowercase UTF-8 text produced by canonicalize.
struct CanonicalText {
  std::string text;
};

/// Replaces every %XX triple (hex digits, either case) with its byte. '+' and
/// malformed escapes are copied through unchanged. Single pass.
std::string percent_decode(std::string_view s);

/// Encodes every byte outside the RFC 3986 unreserved set as %XX.
std::string percent_encode(std::string_view bytes);

/// Decodes UTF-8, replacing each maximal invalid subpart with U+FFFD.
/// The result is always valid UTF-8.
std::string utf8_decode_lossy(std::string_view bytes);

/// Unicode simple lowercase mapping of a single code point.
char32_t simple_lowercase(char32_t cp);

/// Lowercases UTF-8 text code point by code point. Invalid input bytes are
/// decoded lossily first.
std::string to_lower(std::string_view text);

/// percent_decode -> utf8_decode_lossy -> percent_decode -> lowercase.
std::string canonicalize_part(std::string_view part);

/// Space-joined canonical form of method, target, retained "name: value"
/// headers and (optionally) body. Empty parts are skipped.
CanonicalText canonicalize(const RawRequest &req, const PreprocessConfig &cfg);
CanonicalText canonicalize(const RawRequest &req, const HeaderFilter &filter, bool include_body);

} // namespace miwaf

#endif
