#include "miwaf/preprocess.hpp"

#include "miwaf/errors.hpp"
#include "miwaf/escape.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace miwaf {

namespace {

constexpr std::pair<char32_t, char32_t> k_lowercase_table[] = {
#include "lowercase_table.inc"
};

std::string fold_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

void append_utf8(std::string &out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

constexpr std::string_view k_replacement = "\xEF\xBF\xBD";

// Length of the maximal prefix of an ill-formed sequence at pos that could
// still start a valid sequence (WHATWG / Unicode "maximal subpart"), >= 1.
std::size_t invalid_subpart_length(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  std::size_t need = 0;
  unsigned char lo = 0x80, hi = 0xBF;
  if (b0 >= 0xC2 && b0 <= 0xDF) {
    need = 1;
  } else if (b0 >= 0xE0 && b0 <= 0xEF) {
    need = 2;
    if (b0 == 0xE0)
      lo = 0xA0;
    else if (b0 == 0xED)
      hi = 0x9F;
  } else if (b0 >= 0xF0 && b0 <= 0xF4) {
    need = 3;
    if (b0 == 0xF0)
      lo = 0x90;
    else if (b0 == 0xF4)
      hi = 0x8F;
  } else {
    return 1;
  }
  std::size_t len = 1;
  for (std::size_t k = 0; k < need && pos + len < s.size(); ++k) {
    const auto b = static_cast<unsigned char>(s[pos + len]);
    const unsigned char l = k == 0 ? lo : 0x80;
    const unsigned char h = k == 0 ? hi : 0xBF;
    if (b < l || b > h)
      break;
    ++len;
  }
  return len;
}

// Decodes the valid sequence at pos (caller guarantees validity).
char32_t decode_at(std::string_view s, std::size_t pos, std::size_t len) {
  const auto b = [&](std::size_t i) { return static_cast<unsigned char>(s[pos + i]); };
  switch (len) {
  case 1: return b(0);
  case 2: return (char32_t(b(0) & 0x1F) << 6) | (b(1) & 0x3F);
  case 3: return (char32_t(b(0) & 0x0F) << 12) | (char32_t(b(1) & 0x3F) << 6) | (b(2) & 0x3F);
  default:
    return (char32_t(b(0) & 0x07) << 18) | (char32_t(b(1) & 0x3F) << 12) |
           (char32_t(b(2) & 0x3F) << 6) | (b(3) & 0x3F);
  }
}

} // namespace

// ---------------------------------------------------------------------------
// HeaderFilter

HeaderFilter::HeaderFilter()
    : HeaderFilter(Mode::Denylist, {"host", "date", "content-length", "connection"}) {}

HeaderFilter::HeaderFilter(Mode mode, const std::set<std::string> &names) : mode_(mode) {
  for (const auto &n : names)
    names_.insert(fold_ascii(n));
}

HeaderFilter HeaderFilter::denylist(const std::set<std::string> &names) {
  return HeaderFilter(Mode::Denylist, names);
}

HeaderFilter HeaderFilter::allowlist(const std::set<std::string> &names) {
  if (names.empty())
    throw Error(ErrorKind::InvalidArgument, "header allowlist must name at least one header");
  return HeaderFilter(Mode::Allowlist, names);
}

bool HeaderFilter::keeps(std::string_view header_name) const {
  const bool listed = names_.contains(fold_ascii(header_name));
  return mode_ == Mode::Allowlist ? listed : !listed;
}

// ---------------------------------------------------------------------------
// Decoding steps

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      const int hi = hex_value(s[i + 1]);
      const int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out += static_cast<char>((hi << 4) | lo);
        i += 2;
        continue;
      }
    }
    out += s[i];
  }
  return out;
}

std::string percent_encode(std::string_view bytes) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(bytes.size() * 3);
  for (const char ch : bytes) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_' || c == '~') {
      out += ch;
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    }
  }
  return out;
}

std::string utf8_decode_lossy(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  for (std::size_t i = 0; i < bytes.size();) {
    const std::size_t n = utf8_sequence_length(bytes, i);
    if (n > 0) {
      out.append(bytes.substr(i, n));
      i += n;
    } else {
      out += k_replacement;
      i += invalid_subpart_length(bytes, i);
    }
  }
  return out;
}

char32_t simple_lowercase(char32_t cp) {
  if (cp < 0x80)
    return (cp >= 'A' && cp <= 'Z') ? cp + 32 : cp;
  const auto *first = std::begin(k_lowercase_table);
  const auto *last = std::end(k_lowercase_table);
  const auto *it = std::lower_bound(first, last, cp,
                                    [](const auto &entry, char32_t v) { return entry.first < v; });
  return (it != last && it->first == cp) ? it->second : cp;
}

std::string to_lower(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t n = utf8_sequence_length(text, i);
    if (n == 0) {
      out += k_replacement;
      i += invalid_subpart_length(text, i);
      continue;
    }
    append_utf8(out, simple_lowercase(decode_at(text, i, n)));
    i += n;
  }
  return out;
}

std::string canonicalize_part(std::string_view part) {
  return to_lower(percent_decode(utf8_decode_lossy(percent_decode(part))));
}

CanonicalText canonicalize(const RawRequest &req, const PreprocessConfig &cfg) {
  CanonicalText out;
  auto append = [&out](std::string_view raw) {
    if (raw.empty())
      return;
    std::string part = canonicalize_part(raw);
    if (part.empty())
      return;
    if (!out.text.empty())
      out.text += ' ';
    out.text += part;
  };

  append(req.method);
  append(req.target);
  for (const auto &h : req.headers) {
    if (!cfg.filter.keeps(h.name))
      continue;
    std::string pair;
    pair.reserve(h.name.size() + h.value.size() + 2);
    pair += h.name;
    pair += ": ";
    pair += h.value;
    append(pair);
  }
  if (cfg.include_body)
    append(req.body);
  return out;
}

CanonicalText canonicalize(const RawRequest &req, const HeaderFilter &filter, bool include_body) {
  return canonicalize(req, PreprocessConfig{filter, include_body});
}

} // namespace miwaf
