#ifndef MIWAF_HASH_HPP
#define MIWAF_HASH_HPP

#include <string>
#include <string_view>

namespace miwaf {

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

} // namespace miwaf

#endif
