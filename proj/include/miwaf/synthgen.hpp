#ifndef MIWAF_SYNTHGEN_HPP
#define MIWAF_SYNTHGEN_HPP

#include "miwaf/request_model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace miwaf {

enum class PayloadFamily { Sqli, Xss, Cmdi, Traversal };

std::string_view to_string(PayloadFamily family) noexcept;
std::optional<PayloadFamily> parse_payload_family(std::string_view name);
std::vector<PayloadFamily> all_payload_families();

/// The curated payload fixtures of one family, in file order.
const std::vector<std::string> &payloads(PayloadFamily family);

/// Path templates with {word}, {id} and {name} placeholders. Every default
/// template ends in a placeholder; attacks extend that final value.
std::vector<std::string> default_path_templates();

struct SynthSpec {
  std::size_t n_normal = 0;
  std::size_t n_attack = 0;
  std::vector<std::string> path_templates = default_path_templates();
  std::vector<PayloadFamily> families = all_payload_families();
  /// When non-empty, replaces the family fixtures: attack k carries
  /// custom_payloads[k % size] and category "custom".
  std::vector<std::string> custom_payloads;
  /// Tokens drawn uniformly (for both classes) into an X-Noise header.
  std::vector<std::string> noise_vocabulary;
  std::size_t noise_tokens_per_request = 0;
  std::uint64_t seed = 1;

  /// Throws InvalidArgument on an empty template list, an empty family list
  /// (without custom payloads) or noise tokens requested from an empty
  /// vocabulary.
  void validate() const;
};

/// n_normal template-only requests labeled Normal followed by n_attack
/// requests labeled Attack, each a template with one payload
/// percent-encoded onto the end of its final parameter value (preceded by
/// a space so payload tokens stay separate after canonicalization). Record i depends only on
/// (seed, i), so generation order does not matter.
Corpus generate(const SynthSpec &spec);

} // namespace miwaf

#endif
