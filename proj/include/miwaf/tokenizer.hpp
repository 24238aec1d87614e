#ifndef MIWAF_TOKENIZER_HPP
#define MIWAF_TOKENIZER_HPP

#include "miwaf/preprocess.hpp"
#include "miwaf/request_model.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace miwaf {

/// Splits on runs of ' ', '\t', '\r' and '\n'. Punctuation stays inside
/// tokens, so "'1'='1'" and "/a?x=1" survive whole.
std::vector<std::string> tokenize(std::string_view text);

/// canonicalize followed by tokenize.
std::vector<std::string> request_tokens(const RawRequest &req, const PreprocessConfig &cfg);

/// Ordered list of unique tokens with a reverse index. Order is whatever the
/// constructor was given; a TokenDictionary is the sorted special case.
class Vocabulary {
public:
  Vocabulary() = default;
  /// Throws InvalidArgument on duplicate tokens.
  explicit Vocabulary(std::vector<std::string> tokens);

  const std::vector<std::string> &tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string &operator[](std::size_t i) const { return tokens_[i]; }
  std::optional<std::size_t> index_of(const std::string &token) const;

  bool operator==(const Vocabulary &rhs) const { return tokens_ == rhs.tokens_; }

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Lexicographically sorted, duplicate-free token set.
class TokenDictionary {
public:
  TokenDictionary() = default;
  /// Sorts and deduplicates.
  explicit TokenDictionary(std::vector<std::string> tokens);

  const Vocabulary &vocabulary() const noexcept { return vocab_; }
  const std::vector<std::string> &tokens() const noexcept { return vocab_.tokens(); }
  std::size_t size() const noexcept { return vocab_.size(); }
  bool contains(const std::string &token) const { return vocab_.index_of(token).has_value(); }

  /// First line "# miwaf-dictionary v1", then one escaped token per line.
  void write(std::ostream &out) const;
  static TokenDictionary read(std::istream &in);
  void save(const std::filesystem::path &path) const;
  static TokenDictionary load(const std::filesystem::path &path);

  bool operator==(const TokenDictionary &rhs) const { return vocab_ == rhs.vocab_; }

private:
  Vocabulary vocab_;
};

/// Sorted union of the tokens of every request in both corpora.
TokenDictionary build_dictionary(const Corpus &attacks, const Corpus &normals,
                                 const PreprocessConfig &cfg);

} // namespace miwaf

#endif
