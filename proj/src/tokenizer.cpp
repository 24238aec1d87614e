#include "miwaf/tokenizer.hpp"

#include "miwaf/errors.hpp"
#include "miwaf/escape.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace miwaf {

namespace {

constexpr std::string_view k_dictionary_magic = "# miwaf-dictionary v1";

bool is_separator(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

} // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_separator(text[i]))
      ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_separator(text[i]))
      ++i;
    if (i > start)
      tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::vector<std::string> request_tokens(const RawRequest &req, const PreprocessConfig &cfg) {
  return tokenize(canonicalize(req, cfg).text);
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (!index_.emplace(tokens_[i], i).second)
      throw Error(ErrorKind::InvalidArgument, "duplicate token '" + tokens_[i] + "'");
}

std::optional<std::size_t> Vocabulary::index_of(const std::string &token) const {
  auto it = index_.find(token);
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

TokenDictionary::TokenDictionary(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  vocab_ = Vocabulary(std::move(tokens));
}

void TokenDictionary::write(std::ostream &out) const {
  out << k_dictionary_magic << '\n';
  for (const auto &t : tokens())
    out << escape_bytes(t) << '\n';
}

TokenDictionary TokenDictionary::read(std::istream &in) {
  std::string line;
  if (!std::getline(in, line) || line != k_dictionary_magic)
    throw MalformedRecord(1, "missing dictionary header line");
  std::vector<std::string> tokens;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty())
      continue;
    auto token = unescape_bytes(line);
    if (!token)
      throw MalformedRecord(line_no, "invalid escape in dictionary token");
    tokens.push_back(std::move(*token));
  }
  if (!std::is_sorted(tokens.begin(), tokens.end()) ||
      std::adjacent_find(tokens.begin(), tokens.end()) != tokens.end())
    throw MalformedRecord(line_no, "dictionary tokens are not sorted and unique");
  return TokenDictionary(std::move(tokens));
}

void TokenDictionary::save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  write(out);
  if (!out)
    throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

TokenDictionary TokenDictionary::load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return read(in);
}

TokenDictionary build_dictionary(const Corpus &attacks, const Corpus &normals,
                                 const PreprocessConfig &cfg) {
  if (attacks.empty() || normals.empty())
    throw Error(ErrorKind::EmptyCorpus, "dictionary construction needs both corpora");
  std::set<std::string> unique;
  for (const Corpus *corpus : {&attacks, &normals})
    for (const auto &req : corpus->requests)
      for (auto &tok : request_tokens(req, cfg))
        unique.insert(std::move(tok));
  return TokenDictionary(std::vector<std::string>(unique.begin(), unique.end()));
}

} // namespace miwaf
