#ifndef MIWAF_REQUEST_MODEL_HPP
#define MIWAF_REQUEST_MODEL_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace miwaf {

enum class ClassLabel { Normal, Attack, Unlabeled };

/// "normal", "attack" or "unlabeled".
std::string_view to_string(ClassLabel label);

/// Case-insensitive; accepts "normal"/"attack" and the empty string for
/// Unlabeled. Anything else yields nullopt.
std::optional<ClassLabel> parse_label(std::string_view text);

struct Header {
  std::string name;
  std::string value;

  bool operator==(const Header &) const = default;
};

/// One HTTP request as received. The body is an arbitrary byte string.
struct RawRequest {
  std::string method;
  std::string target;
  std::vector<Header> headers;
  std::string body;
  ClassLabel label = ClassLabel::Unlabeled;
  /// Optional attack family (e.g. "sqli"); empty when unknown.
  std::string category;

  bool operator==(const RawRequest &) const = default;
};

/// Appends a header, merging into an existing one with the same
/// case-folded name as "v1, v2". The first spelling of the name wins.
void add_header(RawRequest &req, std::string_view name, std::string_view value);

struct Corpus {
  std::vector<RawRequest> requests;
  std::string source_name;

  bool empty() const noexcept { return requests.empty(); }
  std::size_t size() const noexcept { return requests.size(); }
};

enum class CorpusFormat { Jsonl, Csv };

/// Infers the format from the file extension (.csv, anything else JSONL).
CorpusFormat format_for_path(const std::filesystem::path &path);

Corpus load_corpus(const std::filesystem::path &path, CorpusFormat format);
Corpus load_corpus(const std::filesystem::path &path);

Corpus read_jsonl(std::istream &in, std::string source_name);
Corpus read_csv(std::istream &in, std::string source_name);

/// Parses one JSONL record. line_no is only used for error reporting.
RawRequest parse_jsonl_record(std::string_view line, std::size_t line_no);

/// Serializes one request as a single JSON line (no trailing newline).
std::string to_jsonl_record(const RawRequest &req);

/// Parses a raw HTTP request blob: request line, header lines, blank line,
/// body. Both CRLF and LF line endings are accepted.
RawRequest parse_http_message(std::string_view blob, std::size_t line_no);

void write_jsonl(const Corpus &corpus, std::ostream &out);
void save_corpus(const Corpus &corpus, const std::filesystem::path &path);

/// SHA-256 of the canonical JSONL serialization; independent of source_name.
std::string corpus_digest(const Corpus &corpus);

/// Field-level equality of the request lists.
bool same_requests(const Corpus &a, const Corpus &b);

} // namespace miwaf

#endif
