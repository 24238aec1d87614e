#include "miwaf/request_model.hpp"

#include "miwaf/errors.hpp"
#include "miwaf/escape.hpp"
#include "miwaf/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace miwaf {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fold_case(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front()))
    s.remove_prefix(1);
  while (!s.empty() && is_space(s.back()))
    s.remove_suffix(1);
  return s;
}

void check_method(std::string_view method, std::size_t line_no) {
  if (method.empty())
    throw MalformedRecord(line_no, "empty method");
  if (std::any_of(method.begin(), method.end(), [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) != 0;
      }))
    throw MalformedRecord(line_no, "method contains whitespace");
}

std::string require_string(const ordered_json &obj, const char *key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw MalformedRecord(line_no, std::string("missing field '") + key + "'");
  if (!it->is_string())
    throw MalformedRecord(line_no, std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

} // namespace

std::string_view to_string(ClassLabel label) {
  switch (label) {
  case ClassLabel::Normal: return "normal";
  case ClassLabel::Attack: return "attack";
  case ClassLabel::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

std::optional<ClassLabel> parse_label(std::string_view text) {
  const std::string folded = fold_case(trim(text));
  if (folded == "normal")
    return ClassLabel::Normal;
  if (folded == "attack")
    return ClassLabel::Attack;
  if (folded.empty() || folded == "unlabeled")
    return ClassLabel::Unlabeled;
  return std::nullopt;
}

void add_header(RawRequest &req, std::string_view name, std::string_view value) {
  const std::string folded = fold_case(name);
  for (auto &h : req.headers) {
    if (fold_case(h.name) == folded) {
      h.value += ", ";
      h.value += value;
      return;
    }
  }
  req.headers.push_back(Header{std::string(name), std::string(value)});
}

CorpusFormat format_for_path(const std::filesystem::path &path) {
  return fold_case(path.extension().string()) == ".csv" ? CorpusFormat::Csv
                                                        : CorpusFormat::Jsonl;
}

// ---------------------------------------------------------------------------
// JSONL

RawRequest parse_jsonl_record(std::string_view line, std::size_t line_no) {
  ordered_json obj;
  try {
    obj = ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error &e) {
    throw MalformedRecord(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object())
    throw MalformedRecord(line_no, "record is not a JSON object");

  RawRequest req;
  req.method = require_string(obj, "method", line_no);
  check_method(req.method, line_no);
  req.target = require_string(obj, "target", line_no);

  if (auto it = obj.find("headers"); it != obj.end() && !it->is_null()) {
    if (it->is_object()) {
      for (const auto &[name, value] : it->items()) {
        if (!value.is_string())
          throw MalformedRecord(line_no, "header '" + name + "' is not a string");
        add_header(req, name, value.get<std::string>());
      }
    } else if (it->is_array()) {
      for (const auto &pair : *it) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
            !pair[1].is_string())
          throw MalformedRecord(line_no, "headers array entries must be [name, value]");
        add_header(req, pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    } else {
      throw MalformedRecord(line_no, "headers must be an object or an array of pairs");
    }
  }

  if (auto it = obj.find("body"); it != obj.end() && !it->is_null()) {
    if (!it->is_string())
      throw MalformedRecord(line_no, "body is not a string");
    auto body = unescape_bytes(it->get<std::string>());
    if (!body)
      throw MalformedRecord(line_no, "body has an invalid escape sequence");
    req.body = std::move(*body);
  }

  if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
    if (!it->is_string())
      throw MalformedRecord(line_no, "label is not a string");
    auto label = parse_label(it->get<std::string>());
    if (!label)
      throw MalformedRecord(line_no, "unknown label '" + it->get<std::string>() + "'");
    req.label = *label;
  }

  if (auto it = obj.find("category"); it != obj.end() && !it->is_null()) {
    if (!it->is_string())
      throw MalformedRecord(line_no, "category is not a string");
    req.category = it->get<std::string>();
  }
  return req;
}

std::string to_jsonl_record(const RawRequest &req) {
  ordered_json obj;
  obj["method"] = req.method;
  obj["target"] = req.target;
  ordered_json headers = ordered_json::object();
  for (const auto &h : req.headers)
    headers[h.name] = h.value;
  obj["headers"] = std::move(headers);
  obj["body"] = escape_bytes(req.body);
  if (req.label == ClassLabel::Unlabeled)
    obj["label"] = nullptr;
  else
    obj["label"] = std::string(to_string(req.label));
  if (!req.category.empty())
    obj["category"] = req.category;
  try {
    return obj.dump();
  } catch (const nlohmann::json::type_error &e) {
    throw Error(ErrorKind::InvalidArgument,
                std::string("request field is not valid UTF-8: ") + e.what());
  }
}

Corpus read_jsonl(std::istream &in, std::string source_name) {
  Corpus corpus;
  corpus.source_name = std::move(source_name);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    corpus.requests.push_back(parse_jsonl_record(line, line_no));
  }
  if (corpus.empty())
    throw Error(ErrorKind::EmptyCorpus, "no records in " + corpus.source_name);
  return corpus;
}

void write_jsonl(const Corpus &corpus, std::ostream &out) {
  for (const auto &req : corpus.requests)
    out << to_jsonl_record(req) << '\n';
}

// ---------------------------------------------------------------------------
// CSV

namespace {

struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

// RFC 4180 reader. Quoted fields may span lines.
class CsvReader {
public:
  explicit CsvReader(std::string text) : text_(std::move(text)) {}

  std::optional<CsvRecord> next() {
    if (pos_ >= text_.size())
      return std::nullopt;
    CsvRecord rec;
    rec.line = line_;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (quoted) {
        if (c == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            field += '"';
            pos_ += 2;
            continue;
          }
          quoted = false;
          ++pos_;
          continue;
        }
        if (c == '\n')
          ++line_;
        field += c;
        ++pos_;
        continue;
      }
      if (c == '"' && !field_started) {
        quoted = true;
        field_started = true;
        ++pos_;
        continue;
      }
      if (c == ',') {
        rec.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
        ++pos_;
        continue;
      }
      if (c == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') {
        ++pos_;
        continue;
      }
      if (c == '\n') {
        ++pos_;
        ++line_;
        rec.fields.push_back(std::move(field));
        return rec;
      }
      field += c;
      field_started = true;
      ++pos_;
    }
    if (quoted)
      throw MalformedRecord(rec.line, "unterminated quoted field");
    rec.fields.push_back(std::move(field));
    return rec;
  }

private:
  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

bool blank_record(const CsvRecord &rec) {
  return rec.fields.size() == 1 && trim(rec.fields[0]).empty();
}

} // namespace

RawRequest parse_http_message(std::string_view blob, std::size_t line_no) {
  auto next_line = [&blob](std::string_view &line) {
    if (blob.empty())
      return false;
    const auto nl = blob.find('\n');
    if (nl == std::string_view::npos) {
      line = blob;
      blob = {};
    } else {
      line = blob.substr(0, nl);
      blob.remove_prefix(nl + 1);
    }
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    return true;
  };

  std::string_view line;
  // Tolerate leading blank lines before the request line.
  do {
    if (!next_line(line))
      throw MalformedRecord(line_no, "empty HTTP message");
  } while (trim(line).empty());

  RawRequest req;
  const std::string_view request_line = trim(line);
  const auto sp = request_line.find_first_of(" \t");
  if (sp == std::string_view::npos)
    throw MalformedRecord(line_no, "request line lacks a target");
  req.method = std::string(request_line.substr(0, sp));
  std::string_view rest = trim(request_line.substr(sp));
  const auto sp2 = rest.find_last_of(" \t");
  if (sp2 != std::string_view::npos && rest.substr(sp2 + 1).starts_with("HTTP/"))
    rest = trim(rest.substr(0, sp2));
  if (rest.empty())
    throw MalformedRecord(line_no, "request line lacks a target");
  req.target = std::string(rest);
  check_method(req.method, line_no);

  bool saw_blank = false;
  while (next_line(line)) {
    if (line.empty()) {
      saw_blank = true;
      break;
    }
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0)
      throw MalformedRecord(line_no, "header line without a name: '" + std::string(line) + "'");
    add_header(req, trim(line.substr(0, colon)), trim(line.substr(colon + 1)));
  }
  if (saw_blank)
    req.body = std::string(blob);

  if (!is_valid_utf8(req.method) || !is_valid_utf8(req.target))
    throw MalformedRecord(line_no, "request line is not valid UTF-8");
  for (const auto &h : req.headers)
    if (!is_valid_utf8(h.name) || !is_valid_utf8(h.value))
      throw MalformedRecord(line_no, "header is not valid UTF-8");
  return req;
}

Corpus read_csv(std::istream &in, std::string source_name) {
  std::ostringstream buf;
  buf << in.rdbuf();
  CsvReader reader(buf.str());

  Corpus corpus;
  corpus.source_name = std::move(source_name);

  auto header = reader.next();
  while (header && blank_record(*header))
    header = reader.next();
  if (!header)
    throw Error(ErrorKind::EmptyCorpus, "no header row in " + corpus.source_name);

  std::size_t request_col = 0, label_col = 1;
  for (std::size_t i = 0; i < header->fields.size(); ++i) {
    const std::string name = fold_case(trim(header->fields[i]));
    if (name == "raw_request" || name == "request")
      request_col = i;
    else if (name == "label")
      label_col = i;
  }

  while (auto rec = reader.next()) {
    if (blank_record(*rec))
      continue;
    if (request_col >= rec->fields.size())
      throw MalformedRecord(rec->line, "missing raw_request column");
    RawRequest req = parse_http_message(rec->fields[request_col], rec->line);
    if (label_col < rec->fields.size()) {
      auto label = parse_label(rec->fields[label_col]);
      if (!label)
        throw MalformedRecord(rec->line, "unknown label '" + rec->fields[label_col] + "'");
      req.label = *label;
    }
    corpus.requests.push_back(std::move(req));
  }
  if (corpus.empty())
    throw Error(ErrorKind::EmptyCorpus, "no records in " + corpus.source_name);
  return corpus;
}

// ---------------------------------------------------------------------------

Corpus load_corpus(const std::filesystem::path &path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return format == CorpusFormat::Csv ? read_csv(in, path.string())
                                     : read_jsonl(in, path.string());
}

Corpus load_corpus(const std::filesystem::path &path) {
  return load_corpus(path, format_for_path(path));
}

void save_corpus(const Corpus &corpus, const std::filesystem::path &path) {
  if (corpus.empty())
    throw Error(ErrorKind::EmptyCorpus, "refusing to save an empty corpus");
  std::ostringstream buf;
  write_jsonl(corpus, buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out << buf.str();
  out.flush();
  if (!out)
    throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

std::string corpus_digest(const Corpus &corpus) {
  std::ostringstream buf;
  write_jsonl(corpus, buf);
  return sha256_hex(buf.str());
}

bool same_requests(const Corpus &a, const Corpus &b) { return a.requests == b.requests; }

} // namespace miwaf
