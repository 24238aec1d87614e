#include "miwaf/escape.hpp"
#include "miwaf/request_model.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

using namespace miwaf;
using miwaf::test::TempDir;

TEST_SUITE("request_model") {

TEST_CASE("label parsing is case-insensitive and strict") {
  CHECK(parse_label("normal") == ClassLabel::Normal);
  CHECK(parse_label("ATTACK") == ClassLabel::Attack);
  CHECK(parse_label("") == ClassLabel::Unlabeled);
  CHECK(parse_label("unlabeled") == ClassLabel::Unlabeled);
  CHECK_FALSE(parse_label("benign").has_value());
  CHECK(to_string(ClassLabel::Attack) == "attack");
}

TEST_CASE("JSONL record maps fields directly") {
  const auto r = parse_jsonl_record(
      R"({"method":"GET","target":"/a?x=1","headers":{},"body":"","label":"normal"})", 1);
  CHECK(r.method == "GET");
  CHECK(r.target == "/a?x=1");
  CHECK(r.headers.empty());
  CHECK(r.body.empty());
  CHECK(r.label == ClassLabel::Normal);
}

TEST_CASE("missing or null label means Unlabeled") {
  CHECK(parse_jsonl_record(R"({"method":"GET","target":"/"})", 1).label == ClassLabel::Unlabeled);
  CHECK(parse_jsonl_record(R"({"method":"GET","target":"/","label":null})", 1).label ==
        ClassLabel::Unlabeled);
}

TEST_CASE("headers accept an object or an ordered list of pairs") {
  const auto obj =
      parse_jsonl_record(R"({"method":"GET","target":"/","headers":{"A":"1","B":"2"}})", 1);
  REQUIRE(obj.headers.size() == 2);
  const auto arr = parse_jsonl_record(
      R"({"method":"GET","target":"/","headers":[["Cookie","a=1"],["cookie","b=2"]]})", 1);
  REQUIRE(arr.headers.size() == 1);
  CHECK(arr.headers[0].name == "Cookie");
  CHECK(arr.headers[0].value == "a=1, b=2");
}

TEST_CASE("malformed records carry their line number") {
  const char *bad[] = {
      "not json",
      R"([1,2])",
      R"({"target":"/"})",
      R"({"method":"","target":"/"})",
      R"({"method":"G T","target":"/"})",
      R"({"method":"GET","target":"/","label":"benign"})",
      R"({"method":"GET","target":"/","headers":{"a":1}})",
      R"({"method":"GET","target":"/","body":"\\q"})",
  };
  for (const char *line : bad) {
    CAPTURE(line);
    try {
      (void)parse_jsonl_record(line, 7);
      FAIL("expected MalformedRecord");
    } catch (const MalformedRecord &e) {
      CHECK(e.line() == 7);
      CHECK(e.kind() == ErrorKind::MalformedRecord);
    }
  }
}

TEST_CASE("read_jsonl skips blank lines and reports the failing line") {
  std::istringstream ok("{\"method\":\"GET\",\"target\":\"/a\"}\n\n{\"method\":\"POST\","
                        "\"target\":\"/b\",\"label\":\"attack\"}\n");
  const Corpus c = read_jsonl(ok, "mem");
  REQUIRE(c.size() == 2);
  CHECK(c.requests[1].method == "POST");
  CHECK(c.requests[1].label == ClassLabel::Attack);

  std::istringstream bad("{\"method\":\"GET\",\"target\":\"/a\"}\n{oops\n");
  try {
    (void)read_jsonl(bad, "mem");
    FAIL("expected MalformedRecord");
  } catch (const MalformedRecord &e) {
    CHECK(e.line() == 2);
  }

  std::istringstream empty("\n\n");
  CHECK_THROWS_KIND(read_jsonl(empty, "mem"), ErrorKind::EmptyCorpus);
}

TEST_CASE("CSV raw-request form merges duplicate headers") {
  std::istringstream csv("raw_request,label\n"
                         "\"GET /p?q=1 HTTP/1.1\r\nHost: x\r\nCookie: v1\r\nCookie: v2\r\n\r\n\","
                         "normal\n"
                         "\"POST /login HTTP/1.1\nContent-Type: text/plain\n\nuser=\"\"a\"\"\","
                         "attack\n");
  const Corpus c = read_csv(csv, "mem.csv");
  REQUIRE(c.size() == 2);
  const auto &r0 = c.requests[0];
  CHECK(r0.method == "GET");
  CHECK(r0.target == "/p?q=1");
  REQUIRE(r0.headers.size() == 2);
  CHECK(r0.headers[1].name == "Cookie");
  CHECK(r0.headers[1].value == "v1, v2");
  CHECK(r0.label == ClassLabel::Normal);
  const auto &r1 = c.requests[1];
  CHECK(r1.method == "POST");
  CHECK(r1.body == "user=\"a\"");
  CHECK(r1.label == ClassLabel::Attack);
}

TEST_CASE("CSV without a request column is rejected") {
  std::istringstream csv("foo,label\nbar,normal\n");
  CHECK_THROWS_KIND(read_csv(csv, "mem.csv"), ErrorKind::MalformedRecord);
}

TEST_CASE("HTTP message parsing") {
  const auto r = parse_http_message("GET /x HTTP/1.1\r\nA: 1\r\n\r\nbody\r\nmore", 1);
  CHECK(r.method == "GET");
  CHECK(r.target == "/x");
  REQUIRE(r.headers.size() == 1);
  CHECK(r.headers[0].value == "1");
  CHECK(r.body == "body\r\nmore");
  CHECK_THROWS_KIND(parse_http_message("", 3), ErrorKind::MalformedRecord);
  CHECK_THROWS_KIND(parse_http_message("GET\r\n\r\n", 3), ErrorKind::MalformedRecord);
}

TEST_CASE("save/load round trip is field-exact, including non-UTF-8 bodies") {
  TempDir dir;
  RawRequest a = test::make_request("POST", "/up?x=%41", ClassLabel::Attack,
                                    std::string("\xff\xfe\x00\x01 \\x41 tail\n", 16));
  add_header(a, "Content-Type", "application/octet-stream");
  add_header(a, "X-Multi", "one");
  add_header(a, "x-multi", "two");
  a.category = "sqli";
  RawRequest b = test::make_request("GET", "/é", ClassLabel::Unlabeled);
  RawRequest c = test::make_request("GET", "/n", ClassLabel::Normal, "a\tb");
  const Corpus original = test::make_corpus({a, b, c});

  save_corpus(original, dir / "c.jsonl");
  const Corpus reloaded = load_corpus(dir / "c.jsonl");
  CHECK(same_requests(original, reloaded));
  CHECK(reloaded.requests[0].body == a.body);
  CHECK(corpus_digest(original) == corpus_digest(reloaded));

  // The serialized form is plain valid UTF-8 text, one line per request.
  std::ifstream in(dir / "c.jsonl", std::ios::binary);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  CHECK(is_valid_utf8(text));
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("single-request corpus round trip") {
  TempDir dir;
  const Corpus one = test::make_corpus({test::make_request("GET", "/", ClassLabel::Normal)});
  save_corpus(one, dir / "one.jsonl");
  CHECK(same_requests(one, load_corpus(dir / "one.jsonl")));
}

TEST_CASE("saving an empty corpus or to an unwritable path fails") {
  TempDir dir;
  CHECK_THROWS_KIND(save_corpus(Corpus{}, dir / "e.jsonl"), ErrorKind::EmptyCorpus);
  const Corpus one = test::make_corpus({test::make_request("GET", "/")});
  CHECK_THROWS_KIND(save_corpus(one, dir / "missing-dir" / "x.jsonl"), ErrorKind::IoError);
  CHECK_THROWS_KIND(load_corpus(dir / "absent.jsonl"), ErrorKind::IoError);
}

TEST_CASE("loading is deterministic and digest ignores the source name") {
  TempDir dir;
  const Corpus c = test::make_corpus(
      {test::make_request("GET", "/a", ClassLabel::Normal), test::make_request("GET", "/b")},
      "first");
  save_corpus(c, dir / "c.jsonl");
  const Corpus x = load_corpus(dir / "c.jsonl");
  const Corpus y = load_corpus(dir / "c.jsonl");
  CHECK(same_requests(x, y));
  Corpus renamed = c;
  renamed.source_name = "second";
  CHECK(corpus_digest(c) == corpus_digest(renamed));
}

TEST_CASE("format is inferred from the extension") {
  CHECK(format_for_path("a.csv") == CorpusFormat::Csv);
  CHECK(format_for_path("a.CSV") == CorpusFormat::Csv);
  CHECK(format_for_path("a.jsonl") == CorpusFormat::Jsonl);
  CHECK(format_for_path("a") == CorpusFormat::Jsonl);
}

TEST_CASE("escape encoding round trips arbitrary bytes") {
  std::mt19937_64 gen(7);
  for (int t = 0; t < 2000; ++t) {
    std::string bytes(gen() % 40, '\0');
    for (auto &ch : bytes)
      ch = static_cast<char>(gen() & 0xff);
    const std::string escaped = escape_bytes(bytes);
    CHECK(is_valid_utf8(escaped));
    const auto back = unescape_bytes(escaped);
    REQUIRE(back.has_value());
    CHECK(*back == bytes);
  }
  CHECK(escape_bytes("a\\b") == "a\\\\b");
  CHECK(escape_bytes("\x01") == "\\x01");
  CHECK(escape_bytes("h\xc3\xa9") == "h\xc3\xa9");
  CHECK_FALSE(unescape_bytes("\\").has_value());
  CHECK_FALSE(unescape_bytes("\\x4").has_value());
  CHECK_FALSE(unescape_bytes("\\xZZ").has_value());
}

} // TEST_SUITE
