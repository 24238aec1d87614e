#include "miwaf/synthgen.hpp"

#include "miwaf/errors.hpp"
#include "miwaf/preprocess.hpp"
#include "miwaf/rng.hpp"

#include <array>
#include <cstdio>
#include <span>

namespace miwaf {

namespace {

#include "payload_fixtures.inc"

std::vector<std::string> parse_fixture(std::string_view file) {
  std::vector<std::string> out;
  while (!file.empty()) {
    const auto nl = file.find('\n');
    std::string_view line = file.substr(0, nl);
    file = nl == std::string_view::npos ? std::string_view{} : file.substr(nl + 1);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    if (line.empty() || line.front() == '#')
      continue;
    out.emplace_back(line);
  }
  return out;
}

// Benign vocabulary. None of these words occurs as a token of any payload
// fixture, which keeps normal and attack vocabularies disjoint.
constexpr std::array<std::string_view, 48> k_words = {
    "news",    "about",   "contact", "blog",     "article", "gallery", "events",  "archive",
    "profile", "welcome", "summer",  "garden",   "recipes", "travel",  "music",   "books",
    "weather", "sports",  "science", "history",  "photos",  "press",   "careers", "support",
    "pricing", "faq",     "terms",   "privacy",  "team",    "forum",   "topics",  "latest",
    "popular", "review",  "guide",   "tutorial", "classic", "modern",  "local",   "global",
    "winter",  "autumn",  "spring",  "coffee",   "bicycle", "river",   "mountain", "harbor"};

constexpr std::array<std::string_view, 16> k_names = {
    "alice", "bruno", "chen",  "dara",   "elena", "farid", "greta", "hiro",
    "ines",  "jonas", "kemal", "lucia",  "mateo", "nadia", "oskar", "priya"};

constexpr std::array<std::string_view, 4> k_user_agents = {
    "Mozilla/5.0 (X11; Linux x86_64) Gecko/20100101 Firefox/118.0",
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 Chrome/117.0",
    "Mozilla/5.0 (Macintosh; Intel Mac OS X 13_5) AppleWebKit/605.1.15 Safari/605.1.15",
    "curl/8.2.1"};

constexpr std::array<std::string_view, 2> k_accepts = {"text/html,application/xhtml+xml",
                                                       "*/*"};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

template <std::size_t N> std::string pick(Rng &rng, const std::array<std::string_view, N> &pool) {
  return std::string(pool[rng.below(N)]);
}

std::string placeholder_value(std::string_view kind, Rng &rng) {
  if (kind == "id")
    return std::to_string(1 + rng.below(999));
  if (kind == "name")
    return pick(rng, k_names);
  return pick(rng, k_words);
}

/// Expands a template. When inject is set it is appended to the target,
/// i.e. to the value of the final placeholder, so the template part of the
/// target stays a token that normal traffic produces as well.
std::string expand(std::string_view tmpl, Rng &rng, const std::string *inject) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      if (close == std::string_view::npos)
        throw Error(ErrorKind::InvalidArgument, "unterminated placeholder in template '" +
                                                    std::string(tmpl) + "'");
      out += placeholder_value(tmpl.substr(i + 1, close - i - 1), rng);
      i = close + 1;
    } else {
      out += tmpl[i++];
    }
  }
  if (inject)
    out += *inject;
  return out;
}

RawRequest base_request(const SynthSpec &spec, Rng &rng, const std::string *inject) {
  RawRequest req;
  const auto &tmpl = spec.path_templates[rng.below(spec.path_templates.size())];
  req.target = expand(tmpl, rng, inject);
  const bool post = rng.below(5) == 0;
  req.method = post ? "POST" : "GET";
  add_header(req, "Host", "shop.example.org");
  add_header(req, "User-Agent", pick(rng, k_user_agents));
  add_header(req, "Accept", pick(rng, k_accepts));
  char session[32];
  // Sessions come from a small pool so, as in real traffic, they recur.
  std::snprintf(session, sizeof session, "session=%016llx",
                static_cast<unsigned long long>(splitmix(rng.below(256))));
  add_header(req, "Cookie", session);
  if (spec.noise_tokens_per_request > 0) {
    std::string noise;
    for (std::size_t k = 0; k < spec.noise_tokens_per_request; ++k) {
      if (k)
        noise += ' ';
      noise += spec.noise_vocabulary[rng.below(spec.noise_vocabulary.size())];
    }
    add_header(req, "X-Noise", noise);
  }
  if (post) {
    req.body = "comment=" + pick(rng, k_words) + "+" + pick(rng, k_words) +
               "&form_id=" + pick(rng, k_words);
    add_header(req, "Content-Type", "application/x-www-form-urlencoded");
    add_header(req, "Content-Length", std::to_string(req.body.size()));
  }
  return req;
}

struct AttackPayload {
  std::string text;
  std::string category;
};

std::vector<AttackPayload> payload_pool(const SynthSpec &spec) {
  std::vector<AttackPayload> pool;
  if (!spec.custom_payloads.empty()) {
    for (const auto &p : spec.custom_payloads)
      pool.push_back({p, "custom"});
    return pool;
  }
  for (auto family : spec.families)
    for (const auto &p : payloads(family))
      pool.push_back({p, std::string(to_string(family))});
  return pool;
}

} // namespace

std::string_view to_string(PayloadFamily family) noexcept {
  switch (family) {
  case PayloadFamily::Sqli:
    return "sqli";
  case PayloadFamily::Xss:
    return "xss";
  case PayloadFamily::Cmdi:
    return "cmdi";
  case PayloadFamily::Traversal:
    return "traversal";
  }
  return "unknown";
}

std::optional<PayloadFamily> parse_payload_family(std::string_view name) {
  for (auto family : all_payload_families())
    if (to_string(family) == name)
      return family;
  return std::nullopt;
}

std::vector<PayloadFamily> all_payload_families() {
  return {PayloadFamily::Sqli, PayloadFamily::Xss, PayloadFamily::Cmdi, PayloadFamily::Traversal};
}

const std::vector<std::string> &payloads(PayloadFamily family) {
  static const std::vector<std::string> sqli = parse_fixture(k_sqli_file);
  static const std::vector<std::string> xss = parse_fixture(k_xss_file);
  static const std::vector<std::string> cmdi = parse_fixture(k_cmdi_file);
  static const std::vector<std::string> traversal = parse_fixture(k_traversal_file);
  switch (family) {
  case PayloadFamily::Sqli:
    return sqli;
  case PayloadFamily::Xss:
    return xss;
  case PayloadFamily::Cmdi:
    return cmdi;
  case PayloadFamily::Traversal:
    return traversal;
  }
  return sqli;
}

std::vector<std::string> default_path_templates() {
  return {"/index.php?page={word}",
          "/node/{id}",
          "/node/{id}?view={word}",
          "/user/{name}/profile?tab={word}",
          "/search?sort={word}&q={word}",
          "/blog/{word}/{id}",
          "/shop/item?ref={word}&id={id}",
          "/gallery/{word}?author={name}",
          "/api/v1/articles?page={id}&tag={word}",
          "/static/css/site.css?v={id}"};
}

void SynthSpec::validate() const {
  if (path_templates.empty())
    throw Error(ErrorKind::InvalidArgument, "synthetic corpus needs at least one path template");
  if (n_attack > 0 && families.empty() && custom_payloads.empty())
    throw Error(ErrorKind::InvalidArgument, "attacks requested without payload families");
  if (noise_tokens_per_request > 0 && noise_vocabulary.empty())
    throw Error(ErrorKind::InvalidArgument, "noise tokens requested from an empty vocabulary");
}

Corpus generate(const SynthSpec &spec) {
  spec.validate();
  const auto pool = payload_pool(spec);

  Corpus corpus;
  corpus.source_name = "synthgen:seed=" + std::to_string(spec.seed);
  corpus.requests.reserve(spec.n_normal + spec.n_attack);
  const std::uint64_t base = splitmix(spec.seed);
  for (std::size_t i = 0; i < spec.n_normal + spec.n_attack; ++i) {
    Rng rng(splitmix(base ^ static_cast<std::uint64_t>(i)));
    if (i < spec.n_normal) {
      RawRequest req = base_request(spec, rng, nullptr);
      req.label = ClassLabel::Normal;
      corpus.requests.push_back(std::move(req));
      continue;
    }
    // Payloads cycle in pool order so every fixture is used once the attack
    // count reaches the pool size.
    const auto &payload = pool[(i - spec.n_normal) % pool.size()];
    std::string inject = percent_encode(" " + payload.text);
    if (rng.below(4) == 0)
      inject = percent_encode(inject);
    RawRequest req = base_request(spec, rng, &inject);
    req.label = ClassLabel::Attack;
    req.category = payload.category;
    corpus.requests.push_back(std::move(req));
  }
  return corpus;
}

} // namespace miwaf
