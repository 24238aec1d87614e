#include "miwaf/run_config.hpp"

#include "miwaf/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

namespace miwaf {

namespace {

using Scalar = std::variant<std::string, double, bool>;
using Value = std::variant<Scalar, std::vector<Scalar>>;

[[noreturn]] void config_error(std::size_t line, const std::string &what) {
  throw Error(ErrorKind::InvalidArgument, "config line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

class ValueParser {
public:
  ValueParser(std::string_view text, std::size_t line) : s_(text), line_(line) {}

  Value parse() {
    skip_ws();
    Value v;
    if (peek() == '[') {
      ++pos_;
      std::vector<Scalar> items;
      skip_ws();
      while (peek() != ']') {
        items.push_back(scalar());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          skip_ws();
        } else if (peek() != ']') {
          config_error(line_, "expected ',' or ']' in array");
        }
      }
      ++pos_;
      v = std::move(items);
    } else {
      v = scalar();
    }
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '#')
      config_error(line_, "trailing characters after value");
    return v;
  }

private:
  char peek() const {
    if (pos_ >= s_.size())
      config_error(line_, "unexpected end of value");
    return s_[pos_];
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t'))
      ++pos_;
  }

  Scalar scalar() {
    const char c = peek();
    if (c == '"') {
      ++pos_;
      std::string out;
      while (peek() != '"') {
        if (s_[pos_] == '\\') {
          ++pos_;
          const char e = peek();
          out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
        } else {
          out += s_[pos_];
        }
        ++pos_;
      }
      ++pos_;
      return out;
    }
    std::size_t end = pos_;
    while (end < s_.size() && s_[end] != ',' && s_[end] != ']' && s_[end] != ' ' &&
           s_[end] != '\t' && s_[end] != '#')
      ++end;
    const std::string word(s_.substr(pos_, end - pos_));
    pos_ = end;
    if (word == "true")
      return true;
    if (word == "false")
      return false;
    try {
      std::size_t used = 0;
      const double d = std::stod(word, &used);
      if (used == word.size())
        return d;
    } catch (const std::exception &) {
    }
    config_error(line_, "cannot parse value '" + word + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

struct Entry {
  Value value;
  std::size_t line;

  const Scalar &scalar() const {
    if (const auto *s = std::get_if<Scalar>(&value))
      return *s;
    config_error(line, "expected a single value, not an array");
  }

  std::string str() const {
    if (const auto *s = std::get_if<std::string>(&scalar()))
      return *s;
    config_error(line, "expected a string");
  }

  double number() const {
    if (const auto *d = std::get_if<double>(&scalar()))
      return *d;
    config_error(line, "expected a number");
  }

  std::uint64_t count() const {
    const double d = number();
    if (d < 0 || d != std::floor(d))
      config_error(line, "expected a non-negative integer");
    return static_cast<std::uint64_t>(d);
  }

  bool boolean() const {
    if (const auto *b = std::get_if<bool>(&scalar()))
      return *b;
    config_error(line, "expected true or false");
  }

  std::vector<Scalar> array() const {
    if (const auto *a = std::get_if<std::vector<Scalar>>(&value))
      return *a;
    return {scalar()};
  }

  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto &s : array()) {
      const auto *d = std::get_if<double>(&s);
      if (!d)
        config_error(line, "expected an array of numbers");
      out.push_back(*d);
    }
    return out;
  }

  std::set<std::string> strings() const {
    std::set<std::string> out;
    for (const auto &s : array()) {
      const auto *str = std::get_if<std::string>(&s);
      if (!str)
        config_error(line, "expected an array of strings");
      out.insert(*str);
    }
    return out;
  }
};

} // namespace

std::vector<double> default_nu_grid() { return {0.01, 0.05, 0.1, 0.2}; }
std::vector<double> default_gamma_grid() { return {0.1, 0.5, 1.0, 2.0}; }

void RunConfig::validate() const {
  auto fail = [](const std::string &what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (n_features < 1)
    fail("n_features must be at least 1");
  if (!(split.train > 0 && split.validation > 0 && split.test > 0))
    fail("split fractions must be positive");
  if (split.train + split.validation + split.test > 1.0 + 1e-9)
    fail("split fractions must sum to at most 1");
  if (!(nu > 0 && nu <= 1))
    fail("nu must lie in (0, 1]");
  if (!(gamma > 0))
    fail("gamma must be positive");
  for (double v : nu_grid)
    if (!(v > 0 && v <= 1))
      fail("nu grid values must lie in (0, 1]");
  for (double v : gamma_grid)
    if (!(v > 0))
      fail("gamma grid values must be positive");
  if (!(attack_holdout >= 0 && attack_holdout < 1))
    fail("attack_holdout must lie in [0, 1)");
  if (!(unlabeled_ratio > 0))
    fail("unlabeled_ratio must be positive");
  if (!(train_options.tol > 0))
    fail("tol must be positive");
}

void apply_config_text(RunConfig &cfg, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == '[')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      config_error(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const Entry e{ValueParser(line.substr(eq + 1), line_no).parse(), line_no};

    if (key == "normal_corpus")
      cfg.normal_corpus = e.str();
    else if (key == "attack_corpus")
      cfg.attack_corpus = e.str();
    else if (key == "header_denylist")
      cfg.preprocess.filter = HeaderFilter::denylist(e.strings());
    else if (key == "header_allowlist")
      cfg.preprocess.filter = HeaderFilter::allowlist(e.strings());
    else if (key == "include_body")
      cfg.preprocess.include_body = e.boolean();
    else if (key == "n_features")
      cfg.n_features = e.count();
    else if (key == "nu")
      cfg.nu = e.number();
    else if (key == "gamma")
      cfg.gamma = e.number();
    else if (key == "nu_grid")
      cfg.nu_grid = e.numbers();
    else if (key == "gamma_grid")
      cfg.gamma_grid = e.numbers();
    else if (key == "estimator")
      cfg.estimator = parse_estimator(e.str());
    else if (key == "seed")
      cfg.seed = e.count();
    else if (key == "split") {
      const auto f = e.numbers();
      if (f.size() != 3)
        config_error(line_no, "split needs [train, validation, test]");
      cfg.split = {f[0], f[1], f[2]};
    } else if (key == "vector_scaling")
      cfg.scaling = parse_vector_scaling(e.str());
    else if (key == "theta_policy")
      cfg.theta_policy = parse_theta_policy(e.str());
    else if (key == "attack_holdout")
      cfg.attack_holdout = e.number();
    else if (key == "unlabeled_ratio")
      cfg.unlabeled_ratio = e.number();
    else if (key == "tol")
      cfg.train_options.tol = e.number();
    else if (key == "max_iter")
      cfg.train_options.max_iter = e.count();
    else if (key == "cache_rows")
      cfg.train_options.cache_rows = e.count();
    else if (key == "threads")
      cfg.threads = static_cast<unsigned>(e.count());
    else
      config_error(line_no, "unknown key '" + key + "'");
  }
}

RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig cfg;
  apply_config_text(cfg, buf.str());
  // Corpus paths are relative to the config file.
  const auto base = path.parent_path();
  for (auto *p : {&cfg.normal_corpus, &cfg.attack_corpus})
    if (!p->empty() && p->is_relative())
      *p = base / *p;
  return cfg;
}

} // namespace miwaf
