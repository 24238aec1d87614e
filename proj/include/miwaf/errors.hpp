#ifndef MIWAF_ERRORS_HPP
#define MIWAF_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace miwaf {

enum class ErrorKind {
  MalformedRecord,
  EmptyCorpus,
  IoError,
  LengthMismatch,
  SingleClass,
  OutOfRange,
  DimMismatch,
  DegenerateInput,
  NonConvergence,
  NoLabeledData,
  EmptySet,
  Infeasible,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Base of every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what);

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// A record that could not be parsed. line is 1-based within its source.
class MalformedRecord : public Error {
public:
  MalformedRecord(std::size_t line, const std::string &detail);

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class NonConvergence : public Error {
public:
  NonConvergence(std::size_t max_iter, double gap);

  std::size_t max_iter() const noexcept { return max_iter_; }
  double gap() const noexcept { return gap_; }

private:
  std::size_t max_iter_;
  double gap_;
};

} // namespace miwaf

#endif
