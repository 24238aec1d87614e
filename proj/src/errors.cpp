#include "miwaf/errors.hpp"

namespace miwaf {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::MalformedRecord: return "MalformedRecord";
  case ErrorKind::EmptyCorpus: return "EmptyCorpus";
  case ErrorKind::IoError: return "IoError";
  case ErrorKind::LengthMismatch: return "LengthMismatch";
  case ErrorKind::SingleClass: return "SingleClass";
  case ErrorKind::OutOfRange: return "OutOfRange";
  case ErrorKind::DimMismatch: return "DimMismatch";
  case ErrorKind::DegenerateInput: return "DegenerateInput";
  case ErrorKind::NonConvergence: return "NonConvergence";
  case ErrorKind::NoLabeledData: return "NoLabeledData";
  case ErrorKind::EmptySet: return "EmptySet";
  case ErrorKind::Infeasible: return "Infeasible";
  case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string &what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

MalformedRecord::MalformedRecord(std::size_t line, const std::string &detail)
    : Error(ErrorKind::MalformedRecord, "line " + std::to_string(line) + ": " + detail),
      line_(line) {}

NonConvergence::NonConvergence(std::size_t max_iter, double gap)
    : Error(ErrorKind::NonConvergence,
            "KKT gap " + std::to_string(gap) + " still above tolerance after " +
                std::to_string(max_iter) + " iterations"),
      max_iter_(max_iter), gap_(gap) {}

} // namespace miwaf
