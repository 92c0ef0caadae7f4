#include "draftval/error.hpp"

namespace draftval {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::usage: return "usage";
    case ErrorKind::ingestion: return "ingestion";
    case ErrorKind::corpus_empty: return "empty corpus";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::io: return "I/O";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::usage:
    case ErrorKind::invalid_argument:
      return 2;
    case ErrorKind::ingestion:
    case ErrorKind::corpus_empty:
      return 3;
    case ErrorKind::numerical:
      return 4;
    case ErrorKind::io:
      return 5;
  }
  return 1;
}

}  // namespace draftval
