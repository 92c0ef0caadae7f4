#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace draftval {

enum class ErrorKind {
  invalid_argument,  // a type invariant or precondition was violated
  usage,             // bad command-line or request input
  ingestion,         // CSV schema or content problem
  corpus_empty,      // no trades left to fit
  numerical,         // non-finite objective, failed replicates
  io,                // file could not be opened, read or written
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit status for the command-line driver: 0 ok, 2 usage,
// 3 ingestion, 4 numerical, 5 I/O.
int exit_code(ErrorKind kind) noexcept;

}  // namespace draftval
