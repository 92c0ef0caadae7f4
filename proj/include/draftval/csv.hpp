#pragma once

// Minimal RFC 4180 reader: comma separated, double-quoted fields may contain
// commas, doubled quotes and line breaks. CRLF and LF line endings accepted.

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace draftval::csv {

using Row = std::vector<std::string>;

class Reader {
 public:
  explicit Reader(std::istream& in, char separator = ',') : in_(in), separator_(separator) {}

  /// Next record, or nullopt at end of input. Throws Error(ingestion) on an
  /// unterminated quoted field.
  std::optional<Row> next();

  /// 1-based line number where the last returned record started.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  char separator_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

/// Quotes a field when it contains a separator, quote or line break.
std::string escape(const std::string& field, char separator = ',');

}  // namespace draftval::csv
