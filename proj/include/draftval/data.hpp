#pragma once

// Trade corpus ingestion: CSV rows -> validated Trade records plus an
// accounting of every dropped row.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "draftval/model.hpp"

namespace draftval {

/// Which CSV columns hold what. Every named column must exist in the header.
struct ColumnMap {
  std::string year_column = "season";
  std::string up_picks_column = "up_picks";
  std::string down_picks_column = "down_picks";
  std::string id_column;  // empty: use the 1-based data row number
  std::vector<std::string> future_flag_columns;
  std::vector<std::string> future_markers{"future"};  // case-insensitive substrings
  char delimiter_within_cell = ',';

  /// Reads `key = value` lines; '#' starts a comment. Keys are the field
  /// names above, list values are comma separated. Unset keys keep their
  /// defaults. Unknown keys throw Error(usage).
  static ColumnMap parse(std::istream& in);
  static ColumnMap load(const std::filesystem::path& path);
};

struct YearRange {
  int min = 2006;
  int max = 2023;

  bool contains(int year) const noexcept { return year >= min && year <= max; }
};

enum class RejectReason {
  empty_up_side,
  empty_down_side,
  duplicate_pick,
  pick_out_of_range,
};

std::string_view to_string(RejectReason reason) noexcept;

/// Checks every Trade/TradeSide invariant without throwing.
std::variant<Trade, RejectReason> validate_trade(std::span<const int> up,
                                                 std::span<const int> down, int year,
                                                 std::string id = {});

struct IngestWarning {
  std::string row_id;
  std::string reason;
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t trades_kept = 0;
  std::size_t rows_dropped_year_filter = 0;
  std::size_t rows_dropped_future_picks = 0;
  std::size_t rows_dropped_parse_error = 0;
  std::vector<IngestWarning> warnings;

  bool reconciles() const noexcept {
    return rows_read == trades_kept + rows_dropped_year_filter + rows_dropped_future_picks +
                            rows_dropped_parse_error;
  }
};

struct LoadedTrades {
  std::vector<Trade> trades;
  IngestReport report;
};

/// Parses and filters a trade CSV. Rows outside `years`, rows involving
/// future picks and malformed rows are dropped and counted; with `strict`
/// any warning (malformed row, empty result) throws Error(ingestion).
/// A missing file throws Error(io); a missing mapped column Error(ingestion).
LoadedTrades load_trades(const std::filesystem::path& path, const ColumnMap& map,
                         YearRange years = {}, bool strict = false);
LoadedTrades read_trades(std::istream& in, const ColumnMap& map, YearRange years = {},
                         bool strict = false);

/// Audit CSV: id,year,up_picks,down_picks with picks joined by '|'.
void write_normalized_csv(std::ostream& out, std::span<const Trade> trades);

}  // namespace draftval
