#include "draftval/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <regex>
#include <sstream>
#include <unordered_map>

#include "draftval/csv.hpp"
#include "draftval/error.hpp"

namespace draftval {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split_list(std::string_view text, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(delimiter, start);
    const std::string token =
        trim(text.substr(start, end == std::string_view::npos ? std::string_view::npos
                                                               : end - start));
    if (!token.empty()) out.push_back(token);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::optional<int> parse_int(std::string_view s) {
  int value = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

bool truthy(std::string_view cell) {
  const std::string v = lowercase(trim(cell));
  return v == "1" || v == "true" || v == "t" || v == "yes" || v == "y" || v == "x";
}

// "[1, 14]", "(1,14)", "c(1, 14)" and "{1,14}" all reduce to "1, 14".
std::string strip_wrapping(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && (s[0] == 'c' || s[0] == 'C') && s[1] == '(') s.erase(0, 1);
  if (s.size() >= 2) {
    const char open = s.front();
    const char close = s.back();
    if ((open == '[' && close == ']') || (open == '(' && close == ')') ||
        (open == '{' && close == '}')) {
      s = trim(std::string_view(s).substr(1, s.size() - 2));
    }
  }
  return s;
}

std::string strip_quotes(std::string s) {
  if (s.size() >= 2 && (s.front() == '\'' || s.front() == '"') && s.back() == s.front()) {
    return trim(std::string_view(s).substr(1, s.size() - 2));
  }
  return s;
}

// A pick from another year's draft: a configured marker substring, or a
// "YYYY R<k>" / "YYYY-round-k" style token naming a different season.
bool is_future_token(const std::string& token, int row_year, const ColumnMap& map) {
  const std::string lower = lowercase(token);
  for (const std::string& marker : map.future_markers) {
    if (!marker.empty() && lower.find(lowercase(marker)) != std::string::npos) return true;
  }
  static const std::regex season_round(R"(^\s*(\d{4})\s*[-_ ]?\s*r(?:ound|d)?\s*[-_ ]?\s*\d+)",
                                       std::regex::icase);
  std::smatch m;
  if (std::regex_search(lower, m, season_round)) {
    return std::stoi(m[1].str()) != row_year;
  }
  return false;
}

enum class CellOutcome { ok, future, malformed };

struct ParsedCell {
  CellOutcome outcome = CellOutcome::ok;
  std::vector<int> picks;
  std::string bad_token;
};

ParsedCell parse_picks(const std::string& cell, int row_year, const ColumnMap& map) {
  ParsedCell out;
  for (std::string token : split_list(strip_wrapping(cell), map.delimiter_within_cell)) {
    token = strip_quotes(token);
    if (is_future_token(token, row_year, map)) {
      out.outcome = CellOutcome::future;
      return out;
    }
    const auto value = parse_int(token);
    if (!value) {
      out.outcome = CellOutcome::malformed;
      out.bad_token = token;
      return out;
    }
    out.picks.push_back(*value);
  }
  return out;
}

std::size_t column_index(const csv::Row& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw Error(ErrorKind::ingestion, "column '" + name + "' not found in CSV header");
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::string join_picks(const TradeSide& side) {
  std::string out;
  for (PickNumber n : side.picks()) {
    if (!out.empty()) out.push_back('|');
    out += std::to_string(n.value());
  }
  return out;
}

}  // namespace

ColumnMap ColumnMap::parse(std::istream& in) {
  ColumnMap map;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::usage,
                  "column map line " + std::to_string(line_no) + " is not 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "year_column") {
      map.year_column = value;
    } else if (key == "up_picks_column") {
      map.up_picks_column = value;
    } else if (key == "down_picks_column") {
      map.down_picks_column = value;
    } else if (key == "id_column") {
      map.id_column = value;
    } else if (key == "future_flag_columns") {
      map.future_flag_columns = split_list(value, ',');
    } else if (key == "future_markers") {
      map.future_markers = split_list(value, ',');
    } else if (key == "delimiter_within_cell") {
      if (value.size() != 1) {
        throw Error(ErrorKind::usage, "delimiter_within_cell must be a single character");
      }
      map.delimiter_within_cell = value[0];
    } else {
      throw Error(ErrorKind::usage, "unknown column map key '" + key + "'");
    }
  }
  return map;
}

ColumnMap ColumnMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open column map " + path.string());
  return parse(in);
}

std::string_view to_string(RejectReason reason) noexcept {
  switch (reason) {
    case RejectReason::empty_up_side: return "empty_up_side";
    case RejectReason::empty_down_side: return "empty_down_side";
    case RejectReason::duplicate_pick: return "duplicate_pick";
    case RejectReason::pick_out_of_range: return "pick_out_of_range";
  }
  return "unknown";
}

std::variant<Trade, RejectReason> validate_trade(std::span<const int> up,
                                                 std::span<const int> down, int year,
                                                 std::string id) {
  if (up.empty()) return RejectReason::empty_up_side;
  if (down.empty()) return RejectReason::empty_down_side;
  auto check = [](std::span<const int> side) -> std::optional<RejectReason> {
    for (int n : side) {
      if (n < PickNumber::kMin || n > PickNumber::kMax) return RejectReason::pick_out_of_range;
    }
    std::vector<int> sorted(side.begin(), side.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      return RejectReason::duplicate_pick;
    }
    return std::nullopt;
  };
  if (auto r = check(up)) return *r;
  if (auto r = check(down)) return *r;
  auto side = [](std::span<const int> raw) {
    std::vector<PickNumber> picks;
    picks.reserve(raw.size());
    for (int n : raw) picks.emplace_back(n);
    return TradeSide(std::move(picks));
  };
  return Trade{side(up), side(down), year, std::move(id)};
}

LoadedTrades read_trades(std::istream& in, const ColumnMap& map, YearRange years, bool strict) {
  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw Error(ErrorKind::ingestion, "CSV input has no header row");
  if (!header->empty() && header->front().rfind("\xEF\xBB\xBF", 0) == 0) {
    header->front().erase(0, 3);
  }
  for (auto& name : *header) name = trim(name);

  const std::size_t year_col = column_index(*header, map.year_column);
  const std::size_t up_col = column_index(*header, map.up_picks_column);
  const std::size_t down_col = column_index(*header, map.down_picks_column);
  const std::optional<std::size_t> id_col =
      map.id_column.empty() ? std::nullopt
                            : std::optional<std::size_t>(column_index(*header, map.id_column));
  std::vector<std::size_t> flag_cols;
  for (const auto& name : map.future_flag_columns) flag_cols.push_back(column_index(*header, name));

  LoadedTrades out;
  IngestReport& report = out.report;
  auto warn = [&](const std::string& row_id, const std::string& reason) {
    if (strict) {
      throw Error(ErrorKind::ingestion, "row " + row_id + ": " + reason);
    }
    report.warnings.push_back({row_id, reason});
    ++report.rows_dropped_parse_error;
  };

  std::size_t data_row = 0;
  while (auto row = reader.next()) {
    if (row->size() == 1 && trim(row->front()).empty()) continue;  // blank line
    ++data_row;
    ++report.rows_read;
    std::string row_id = std::to_string(data_row);
    if (id_col && *id_col < row->size() && !trim((*row)[*id_col]).empty()) {
      row_id = trim((*row)[*id_col]);
    }
    if (row->size() != header->size()) {
      warn(row_id, "expected " + std::to_string(header->size()) + " fields, found " +
                       std::to_string(row->size()));
      continue;
    }
    const auto year = parse_int(trim((*row)[year_col]));
    if (!year) {
      warn(row_id, "unparsable year '" + (*row)[year_col] + "'");
      continue;
    }
    if (!years.contains(*year)) {
      ++report.rows_dropped_year_filter;
      continue;
    }
    const bool flagged = std::any_of(flag_cols.begin(), flag_cols.end(),
                                     [&](std::size_t c) { return truthy((*row)[c]); });
    const ParsedCell up = parse_picks((*row)[up_col], *year, map);
    const ParsedCell down = parse_picks((*row)[down_col], *year, map);
    if (flagged || up.outcome == CellOutcome::future || down.outcome == CellOutcome::future) {
      ++report.rows_dropped_future_picks;
      continue;
    }
    if (up.outcome == CellOutcome::malformed || down.outcome == CellOutcome::malformed) {
      const std::string& bad = up.outcome == CellOutcome::malformed ? up.bad_token : down.bad_token;
      warn(row_id, "unparsable pick token '" + bad + "'");
      continue;
    }
    auto validated = validate_trade(up.picks, down.picks, *year, row_id);
    if (const auto* reason = std::get_if<RejectReason>(&validated)) {
      warn(row_id, "invalid trade: " + std::string(to_string(*reason)));
      continue;
    }
    out.trades.push_back(std::move(std::get<Trade>(validated)));
    ++report.trades_kept;
  }

  if (out.trades.empty()) {
    if (strict) throw Error(ErrorKind::ingestion, "no trades left after filtering");
    report.warnings.push_back({"", "no trades left after filtering"});
  }
  return out;
}

LoadedTrades load_trades(const std::filesystem::path& path, const ColumnMap& map,
                         YearRange years, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open trade file " + path.string());
  return read_trades(in, map, years, strict);
}

void write_normalized_csv(std::ostream& out, std::span<const Trade> trades) {
  out << "id,year,up_picks,down_picks\n";
  for (const Trade& t : trades) {
    out << csv::escape(t.id) << ',' << t.year << ',' << join_picks(t.up) << ','
        << join_picks(t.down) << '\n';
  }
}

}  // namespace draftval
