#pragma once

// Structured `key = value` report files written by the CLI and read back by
// the chart/evaluate subcommands and the service. Doubles are written with 17
// significant digits so a report round-trips without loss.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "draftval/bootstrap.hpp"
#include "draftval/data.hpp"
#include "draftval/fit.hpp"

namespace draftval {

class KeyValues {
 public:
  void set(const std::string& key, std::string value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  void set(const std::string& key, std::uint64_t value);
  void set(const std::string& key, int value) { set(key, static_cast<std::int64_t>(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

  std::optional<std::string> get(const std::string& key) const;
  /// Throw Error(ingestion) when the key is missing or malformed.
  const std::string& require(const std::string& key) const;
  double require_double(const std::string& key) const;
  std::int64_t require_int(const std::string& key) const;
  std::uint64_t require_uint(const std::string& key) const;
  bool require_bool(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
    return entries_;
  }

  void write(std::ostream& out) const;
  static KeyValues parse(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static KeyValues load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_exact(double v);

struct FitReport {
  LossKind loss = LossKind::mae;
  NormOrder p = NormOrder::l1();
  FitResult result;
  CurveParams initial{0.146, 0.698};
  int max_iterations = 1000;
  std::string dataset;
  std::size_t trade_count = 0;
  std::optional<IngestReport> ingest;
};

KeyValues to_key_values(const FitReport& report);
FitReport fit_report_from(const KeyValues& kv);
void save_fit_report(const std::filesystem::path& path, const FitReport& report);
FitReport load_fit_report(const std::filesystem::path& path);

struct BootstrapReport {
  LossKind loss = LossKind::mae;
  NormOrder p = NormOrder::l1();
  BootstrapResult result;
  FitResult point_fit;
  std::string dataset;
  std::size_t trade_count = 0;
};

KeyValues to_key_values(const BootstrapReport& report, const std::string& replicates_file);
/// Writes the report and, next to it, `<report>.replicates.csv` holding one
/// line per successful replicate (replicate,lambda,beta).
void save_bootstrap_report(const std::filesystem::path& path, const BootstrapReport& report);
BootstrapReport load_bootstrap_report(const std::filesystem::path& path);

}  // namespace draftval
