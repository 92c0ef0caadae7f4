#pragma once

// Per-pick value tables, Jimmy Johnson rescaling, and bootstrap bands, plus
// their plot-ready CSV emission.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "draftval/bootstrap.hpp"
#include "draftval/fit.hpp"
#include "draftval/model.hpp"

namespace draftval {

/// Reference chart keyed by pick number. CSV "pick,value" with optional
/// '#' comment lines and an optional header row.
class JjReference {
 public:
  explicit JjReference(std::map<int, double> values);

  static JjReference parse(std::istream& in);
  static JjReference load(const std::filesystem::path& path);

  /// Value of pick 1; the rescaling anchor.
  double top() const noexcept { return values_.begin()->second; }
  std::optional<double> at(int pick) const;
  int last_pick() const noexcept { return values_.rbegin()->first; }
  const std::map<int, double>& values() const noexcept { return values_; }

 private:
  std::map<int, double> values_;
};

struct ValueChart {
  std::vector<int> picks;
  std::vector<double> l1_values;
  std::vector<double> l2_values;
  std::vector<double> l1_scaled;
  std::vector<double> l2_scaled;
  std::vector<std::optional<double>> jj_values;  // empty past the reference table
  double scale = 0.0;                            // reference value of pick 1
};

/// Raw curve values for picks 1..n and the same values times the reference
/// chart's pick-1 value.
ValueChart build_chart(const CurveParams& l1_params, const CurveParams& l2_params,
                       const JjReference& jj, int n = 256);

struct CurveBand {
  std::vector<int> picks;
  std::vector<double> point_curve;
  std::vector<double> lower_band;
  std::vector<double> upper_band;
  double level = 0.95;
};

/// Pointwise percentile band: at each pick, the (1-level)/2 and
/// 1-(1-level)/2 percentiles of the replicate curves' values.
CurveBand build_band(const CurveParams& fitted, std::span<const CurveParams> replicates, int n,
                     double level);
CurveBand build_band(const FitResult& fitted, const BootstrapResult& boot, int n, double level);

enum class ChartSchema {
  appendix,  // Pick,L1_value,L2_value,Jimmy_Johnson (scaled values)
  full,      // Pick,L1_value,L2_value,L1_scaled,L2_scaled,Jimmy_Johnson (raw + scaled)
};

/// Six-decimal fixed formatting used by every emitted table.
std::string format_value(double v);

void write_chart_csv(std::ostream& out, const ValueChart& chart, ChartSchema schema);
void write_band_csv(std::ostream& out, const CurveBand& band);

/// File variants; throw Error(io) when the destination cannot be written.
void emit_plot_data(const ValueChart& chart, const std::filesystem::path& destination,
                    ChartSchema schema = ChartSchema::appendix);
void emit_plot_data(const CurveBand& band, const std::filesystem::path& destination);

}  // namespace draftval
