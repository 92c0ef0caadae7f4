#include "draftval/chart.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "draftval/csv.hpp"
#include "draftval/error.hpp"

namespace draftval {

JjReference::JjReference(std::map<int, double> values) : values_(std::move(values)) {
  if (values_.empty() || values_.begin()->first != 1) {
    throw Error(ErrorKind::ingestion, "reference chart must include pick 1");
  }
  for (const auto& [pick, value] : values_) {
    if (pick < 1 || !std::isfinite(value) || value <= 0.0) {
      throw Error(ErrorKind::ingestion, "reference chart has an invalid row for pick " +
                                            std::to_string(pick));
    }
  }
}

JjReference JjReference::parse(std::istream& in) {
  std::map<int, double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    csv::Reader reader(fields);
    const auto row = reader.next();
    if (!row || row->size() < 2) {
      throw Error(ErrorKind::ingestion, "reference chart row '" + line + "' is not pick,value");
    }
    try {
      std::size_t used = 0;
      const int pick = std::stoi((*row)[0], &used);
      const double value = std::stod((*row)[1]);
      values[pick] = value;
    } catch (const std::logic_error&) {
      if (values.empty()) continue;  // header row
      throw Error(ErrorKind::ingestion, "reference chart row '" + line + "' is not numeric");
    }
  }
  return JjReference(std::move(values));
}

JjReference JjReference::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open reference chart " + path.string());
  return parse(in);
}

std::optional<double> JjReference::at(int pick) const {
  const auto it = values_.find(pick);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

ValueChart build_chart(const CurveParams& l1_params, const CurveParams& l2_params,
                       const JjReference& jj, int n) {
  if (n < 1 || n > PickNumber::kMax) {
    throw Error(ErrorKind::invalid_argument, "chart length must lie in [1, 1024]");
  }
  ValueChart chart;
  chart.scale = jj.top();
  for (int pick = 1; pick <= n; ++pick) {
    const double l1 = pick_value(PickNumber(pick), l1_params);
    const double l2 = pick_value(PickNumber(pick), l2_params);
    chart.picks.push_back(pick);
    chart.l1_values.push_back(l1);
    chart.l2_values.push_back(l2);
    chart.l1_scaled.push_back(l1 * chart.scale);
    chart.l2_scaled.push_back(l2 * chart.scale);
    chart.jj_values.push_back(jj.at(pick));
  }
  return chart;
}

CurveBand build_band(const CurveParams& fitted, std::span<const CurveParams> replicates, int n,
                     double level) {
  if (replicates.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "a band needs at least 2 bootstrap replicates");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "band level must lie in (0, 1)");
  }
  if (n < 1 || n > PickNumber::kMax) {
    throw Error(ErrorKind::invalid_argument, "band length must lie in [1, 1024]");
  }
  const double tail = (1.0 - level) / 2.0;
  CurveBand band;
  band.level = level;
  std::vector<double> sample(replicates.size());
  for (int pick = 1; pick <= n; ++pick) {
    const PickNumber p(pick);
    for (std::size_t r = 0; r < replicates.size(); ++r) sample[r] = pick_value(p, replicates[r]);
    band.picks.push_back(pick);
    band.point_curve.push_back(pick_value(p, fitted));
    band.lower_band.push_back(percentile(sample, tail));
    band.upper_band.push_back(percentile(sample, 1.0 - tail));
  }
  return band;
}

CurveBand build_band(const FitResult& fitted, const BootstrapResult& boot, int n, double level) {
  return build_band(fitted.params, boot.replicate_params, n, level);
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_chart_csv(std::ostream& out, const ValueChart& chart, ChartSchema schema) {
  if (schema == ChartSchema::appendix) {
    out << "Pick,L1_value,L2_value,Jimmy_Johnson\n";
  } else {
    out << "Pick,L1_value,L2_value,L1_scaled,L2_scaled,Jimmy_Johnson\n";
  }
  for (std::size_t i = 0; i < chart.picks.size(); ++i) {
    out << chart.picks[i] << ',';
    if (schema == ChartSchema::appendix) {
      out << format_value(chart.l1_scaled[i]) << ',' << format_value(chart.l2_scaled[i]);
    } else {
      out << format_value(chart.l1_values[i]) << ',' << format_value(chart.l2_values[i]) << ','
          << format_value(chart.l1_scaled[i]) << ',' << format_value(chart.l2_scaled[i]);
    }
    out << ',';
    if (chart.jj_values[i]) out << format_value(*chart.jj_values[i]);
    out << '\n';
  }
}

void write_band_csv(std::ostream& out, const CurveBand& band) {
  out << "Pick,value,lower,upper\n";
  for (std::size_t i = 0; i < band.picks.size(); ++i) {
    out << band.picks[i] << ',' << format_value(band.point_curve[i]) << ','
        << format_value(band.lower_band[i]) << ',' << format_value(band.upper_band[i]) << '\n';
  }
}

namespace {

template <typename Writer>
void write_file(const std::filesystem::path& destination, Writer&& writer) {
  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + destination.string());
  writer(out);
  out.flush();
  if (!out) throw Error(ErrorKind::io, "failed writing " + destination.string());
}

}  // namespace

void emit_plot_data(const ValueChart& chart, const std::filesystem::path& destination,
                    ChartSchema schema) {
  write_file(destination, [&](std::ostream& out) { write_chart_csv(out, chart, schema); });
}

void emit_plot_data(const CurveBand& band, const std::filesystem::path& destination) {
  write_file(destination, [&](std::ostream& out) { write_band_csv(out, band); });
}

}  // namespace draftval
