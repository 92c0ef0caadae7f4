#include "draftval/report.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "draftval/csv.hpp"
#include "draftval/error.hpp"

namespace draftval {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

Error malformed(const std::string& key) {
  return Error(ErrorKind::ingestion, "report key '" + key + "' is missing or malformed");
}

double parse_double(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) throw malformed(key);
  return v;
}

LossKind parse_loss_or_throw(const std::string& text) {
  const auto loss = parse_loss(text);
  if (!loss) throw malformed("loss");
  return *loss;
}

std::filesystem::path replicates_path_for(const std::filesystem::path& report) {
  return std::filesystem::path(report.string() + ".replicates.csv");
}

}  // namespace

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void KeyValues::set(const std::string& key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(key, std::move(value));
}

void KeyValues::set(const std::string& key, double value) { set(key, format_exact(value)); }
void KeyValues::set(const std::string& key, std::int64_t value) {
  set(key, std::to_string(value));
}
void KeyValues::set(const std::string& key, std::uint64_t value) {
  set(key, std::to_string(value));
}

std::optional<std::string> KeyValues::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const std::string& KeyValues::require(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw malformed(key);
}

double KeyValues::require_double(const std::string& key) const {
  return parse_double(key, require(key));
}

std::int64_t KeyValues::require_int(const std::string& key) const {
  const std::string& text = require(key);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw malformed(key);
  return v;
}

std::uint64_t KeyValues::require_uint(const std::string& key) const {
  const std::string& text = require(key);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) throw malformed(key);
  return v;
}

bool KeyValues::require_bool(const std::string& key) const {
  const std::string& text = require(key);
  if (text == "true") return true;
  if (text == "false") return false;
  throw malformed(key);
}

void KeyValues::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

KeyValues KeyValues::parse(std::istream& in) {
  KeyValues kv;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ingestion, "report line '" + t + "' is not 'key = value'");
    }
    kv.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return kv;
}

void KeyValues::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  write(out);
  out.flush();
  if (!out) throw Error(ErrorKind::io, "failed writing " + path.string());
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open report " + path.string());
  return parse(in);
}

KeyValues to_key_values(const FitReport& r) {
  KeyValues kv;
  kv.set("kind", std::string("fit"));
  kv.set("loss", std::string(to_string(r.loss)));
  kv.set("p", r.p.value());
  kv.set("lambda", r.result.params.lambda());
  kv.set("beta", r.result.params.beta());
  kv.set("loss_value", r.result.loss_value);
  kv.set("iterations", r.result.iterations);
  kv.set("evaluations", r.result.evaluations);
  kv.set("converged", r.result.converged);
  kv.set("status", r.result.status);
  kv.set("gradient_norm", r.result.gradient_norm_at_solution);
  kv.set("initial_lambda", r.initial.lambda());
  kv.set("initial_beta", r.initial.beta());
  kv.set("max_iterations", r.max_iterations);
  kv.set("dataset", r.dataset);
  kv.set("trades", static_cast<std::uint64_t>(r.trade_count));
  if (r.ingest) {
    kv.set("rows_read", static_cast<std::uint64_t>(r.ingest->rows_read));
    kv.set("rows_dropped_year_filter",
           static_cast<std::uint64_t>(r.ingest->rows_dropped_year_filter));
    kv.set("rows_dropped_future_picks",
           static_cast<std::uint64_t>(r.ingest->rows_dropped_future_picks));
    kv.set("rows_dropped_parse_error",
           static_cast<std::uint64_t>(r.ingest->rows_dropped_parse_error));
  }
  return kv;
}

FitReport fit_report_from(const KeyValues& kv) {
  if (kv.get("kind") != std::optional<std::string>("fit")) {
    throw Error(ErrorKind::ingestion, "not a fit report");
  }
  FitReport r;
  r.loss = parse_loss_or_throw(kv.require("loss"));
  r.p = NormOrder(kv.require_double("p"));
  r.result.params = CurveParams(kv.require_double("lambda"), kv.require_double("beta"));
  r.result.loss_value = kv.require_double("loss_value");
  r.result.iterations = static_cast<int>(kv.require_int("iterations"));
  r.result.evaluations = static_cast<int>(kv.get("evaluations") ? kv.require_int("evaluations") : 0);
  r.result.converged = kv.require_bool("converged");
  r.result.status = kv.get("status").value_or("");
  r.result.gradient_norm_at_solution = kv.require_double("gradient_norm");
  r.initial = CurveParams(kv.require_double("initial_lambda"), kv.require_double("initial_beta"));
  r.max_iterations = static_cast<int>(kv.require_int("max_iterations"));
  r.dataset = kv.get("dataset").value_or("");
  r.trade_count = static_cast<std::size_t>(kv.require_uint("trades"));
  if (kv.get("rows_read")) {
    IngestReport ingest;
    ingest.rows_read = kv.require_uint("rows_read");
    ingest.trades_kept = r.trade_count;
    ingest.rows_dropped_year_filter = kv.require_uint("rows_dropped_year_filter");
    ingest.rows_dropped_future_picks = kv.require_uint("rows_dropped_future_picks");
    ingest.rows_dropped_parse_error = kv.require_uint("rows_dropped_parse_error");
    r.ingest = ingest;
  }
  return r;
}

void save_fit_report(const std::filesystem::path& path, const FitReport& report) {
  to_key_values(report).save(path);
}

FitReport load_fit_report(const std::filesystem::path& path) {
  return fit_report_from(KeyValues::load(path));
}

KeyValues to_key_values(const BootstrapReport& r, const std::string& replicates_file) {
  const BootstrapResult& b = r.result;
  KeyValues kv;
  kv.set("kind", std::string("bootstrap"));
  kv.set("loss", std::string(to_string(r.loss)));
  kv.set("p", r.p.value());
  kv.set("seed", b.master_seed);
  kv.set("replicates", b.replicates_requested);
  kv.set("replicates_ok", static_cast<std::uint64_t>(b.replicate_params.size()));
  kv.set("replicates_failed", static_cast<std::uint64_t>(b.failed_replicates.size()));
  kv.set("confidence_level", b.confidence_level);
  kv.set("lambda_ci_lower", b.lambda_ci.lower);
  kv.set("lambda_ci_upper", b.lambda_ci.upper);
  kv.set("beta_ci_lower", b.beta_ci.lower);
  kv.set("beta_ci_upper", b.beta_ci.upper);
  kv.set("lambda_mean", b.lambda_point_summary);
  kv.set("beta_mean", b.beta_point_summary);
  kv.set("lambda_median", b.lambda_median);
  kv.set("beta_median", b.beta_median);
  kv.set("point_lambda", r.point_fit.params.lambda());
  kv.set("point_beta", r.point_fit.params.beta());
  kv.set("point_loss_value", r.point_fit.loss_value);
  kv.set("point_converged", r.point_fit.converged);
  kv.set("dataset", r.dataset);
  kv.set("trades", static_cast<std::uint64_t>(r.trade_count));
  kv.set("replicates_file", replicates_file);
  return kv;
}

void save_bootstrap_report(const std::filesystem::path& path, const BootstrapReport& report) {
  const std::filesystem::path replicates = replicates_path_for(path);
  to_key_values(report, replicates.filename().string()).save(path);

  std::ofstream out(replicates, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + replicates.string());
  out << "replicate,lambda,beta\n";
  std::size_t next_failed = 0;
  std::size_t ok = 0;
  const auto& failed = report.result.failed_replicates;
  for (int r = 0; ok < report.result.replicate_params.size(); ++r) {
    if (next_failed < failed.size() && failed[next_failed] == r) {
      ++next_failed;
      continue;
    }
    const CurveParams& p = report.result.replicate_params[ok++];
    out << r << ',' << format_exact(p.lambda()) << ',' << format_exact(p.beta()) << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorKind::io, "failed writing " + replicates.string());
}

BootstrapReport load_bootstrap_report(const std::filesystem::path& path) {
  const KeyValues kv = KeyValues::load(path);
  if (kv.get("kind") != std::optional<std::string>("bootstrap")) {
    throw Error(ErrorKind::ingestion, "not a bootstrap report: " + path.string());
  }
  BootstrapReport r;
  r.loss = parse_loss_or_throw(kv.require("loss"));
  r.p = NormOrder(kv.require_double("p"));
  r.dataset = kv.get("dataset").value_or("");
  r.trade_count = static_cast<std::size_t>(kv.require_uint("trades"));
  r.point_fit.params = CurveParams(kv.require_double("point_lambda"), kv.require_double("point_beta"));
  r.point_fit.loss_value = kv.require_double("point_loss_value");
  r.point_fit.converged = kv.require_bool("point_converged");

  BootstrapResult& b = r.result;
  b.master_seed = kv.require_uint("seed");
  b.replicates_requested = static_cast<int>(kv.require_int("replicates"));
  b.confidence_level = kv.require_double("confidence_level");
  b.lambda_ci = {kv.require_double("lambda_ci_lower"), kv.require_double("lambda_ci_upper")};
  b.beta_ci = {kv.require_double("beta_ci_lower"), kv.require_double("beta_ci_upper")};
  b.lambda_point_summary = kv.require_double("lambda_mean");
  b.beta_point_summary = kv.require_double("beta_mean");
  b.lambda_median = kv.require_double("lambda_median");
  b.beta_median = kv.require_double("beta_median");

  const std::filesystem::path replicates = path.parent_path() / kv.require("replicates_file");
  std::ifstream in(replicates);
  if (!in) throw Error(ErrorKind::io, "cannot open " + replicates.string());
  csv::Reader reader(in);
  reader.next();  // header
  std::vector<bool> seen(static_cast<std::size_t>(std::max(b.replicates_requested, 0)), false);
  while (auto row = reader.next()) {
    if (row->size() != 3) throw Error(ErrorKind::ingestion, "malformed replicate row");
    const int index = std::stoi((*row)[0]);
    if (index >= 0 && static_cast<std::size_t>(index) < seen.size()) seen[index] = true;
    b.replicate_params.emplace_back(parse_double("lambda", (*row)[1]),
                                    parse_double("beta", (*row)[2]));
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) b.failed_replicates.push_back(static_cast<int>(i));
  }
  return r;
}

}  // namespace draftval
