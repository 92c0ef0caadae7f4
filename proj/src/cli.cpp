#include "draftval/cli.hpp"

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "draftval/bootstrap.hpp"
#include "draftval/chart.hpp"
#include "draftval/data.hpp"
#include "draftval/error.hpp"
#include "draftval/fit.hpp"
#include "draftval/kernels.hpp"
#include "draftval/report.hpp"
#include "draftval/service.hpp"

namespace draftval {

namespace {

namespace fs = std::filesystem;

const std::string kDefaultJj = std::string(DRAFTVAL_DEFAULT_ASSET_DIR) + "/jimmy_johnson.csv";

struct DataFlags {
  std::string path;
  std::string columns;
  std::string year_column;
  std::string up_column;
  std::string down_column;
  std::string id_column;
  std::string future_columns;
  int year_min = YearRange{}.min;
  int year_max = YearRange{}.max;
  bool strict = false;

  void add(CLI::App* app, bool required) {
    auto* opt = app->add_option("--data", path, "Trade CSV");
    if (required) opt->required();
    app->add_option("--columns", columns, "Column map file (key = value lines)");
    app->add_option("--year-column", year_column, "Season column (default: season)");
    app->add_option("--up-column", up_column, "Up-side picks column (default: up_picks)");
    app->add_option("--down-column", down_column, "Down-side picks column (default: down_picks)");
    app->add_option("--id-column", id_column, "Trade id column (default: row number)");
    app->add_option("--future-columns", future_columns,
                    "Comma separated columns flagging future picks");
    app->add_option("--year-min", year_min, "First season kept")->capture_default_str();
    app->add_option("--year-max", year_max, "Last season kept")->capture_default_str();
    app->add_flag("--strict", strict, "Fail on any malformed row or an empty result");
  }

  ColumnMap column_map() const {
    ColumnMap map = columns.empty() ? ColumnMap{} : ColumnMap::load(columns);
    if (!year_column.empty()) map.year_column = year_column;
    if (!up_column.empty()) map.up_picks_column = up_column;
    if (!down_column.empty()) map.down_picks_column = down_column;
    if (!id_column.empty()) map.id_column = id_column;
    if (!future_columns.empty()) {
      map.future_flag_columns.clear();
      std::stringstream ss(future_columns);
      std::string name;
      while (std::getline(ss, name, ',')) {
        if (!name.empty()) map.future_flag_columns.push_back(name);
      }
    }
    return map;
  }

  LoadedTrades load() const {
    if (year_min > year_max) throw Error(ErrorKind::usage, "--year-min exceeds --year-max");
    return load_trades(path, column_map(), YearRange{year_min, year_max}, strict);
  }
};

struct FitFlags {
  std::string loss = "mae";
  std::optional<double> p;
  double init_lambda = 0.146;
  double init_beta = 0.698;
  int max_iter = 1000;

  void add(CLI::App* app) {
    app->add_option("--loss", loss, "mae or mse")->capture_default_str();
    app->add_option("--p", p, "Side aggregation norm (default: 1 for mae, 2 for mse)");
    app->add_option("--init-lambda", init_lambda, "Starting lambda")->capture_default_str();
    app->add_option("--init-beta", init_beta, "Starting beta")->capture_default_str();
    app->add_option("--max-iter", max_iter, "Iteration cap")->capture_default_str();
  }

  FitConfig config() const {
    const auto kind = parse_loss(loss);
    if (!kind) throw Error(ErrorKind::usage, "--loss must be mae or mse");
    FitConfig c = FitConfig::for_loss(*kind);
    if (p) {
      if (!(*p >= 1.0)) throw Error(ErrorKind::usage, "--p must be at least 1");
      c.p = NormOrder(*p);
    }
    c.initial = CurveParams(init_lambda, init_beta);
    c.max_iterations = max_iter;
    return c;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void print_ingest(std::ostream& out, const IngestReport& r) {
  out << "rows read:            " << r.rows_read << '\n'
      << "trades kept:          " << r.trades_kept << '\n'
      << "dropped (year):       " << r.rows_dropped_year_filter << '\n'
      << "dropped (future):     " << r.rows_dropped_future_picks << '\n'
      << "dropped (parse):      " << r.rows_dropped_parse_error << '\n';
}

void print_warnings(std::ostream& err, const IngestReport& r) {
  for (const IngestWarning& w : r.warnings) {
    err << "warning: " << (w.row_id.empty() ? "" : "row " + w.row_id + ": ") << w.reason << '\n';
  }
}

void print_fit(std::ostream& out, std::ostream& err, const FitConfig& c, const FitResult& r) {
  out << "loss:                 " << to_string(c.loss) << " (p = " << fmt(c.p.value()) << ")\n"
      << "lambda:               " << format_exact(r.params.lambda()) << '\n'
      << "beta:                 " << format_exact(r.params.beta()) << '\n'
      << "loss value:           " << format_exact(r.loss_value) << '\n'
      << "iterations:           " << r.iterations << " (" << r.evaluations << " evaluations)\n"
      << "status:               " << r.status << '\n'
      << "projected gradient:   " << fmt(r.gradient_norm_at_solution) << '\n';
  if (!r.converged) {
    err << "WARNING: optimizer stopped at the iteration cap without converging; "
           "the reported parameters are the last iterate\n";
  }
}

// "0.03,1.6" -> CurveParams.
CurveParams parse_params(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw Error(ErrorKind::usage, "expected 'lambda,beta', got '" + text + "'");
  }
  try {
    std::size_t used = 0;
    const std::string l = text.substr(0, comma);
    const std::string b = text.substr(comma + 1);
    const double lambda = std::stod(l, &used);
    if (used != l.size()) throw std::invalid_argument(l);
    const double beta = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
    return CurveParams(lambda, beta);
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::usage, "expected 'lambda,beta', got '" + text + "'");
  }
}

std::vector<int> parse_pick_list(const std::string& text, const char* flag) {
  std::vector<int> picks;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(token, &used);
      while (used < token.size() && token[used] == ' ') ++used;
      if (used != token.size()) throw std::invalid_argument(token);
      picks.push_back(v);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::usage, std::string(flag) + ": bad pick '" + token + "'");
    }
  }
  return picks;
}

// --params accepts a fit report path or an inline "lambda,beta" pair.
struct ParamSource {
  CurveParams params{0.146, 0.698};
  std::optional<NormOrder> p;
};

ParamSource resolve_params(const std::string& source) {
  if (fs::exists(source)) {
    const FitReport report = load_fit_report(source);
    return {report.result.params, report.p};
  }
  if (source.find(',') != std::string::npos) return {parse_params(source), std::nullopt};
  throw Error(ErrorKind::io, "cannot open fit report " + source);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::io, "cannot write " + path.string());
}

std::atomic<Server*> g_server{nullptr};

extern "C" void stop_on_signal(int) {
  if (Server* s = g_server.load()) s->stop();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Draft-pick value curve toolkit", "draftval"};
  app.set_version_flag("--version", std::string(DRAFTVAL_VERSION));
  app.require_subcommand(1);

  // ingest
  DataFlags ingest_data;
  std::string audit_path;
  auto* ingest = app.add_subcommand("ingest", "Parse and filter a trade CSV");
  ingest_data.add(ingest, true);
  ingest->add_option("--audit", audit_path, "Write the normalized trades here");

  // fit
  DataFlags fit_data;
  FitFlags fit_flags;
  std::string fit_out;
  auto* fit_cmd = app.add_subcommand("fit", "Fit lambda and beta to a trade corpus");
  fit_data.add(fit_cmd, true);
  fit_flags.add(fit_cmd);
  fit_cmd->add_option("--out", fit_out, "Fit report path");

  // bootstrap
  DataFlags boot_data;
  FitFlags boot_fit;
  BootstrapConfig boot_config;
  std::string boot_out;
  auto* boot_cmd = app.add_subcommand("bootstrap", "Bootstrap confidence intervals");
  boot_data.add(boot_cmd, true);
  boot_fit.add(boot_cmd);
  boot_cmd->add_option("--replicates", boot_config.replicates, "Resamples (minimum 2)")
      ->capture_default_str();
  boot_cmd->add_option("--seed", boot_config.master_seed, "Master seed")->capture_default_str();
  boot_cmd->add_option("--level", boot_config.confidence_level, "Confidence level")
      ->capture_default_str();
  boot_cmd->add_option("--threads", boot_config.threads, "Worker threads (0: all cores)")
      ->capture_default_str();
  boot_cmd->add_option("--out", boot_out, "Bootstrap report path");

  // chart
  DataFlags chart_data;
  std::string l1_fit_path, l2_fit_path, l1_inline, l2_inline;
  std::string l1_boot_path, l2_boot_path, l1_band_out, l2_band_out;
  std::string jj_path = kDefaultJj;
  std::string chart_out, chart_full_out;
  int chart_picks = 256;
  auto* chart_cmd = app.add_subcommand("chart", "Emit value tables next to the Jimmy Johnson chart");
  chart_data.add(chart_cmd, false);
  chart_cmd->add_option("--l1-fit", l1_fit_path, "L1 fit report");
  chart_cmd->add_option("--l2-fit", l2_fit_path, "L2 fit report");
  chart_cmd->add_option("--l1", l1_inline, "L1 parameters as lambda,beta");
  chart_cmd->add_option("--l2", l2_inline, "L2 parameters as lambda,beta");
  chart_cmd->add_option("--l1-bootstrap", l1_boot_path, "L1 bootstrap report (for --l1-band-out)");
  chart_cmd->add_option("--l2-bootstrap", l2_boot_path, "L2 bootstrap report (for --l2-band-out)");
  chart_cmd->add_option("--l1-band-out", l1_band_out, "L1 band CSV");
  chart_cmd->add_option("--l2-band-out", l2_band_out, "L2 band CSV");
  chart_cmd->add_option("--jj", jj_path, "Jimmy Johnson chart CSV")->capture_default_str();
  chart_cmd->add_option("--picks", chart_picks, "Number of picks")
      ->capture_default_str()
      ->check(CLI::Range(1, PickNumber::kMax));
  chart_cmd->add_option("--out", chart_out, "Compare CSV (default: standard output)");
  chart_cmd->add_option("--full-out", chart_full_out, "Compare CSV with raw and scaled values");

  // evaluate
  std::string eval_up, eval_down, eval_params;
  std::optional<double> eval_p;
  double eval_threshold = AssessmentOptions{}.fairness_threshold;
  std::string eval_out;
  auto* eval_cmd = app.add_subcommand("evaluate", "Value one proposed trade");
  eval_cmd->add_option("--up", eval_up, "Picks given up by the team moving up, e.g. 1")
      ->required();
  eval_cmd->add_option("--down", eval_down, "Picks given by the team moving down, e.g. 2,3")
      ->required();
  eval_cmd->add_option("--params", eval_params, "Fit report path or lambda,beta")->required();
  eval_cmd->add_option("--p", eval_p, "Side norm (default: the fit report's, else 1)");
  eval_cmd->add_option("--threshold", eval_threshold, "Relative fairness threshold")
      ->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "Evaluation report path");

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  ServiceState::Paths paths;
  paths.jj = kDefaultJj;
  std::string serve_l1, serve_l2, serve_l1_boot, serve_l2_boot, serve_jj = kDefaultJj;
  ServiceOptions service_options;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the JSON API");
  serve_cmd->add_option("--host", host, "Listen address")->capture_default_str();
  serve_cmd->add_option("--port", port, "Listen port (0: any free port)")
      ->capture_default_str()
      ->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--l1-fit", serve_l1, "L1 fit report");
  serve_cmd->add_option("--l2-fit", serve_l2, "L2 fit report");
  serve_cmd->add_option("--l1-bootstrap", serve_l1_boot, "L1 bootstrap report");
  serve_cmd->add_option("--l2-bootstrap", serve_l2_boot, "L2 bootstrap report");
  serve_cmd->add_option("--jj", serve_jj, "Jimmy Johnson chart CSV")->capture_default_str();
  serve_cmd->add_option("--cors-origin", service_options.cors_origin, "Allowed origin")
      ->capture_default_str();
  serve_cmd->add_option("--threshold", service_options.assessment.fairness_threshold,
                        "Relative fairness threshold")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : exit_code(ErrorKind::usage);
  }

  try {
    if (*ingest) {
      const LoadedTrades loaded = ingest_data.load();
      print_warnings(err, loaded.report);
      print_ingest(out, loaded.report);
      if (!audit_path.empty()) {
        std::ostringstream csv;
        write_normalized_csv(csv, loaded.trades);
        write_text(audit_path, csv.str());
      }
      return 0;
    }

    if (*fit_cmd) {
      const FitConfig config = fit_flags.config();
      config.validate();
      const LoadedTrades loaded = fit_data.load();
      print_warnings(err, loaded.report);
      print_ingest(out, loaded.report);
      const FitResult result = fit(loaded.trades, config);
      print_fit(out, err, config, result);
      if (!fit_out.empty()) {
        FitReport report{config.loss,          config.p,       result,
                         config.initial,       config.max_iterations,
                         fit_data.path,        loaded.trades.size(), loaded.report};
        save_fit_report(fit_out, report);
        out << "report:               " << fit_out << '\n';
      }
      return 0;
    }

    if (*boot_cmd) {
      boot_config.validate();
      const FitConfig config = boot_fit.config();
      config.validate();
      const LoadedTrades loaded = boot_data.load();
      print_warnings(err, loaded.report);
      print_ingest(out, loaded.report);
      const FitResult point = fit(loaded.trades, config);
      print_fit(out, err, config, point);
      const BootstrapResult boot = bootstrap(loaded.trades, config, boot_config);
      out << "replicates:           " << boot.replicate_params.size() << " of "
          << boot.replicates_requested << " (seed " << boot.master_seed << ")\n"
          << "lambda CI:            [" << format_exact(boot.lambda_ci.lower) << ", "
          << format_exact(boot.lambda_ci.upper) << "]\n"
          << "beta CI:              [" << format_exact(boot.beta_ci.lower) << ", "
          << format_exact(boot.beta_ci.upper) << "]\n"
          << "lambda mean / median: " << format_exact(boot.lambda_point_summary) << " / "
          << format_exact(boot.lambda_median) << '\n'
          << "beta mean / median:   " << format_exact(boot.beta_point_summary) << " / "
          << format_exact(boot.beta_median) << '\n';
      if (!boot.failed_replicates.empty()) {
        err << "warning: " << boot.failed_replicates.size() << " replicates failed and were dropped\n";
      }
      if (!boot_out.empty()) {
        BootstrapReport report{config.loss, config.p, boot, point, boot_data.path,
                               loaded.trades.size()};
        save_bootstrap_report(boot_out, report);
        out << "report:               " << boot_out << '\n';
      }
      return 0;
    }

    if (*chart_cmd) {
      std::optional<CurveParams> l1, l2;
      if (!l1_fit_path.empty()) l1 = load_fit_report(l1_fit_path).result.params;
      if (!l2_fit_path.empty()) l2 = load_fit_report(l2_fit_path).result.params;
      if (!l1_inline.empty()) l1 = parse_params(l1_inline);
      if (!l2_inline.empty()) l2 = parse_params(l2_inline);
      if ((!l1 || !l2) && !chart_data.path.empty()) {
        const LoadedTrades loaded = chart_data.load();
        print_warnings(err, loaded.report);
        if (!l1) l1 = fit(loaded.trades, FitConfig::for_loss(LossKind::mae)).params;
        if (!l2) l2 = fit(loaded.trades, FitConfig::for_loss(LossKind::mse)).params;
      }
      if (!l1 || !l2) {
        throw Error(ErrorKind::usage,
                    "chart needs L1 and L2 parameters: --l1-fit/--l2-fit, --l1/--l2 or --data");
      }
      const JjReference jj = JjReference::load(jj_path);
      const ValueChart chart = build_chart(*l1, *l2, jj, chart_picks);
      if (chart_out.empty()) {
        write_chart_csv(out, chart, ChartSchema::appendix);
      } else {
        emit_plot_data(chart, chart_out, ChartSchema::appendix);
      }
      if (!chart_full_out.empty()) emit_plot_data(chart, chart_full_out, ChartSchema::full);

      auto band = [&](const std::string& boot_path, const std::string& dest,
                      const CurveParams& fitted, const char* name) {
        if (dest.empty()) return;
        if (boot_path.empty()) {
          throw Error(ErrorKind::usage, std::string("--") + name + "-band-out needs --" + name +
                                            "-bootstrap");
        }
        const BootstrapReport b = load_bootstrap_report(boot_path);
        emit_plot_data(build_band(fitted, b.result.replicate_params, chart_picks,
                                  b.result.confidence_level),
                       dest);
      };
      band(l1_boot_path, l1_band_out, *l1, "l1");
      band(l2_boot_path, l2_band_out, *l2, "l2");
      return 0;
    }

    if (*eval_cmd) {
      const ParamSource source = resolve_params(eval_params);
      NormOrder p = source.p.value_or(NormOrder::l1());
      if (eval_p) {
        if (!(*eval_p >= 1.0)) throw Error(ErrorKind::usage, "--p must be at least 1");
        p = NormOrder(*eval_p);
      }
      const std::vector<int> up = parse_pick_list(eval_up, "--up");
      const std::vector<int> down = parse_pick_list(eval_down, "--down");
      auto validated = validate_trade(up, down, 0, "cli");
      if (const auto* reason = std::get_if<RejectReason>(&validated)) {
        throw Error(ErrorKind::usage, "invalid trade: " + std::string(to_string(*reason)));
      }
      AssessmentOptions options;
      options.fairness_threshold = eval_threshold;
      const TradeAssessment a =
          assess_trade(std::get<Trade>(validated), source.params, p, options);

      KeyValues kv;
      kv.set("kind", std::string("evaluate"));
      kv.set("up", eval_up);
      kv.set("down", eval_down);
      kv.set("lambda", source.params.lambda());
      kv.set("beta", source.params.beta());
      kv.set("p", p.value());
      kv.set("value_up", a.value_up);
      kv.set("value_down", a.value_down);
      kv.set("delta", a.delta);
      kv.set("verdict", a.verdict);
      if (a.balance_hint) {
        kv.set("balance_hint", *a.balance_hint);
        kv.set("hint_side", *a.hint_side);
        kv.set("delta_after_hint", *a.delta_after_hint);
      }
      out << "value up:             " << format_exact(a.value_up) << '\n'
          << "value down:           " << format_exact(a.value_down) << '\n'
          << "delta:                " << format_exact(a.delta) << '\n'
          << "verdict:              " << a.verdict << '\n';
      if (a.balance_hint) {
        out << "balance hint:         add pick " << *a.balance_hint << " to the " << *a.hint_side
            << " side (delta " << format_exact(*a.delta_after_hint) << ")\n";
      }
      if (!eval_out.empty()) kv.save(eval_out);
      return 0;
    }

    if (*serve_cmd) {
      if (!serve_l1.empty()) paths.l1_fit = serve_l1;
      if (!serve_l2.empty()) paths.l2_fit = serve_l2;
      if (!serve_l1_boot.empty()) paths.l1_bootstrap = serve_l1_boot;
      if (!serve_l2_boot.empty()) paths.l2_bootstrap = serve_l2_boot;
      paths.jj = serve_jj;
      const ServiceState state = ServiceState::load(paths, service_options);
      Server server(state);
      const int bound = server.bind(host, port);
      out << "listening on http://" << host << ':' << bound << std::endl;
      g_server.store(&server);
      std::signal(SIGINT, stop_on_signal);
      std::signal(SIGTERM, stop_on_signal);
      server.listen();
      g_server.store(nullptr);
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace draftval
