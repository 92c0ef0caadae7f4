#include "draftval/service.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <httplib.h>

#include "draftval/error.hpp"

namespace draftval {

using nlohmann::json;

TradeAssessment assess_trade(const Trade& trade, const CurveParams& params, NormOrder p,
                             const AssessmentOptions& options) {
  TradeAssessment out;
  out.value_up = side_value(trade.up, params, p);
  out.value_down = side_value(trade.down, params, p);
  out.delta = out.value_up - out.value_down;

  const double tolerance = options.fairness_threshold * std::max(out.value_up, out.value_down);
  if (std::abs(out.delta) <= tolerance) {
    out.verdict = "balanced";
  } else {
    out.verdict = out.delta > 0.0 ? "up_side_overpays" : "down_side_overpays";
  }

  if (out.delta == 0.0) return out;
  // The lower-valued side is the only one an extra pick can bring closer.
  const bool add_to_up = out.delta < 0.0;
  const TradeSide& short_side = add_to_up ? trade.up : trade.down;
  double best = std::abs(out.delta);
  for (int m = 1; m <= options.hint_max_pick && m <= PickNumber::kMax; ++m) {
    const PickNumber pick(m);
    if (trade.up.contains(pick) || trade.down.contains(pick)) continue;
    std::vector<PickNumber> picks(short_side.picks().begin(), short_side.picks().end());
    picks.push_back(pick);
    const double grown = side_value(TradeSide(std::move(picks)), params, p);
    const double delta = add_to_up ? grown - out.value_down : out.value_up - grown;
    if (std::abs(delta) < best) {
      best = std::abs(delta);
      out.balance_hint = m;
      out.hint_side = add_to_up ? "up" : "down";
      out.delta_after_hint = delta;
    }
  }
  return out;
}

ServiceState::ServiceState(std::optional<FitReport> l1, std::optional<FitReport> l2,
                           std::optional<BootstrapReport> l1_boot,
                           std::optional<BootstrapReport> l2_boot, JjReference jj,
                           ServiceOptions options)
    : jj_(std::move(jj)), options_(std::move(options)) {
  auto make = [this](std::optional<FitReport> fit, std::optional<BootstrapReport> boot,
                     std::string_view name) -> std::optional<Norm> {
    if (!fit) {
      if (boot) {
        throw Error(ErrorKind::usage, std::string(name) + " bootstrap given without a fit");
      }
      return std::nullopt;
    }
    Norm n{std::move(*fit), std::move(boot), std::nullopt};
    if (n.bootstrap && n.bootstrap->result.replicate_params.size() >= 2) {
      n.band = build_band(n.fit.result.params, n.bootstrap->result.replicate_params,
                          options_.band_picks, n.bootstrap->result.confidence_level);
    }
    return n;
  };
  l1_ = make(std::move(l1), std::move(l1_boot), "l1");
  l2_ = make(std::move(l2), std::move(l2_boot), "l2");
}

ServiceState ServiceState::load(const Paths& paths, ServiceOptions options) {
  auto fit = [](const std::optional<std::filesystem::path>& p) -> std::optional<FitReport> {
    if (!p) return std::nullopt;
    return load_fit_report(*p);
  };
  auto boot = [](const std::optional<std::filesystem::path>& p) -> std::optional<BootstrapReport> {
    if (!p) return std::nullopt;
    return load_bootstrap_report(*p);
  };
  return ServiceState(fit(paths.l1_fit), fit(paths.l2_fit), boot(paths.l1_bootstrap),
                      boot(paths.l2_bootstrap), JjReference::load(paths.jj), std::move(options));
}

const ServiceState::Norm* ServiceState::norm(std::string_view name) const noexcept {
  if (name == "l1") return l1_ ? &*l1_ : nullptr;
  if (name == "l2") return l2_ ? &*l2_ : nullptr;
  return nullptr;
}

std::string_view ServiceState::version() const noexcept { return DRAFTVAL_VERSION; }

namespace {

Response error_response(int status, const std::string& message) {
  return {status, json{{"error", message}}};
}

bool known_norm(const std::string& name) { return name == "l1" || name == "l2"; }

json params_json(const CurveParams& p) {
  return json{{"lambda", p.lambda()}, {"beta", p.beta()}};
}

// Picks from a JSON array; nullopt with a message on malformed input.
std::optional<std::vector<int>> read_picks(const json& body, const char* key, std::string& why) {
  if (!body.contains(key) || !body[key].is_array()) {
    why = std::string("'") + key + "' must be an array of pick numbers";
    return std::nullopt;
  }
  std::vector<int> picks;
  for (const json& item : body[key]) {
    if (!item.is_number_integer()) {
      why = std::string("'") + key + "' must contain integers only";
      return std::nullopt;
    }
    const auto v = item.get<std::int64_t>();
    if (v < PickNumber::kMin || v > PickNumber::kMax) {
      why = "pick " + std::to_string(v) + " outside [1, 1024]";
      return std::nullopt;
    }
    picks.push_back(static_cast<int>(v));
  }
  return picks;
}

}  // namespace

Response handle_curve(const ServiceState& state, std::optional<std::string> norm,
                      std::optional<std::string> n_max) {
  if (!norm || !known_norm(*norm)) return error_response(400, "norm must be l1 or l2");
  int n = 256;
  if (n_max) {
    const auto* end = n_max->data() + n_max->size();
    const auto [ptr, ec] = std::from_chars(n_max->data(), end, n);
    if (ec != std::errc() || ptr != end || n < 1 || n > PickNumber::kMax) {
      return error_response(400, "n_max must be an integer in [1, 1024]");
    }
  }
  const ServiceState::Norm* loaded = state.norm(*norm);
  if (loaded == nullptr) return error_response(503, "no fit loaded for norm " + *norm);

  const CurveParams& params = loaded->fit.result.params;
  json picks = json::array();
  json values = json::array();
  json lower = json::array();
  json upper = json::array();
  for (int i = 0; i < n; ++i) {
    const double v = pick_value(PickNumber(i + 1), params);
    picks.push_back(i + 1);
    values.push_back(v);
    if (loaded->band && static_cast<std::size_t>(i) < loaded->band->picks.size()) {
      lower.push_back(loaded->band->lower_band[i]);
      upper.push_back(loaded->band->upper_band[i]);
    } else {
      lower.push_back(v);
      upper.push_back(v);
    }
  }
  json body{{"norm", *norm},
            {"picks", std::move(picks)},
            {"values", std::move(values)},
            {"lower", std::move(lower)},
            {"upper", std::move(upper)},
            {"params", params_json(params)},
            {"band", loaded->band ? "pointwise_percentile" : "none"},
            {"jj_scale", state.jj().top()}};
  if (loaded->band) body["level"] = loaded->band->level;
  return {200, std::move(body)};
}

Response handle_evaluate(const ServiceState& state, std::string_view text) {
  const json body = json::parse(text, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    return error_response(400, "request body must be a JSON object");
  }
  std::string why;
  const auto up = read_picks(body, "up", why);
  if (!up) return error_response(400, why);
  const auto down = read_picks(body, "down", why);
  if (!down) return error_response(400, why);
  if (up->empty() || down->empty()) return error_response(422, "both sides need at least one pick");

  const std::string norm_name = body.value("norm", std::string("l2"));
  if (!known_norm(norm_name)) return error_response(400, "norm must be l1 or l2");
  const ServiceState::Norm* loaded = state.norm(norm_name);
  if (loaded == nullptr) return error_response(503, "no fit loaded for norm " + norm_name);

  NormOrder p = loaded->fit.p;
  if (body.contains("p") && !body["p"].is_null()) {
    if (!body["p"].is_number() || !(body["p"].get<double>() >= 1.0) ||
        !std::isfinite(body["p"].get<double>())) {
      return error_response(400, "p must be a number >= 1");
    }
    p = NormOrder(body["p"].get<double>());
  }

  auto validated = validate_trade(*up, *down, 0, "request");
  if (const auto* reason = std::get_if<RejectReason>(&validated)) {
    return error_response(400, "invalid trade: " + std::string(to_string(*reason)));
  }
  const Trade& trade = std::get<Trade>(validated);
  const TradeAssessment a =
      assess_trade(trade, loaded->fit.result.params, p, state.options().assessment);
  json out{{"value_up", a.value_up},
           {"value_down", a.value_down},
           {"delta", a.delta},
           {"verdict", a.verdict},
           {"balance_hint", a.balance_hint ? json(*a.balance_hint) : json(nullptr)},
           {"hint_side", a.hint_side ? json(*a.hint_side) : json(nullptr)},
           {"delta_after_hint", a.delta_after_hint ? json(*a.delta_after_hint) : json(nullptr)},
           {"norm", norm_name},
           {"p", p.value()},
           {"params", params_json(loaded->fit.result.params)}};
  return {200, std::move(out)};
}

Response handle_meta(const ServiceState& state) {
  json fits = json::object();
  json boots = json::object();
  json dataset = json::object();
  for (const char* name : {"l1", "l2"}) {
    const ServiceState::Norm* n = state.norm(name);
    if (n == nullptr) continue;
    const FitReport& f = n->fit;
    fits[name] = json{{"lambda", f.result.params.lambda()},
                      {"beta", f.result.params.beta()},
                      {"loss", to_string(f.loss)},
                      {"p", f.p.value()},
                      {"loss_value", f.result.loss_value},
                      {"iterations", f.result.iterations},
                      {"converged", f.result.converged},
                      {"status", f.result.status}};
    if (dataset.empty()) {
      dataset = json{{"source", f.dataset}, {"trades", f.trade_count}};
      if (f.ingest) {
        dataset["rows_read"] = f.ingest->rows_read;
        dataset["rows_dropped_year_filter"] = f.ingest->rows_dropped_year_filter;
        dataset["rows_dropped_future_picks"] = f.ingest->rows_dropped_future_picks;
        dataset["rows_dropped_parse_error"] = f.ingest->rows_dropped_parse_error;
      }
    }
    if (n->bootstrap) {
      const BootstrapResult& b = n->bootstrap->result;
      boots[name] = json{{"lambda_ci", {b.lambda_ci.lower, b.lambda_ci.upper}},
                         {"beta_ci", {b.beta_ci.lower, b.beta_ci.upper}},
                         {"lambda_mean", b.lambda_point_summary},
                         {"beta_mean", b.beta_point_summary},
                         {"lambda_median", b.lambda_median},
                         {"beta_median", b.beta_median},
                         {"confidence_level", b.confidence_level},
                         {"replicates", b.replicates_requested},
                         {"replicates_ok", b.replicate_params.size()},
                         {"seed", b.master_seed}};
    }
  }
  const AssessmentOptions& opts = state.options().assessment;
  json body{{"version", state.version()},
            {"dataset", std::move(dataset)},
            {"fits", std::move(fits)},
            {"bootstrap", std::move(boots)},
            {"jj", {{"top", state.jj().top()}, {"last_pick", state.jj().last_pick()}}},
            {"fairness_threshold", opts.fairness_threshold},
            {"hint_max_pick", opts.hint_max_pick},
            {"delta_convention", "value_up - value_down"}};
  return {200, std::move(body)};
}

Server::Server(const ServiceState& state)
    : state_(state), http_(std::make_unique<httplib::Server>()) {
  const std::string origin = state_.options().cors_origin;
  auto send = [origin](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_content(r.body.dump(), "application/json");
  };
  http_->Get("/api/curve", [this, send](const httplib::Request& req, httplib::Response& res) {
    auto param = [&](const char* key) -> std::optional<std::string> {
      if (!req.has_param(key)) return std::nullopt;
      return req.get_param_value(key);
    };
    send(res, handle_curve(state_, param("norm"), param("n_max")));
  });
  http_->Post("/api/evaluate", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_evaluate(state_, req.body));
  });
  http_->Get("/api/meta", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_meta(state_));
  });
  http_->Options(R"(/api/.*)", [origin](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  const int bound = port == 0 ? http_->bind_to_any_port(host.c_str())
                              : (http_->bind_to_port(host.c_str(), port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorKind::io, "cannot listen on " + host + ":" + std::to_string(port));
  }
  return bound;
}

void Server::listen() { http_->listen_after_bind(); }

void Server::stop() {
  if (http_) http_->stop();
}

bool Server::running() const { return http_->is_running(); }

}  // namespace draftval
