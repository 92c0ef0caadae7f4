#pragma once

// JSON-over-HTTP facade. State is loaded once from CLI-produced reports and
// never mutated; every handler is a pure function of (state, request).

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "draftval/chart.hpp"
#include "draftval/model.hpp"
#include "draftval/report.hpp"

namespace httplib {
class Server;
}

namespace draftval {

struct TradeAssessment {
  double value_up = 0.0;
  double value_down = 0.0;
  double delta = 0.0;
  std::string verdict;  // balanced | up_side_overpays | down_side_overpays
  std::optional<int> balance_hint;
  std::optional<std::string> hint_side;  // "up" or "down"
  std::optional<double> delta_after_hint;
};

struct AssessmentOptions {
  double fairness_threshold = 0.005;  // |delta| <= threshold * max(value_up, value_down)
  int hint_max_pick = 256;
};

/// Delta, verdict, and the single extra pick (1..hint_max_pick, not already
/// in the trade) whose addition to the lower-valued side minimizes |delta|.
/// No hint is given unless it strictly reduces |delta|; ties go to the
/// smaller pick number.
TradeAssessment assess_trade(const Trade& trade, const CurveParams& params, NormOrder p,
                             const AssessmentOptions& options = {});

struct ServiceOptions {
  AssessmentOptions assessment;
  std::string cors_origin = "*";
  int band_picks = PickNumber::kMax;
};

class ServiceState {
 public:
  struct Norm {
    FitReport fit;
    std::optional<BootstrapReport> bootstrap;
    std::optional<CurveBand> band;
  };

  ServiceState(std::optional<FitReport> l1, std::optional<FitReport> l2,
               std::optional<BootstrapReport> l1_boot, std::optional<BootstrapReport> l2_boot,
               JjReference jj, ServiceOptions options = {});

  struct Paths {
    std::optional<std::filesystem::path> l1_fit;
    std::optional<std::filesystem::path> l2_fit;
    std::optional<std::filesystem::path> l1_bootstrap;
    std::optional<std::filesystem::path> l2_bootstrap;
    std::filesystem::path jj;
  };
  static ServiceState load(const Paths& paths, ServiceOptions options = {});

  const Norm* norm(std::string_view name) const noexcept;
  const JjReference& jj() const noexcept { return jj_; }
  const ServiceOptions& options() const noexcept { return options_; }
  std::string_view version() const noexcept;

 private:
  std::optional<Norm> l1_;
  std::optional<Norm> l2_;
  JjReference jj_;
  ServiceOptions options_;
};

struct Response {
  int status = 200;
  nlohmann::json body;
};

Response handle_curve(const ServiceState& state, std::optional<std::string> norm,
                      std::optional<std::string> n_max);
Response handle_evaluate(const ServiceState& state, std::string_view body);
Response handle_meta(const ServiceState& state);

/// HTTP server bound to one ServiceState. listen() blocks until stop().
class Server {
 public:
  explicit Server(const ServiceState& state);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port. Throws Error(io).
  int bind(const std::string& host, int port);
  void listen();
  void stop();
  bool running() const;

 private:
  const ServiceState& state_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace draftval
