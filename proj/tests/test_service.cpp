#include <doctest.h>

#include <chrono>
#include <thread>

#include <httplib.h>

#include "draftval/chart.hpp"
#include "draftval/service.hpp"

using namespace draftval;
using nlohmann::json;

namespace {

FitReport make_fit(LossKind loss, CurveParams params) {
  FitReport r;
  r.loss = loss;
  r.p = paired_norm(loss);
  r.result.params = params;
  r.result.loss_value = 0.1;
  r.result.converged = true;
  r.result.status = "projected_gradient";
  r.dataset = "fixture.csv";
  r.trade_count = 10;
  return r;
}

BootstrapReport make_boot(LossKind loss, CurveParams centre) {
  std::vector<CurveParams> reps;
  for (int i = 0; i < 9; ++i) {
    reps.emplace_back(centre.lambda() * (0.8 + 0.05 * i), centre.beta() * (0.95 + 0.0125 * i));
  }
  BootstrapReport b;
  b.loss = loss;
  b.p = paired_norm(loss);
  b.result = summarize_replicates(reps, 0.95);
  b.result.master_seed = 7;
  b.result.replicates_requested = 9;
  b.point_fit.params = centre;
  return b;
}

JjReference jj() {
  return JjReference::load(std::string(DRAFTVAL_DEFAULT_ASSET_DIR) + "/jimmy_johnson.csv");
}

const CurveParams kL1(0.015761, 1.157242);
const CurveParams kL2(0.030773, 1.638750);

ServiceState full_state() {
  return ServiceState(make_fit(LossKind::mae, kL1), make_fit(LossKind::mse, kL2),
                      make_boot(LossKind::mae, kL1), std::nullopt, jj());
}

}  // namespace

TEST_CASE("assessment verdicts and hint") {
  const Trade same{make_side({10}), make_side({10}), 0, {}};
  const TradeAssessment a = assess_trade(same, kL2, NormOrder::l2());
  CHECK(a.delta == 0.0);
  CHECK(a.verdict == "balanced");
  CHECK_FALSE(a.balance_hint);

  const Trade t{make_side({1}), make_side({2, 3}), 0, {}};
  const TradeAssessment b = assess_trade(t, kL2, NormOrder::l1());
  CHECK(b.delta == doctest::Approx(-0.8783178954382154).epsilon(1e-13));
  CHECK(b.verdict == "down_side_overpays");
  REQUIRE(b.balance_hint);
  CHECK(*b.hint_side == "up");
  CHECK(std::abs(*b.delta_after_hint) < std::abs(b.delta));
  // Brute force: no other single pick does strictly better.
  for (int m = 4; m <= 256; ++m) {
    const Trade alt{make_side({1, m}), make_side({2, 3}), 0, {}};
    CHECK(std::abs(trade_delta(alt, kL2, NormOrder::l1())) >= std::abs(*b.delta_after_hint) - 1e-15);
  }

  const TradeAssessment c = assess_trade(t.swapped(), kL2, NormOrder::l1());
  CHECK(c.delta == -b.delta);
  CHECK(c.verdict == "up_side_overpays");
  CHECK(*c.hint_side == "down");
}

TEST_CASE("threshold is relative to the larger side") {
  const Trade t{make_side({5}), make_side({6}), 0, {}};
  const CurveParams flat(0.001, 1.0);
  const double va = pick_value(PickNumber(5), flat), vb = pick_value(PickNumber(6), flat);
  AssessmentOptions o;
  o.fairness_threshold = (va - vb) / va * 1.01;
  CHECK(assess_trade(t, flat, NormOrder::l1(), o).verdict == "balanced");
  o.fairness_threshold = (va - vb) / va * 0.99;
  CHECK(assess_trade(t, flat, NormOrder::l1(), o).verdict == "up_side_overpays");
}

TEST_CASE("curve endpoint") {
  const ServiceState s = full_state();
  const Response one = handle_curve(s, "l1", "1");
  REQUIRE(one.status == 200);
  CHECK(one.body["values"] == json::array({1.0}));
  CHECK(one.body["picks"] == json::array({1}));

  const Response l1 = handle_curve(s, "l1", std::nullopt);
  const Response l2 = handle_curve(s, "l2", "256");
  CHECK(l1.body["values"].size() == 256);
  CHECK(l1.body["picks"] == l2.body["picks"]);
  CHECK(l1.body["params"]["lambda"] == kL1.lambda());
  CHECK(l2.body["params"]["beta"] == kL2.beta());
  CHECK(l1.body["band"] == "pointwise_percentile");
  CHECK(l2.body["band"] == "none");
  CHECK(l2.body["lower"] == l2.body["values"]);
  for (int i = 0; i < 256; ++i) {
    CHECK(l1.body["lower"][i].get<double>() <= l1.body["upper"][i].get<double>());
  }

  // Same six-decimal table as the chart emitter.
  const ValueChart chart = build_chart(kL1, kL2, jj(), 256);
  for (int i = 0; i < 256; ++i) {
    CHECK(format_value(l1.body["values"][i].get<double>()) == format_value(chart.l1_values[i]));
    CHECK(format_value(l2.body["values"][i].get<double>()) == format_value(chart.l2_values[i]));
  }

  CHECK(handle_curve(s, "l3", "10").status == 400);
  CHECK(handle_curve(s, std::nullopt, "10").status == 400);
  CHECK(handle_curve(s, "l1", "0").status == 400);
  CHECK(handle_curve(s, "l1", "1025").status == 400);
  CHECK(handle_curve(s, "l1", "12x").status == 400);
  CHECK(handle_curve(s, "l1", "1024").body["values"].size() == 1024);

  const ServiceState empty(std::nullopt, std::nullopt, std::nullopt, std::nullopt, jj());
  CHECK(handle_curve(empty, "l1", "5").status == 503);
}

TEST_CASE("evaluate endpoint") {
  const ServiceState s = full_state();
  Response r = handle_evaluate(s, R"({"up":[1],"down":[2,3],"norm":"l2","p":1})");
  REQUIRE(r.status == 200);
  CHECK(r.body["delta"].get<double>() == doctest::Approx(-0.8783178954382154).epsilon(1e-13));
  CHECK(r.body["verdict"] == "down_side_overpays");
  CHECK(r.body["balance_hint"].is_number_integer());

  r = handle_evaluate(s, R"({"up":[1],"down":[2,3],"norm":"l2"})");
  CHECK(r.body["p"] == 2.0);
  CHECK(r.body["delta"].get<double>() == doctest::Approx(-0.3288732222662355).epsilon(1e-13));

  r = handle_evaluate(s, R"({"up":[10],"down":[10],"norm":"l1"})");
  CHECK(r.body["delta"] == 0.0);
  CHECK(r.body["verdict"] == "balanced");
  CHECK(r.body["balance_hint"].is_null());

  const Response fwd = handle_evaluate(s, R"({"up":[4,40],"down":[7,9],"norm":"l1"})");
  const Response back = handle_evaluate(s, R"({"up":[7,9],"down":[4,40],"norm":"l1"})");
  CHECK(fwd.body["delta"].get<double>() == -back.body["delta"].get<double>());
  CHECK(fwd.body["verdict"] != back.body["verdict"]);

  CHECK(handle_evaluate(s, "not json").status == 400);
  CHECK(handle_evaluate(s, "[1,2]").status == 400);
  CHECK(handle_evaluate(s, R"({"up":[1,1],"down":[2]})").status == 400);
  CHECK(handle_evaluate(s, R"({"up":[0],"down":[2]})").status == 400);
  CHECK(handle_evaluate(s, R"({"up":[1.5],"down":[2]})").status == 400);
  CHECK(handle_evaluate(s, R"({"up":"1","down":[2]})").status == 400);
  CHECK(handle_evaluate(s, R"({"down":[2]})").status == 400);
  CHECK(handle_evaluate(s, R"({"up":[],"down":[2]})").status == 422);
  CHECK(handle_evaluate(s, R"({"up":[1],"down":[]})").status == 422);
  CHECK(handle_evaluate(s, R"({"up":[1],"down":[2],"norm":"l7"})").status == 400);
  CHECK(handle_evaluate(s, R"({"up":[1],"down":[2],"p":0.5})").status == 400);
}

TEST_CASE("meta endpoint passes the loaded reports through") {
  const ServiceState s = full_state();
  const Response m = handle_meta(s);
  REQUIRE(m.status == 200);
  CHECK_FALSE(m.body["version"].get<std::string>().empty());
  CHECK(m.body["fits"]["l1"]["lambda"] == kL1.lambda());
  CHECK(m.body["fits"]["l2"]["beta"] == kL2.beta());
  const BootstrapReport boot = make_boot(LossKind::mae, kL1);
  CHECK(m.body["bootstrap"]["l1"]["lambda_ci"][0] == boot.result.lambda_ci.lower);
  CHECK(m.body["bootstrap"]["l1"]["beta_ci"][1] == boot.result.beta_ci.upper);
  CHECK_FALSE(m.body["bootstrap"].contains("l2"));
  CHECK(m.body["jj"]["top"] == 3000.0);
  CHECK(m.body["dataset"]["trades"] == 10);
}

TEST_CASE("handlers are order independent") {
  const ServiceState s = full_state();
  const std::string a = handle_curve(s, "l1", "40").body.dump();
  const std::string b = handle_evaluate(s, R"({"up":[3],"down":[8,30]})").body.dump();
  const std::string c = handle_meta(s).body.dump();
  CHECK(handle_meta(s).body.dump() == c);
  CHECK(handle_evaluate(s, R"({"up":[3],"down":[8,30]})").body.dump() == b);
  CHECK(handle_curve(s, "l1", "40").body.dump() == a);
}

TEST_CASE("live server") {
  const ServiceState s = full_state();
  Server server(s);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread loop([&] { server.listen(); });
  for (int i = 0; i < 200 && !server.running(); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }

  httplib::Client client("127.0.0.1", port);
  auto curve = client.Get("/api/curve?norm=l2&n_max=3");
  REQUIRE(curve);
  CHECK(curve->status == 200);
  CHECK(curve->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(json::parse(curve->body)["values"].size() == 3);

  auto bad = client.Get("/api/curve?norm=l9");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  auto eval = client.Post("/api/evaluate", R"({"up":[1],"down":[2,3],"norm":"l2","p":1})",
                          "application/json");
  REQUIRE(eval);
  CHECK(eval->status == 200);
  CHECK(json::parse(eval->body)["delta"].get<double>() ==
        doctest::Approx(-0.8783178954382154).epsilon(1e-13));

  auto meta = client.Get("/api/meta");
  REQUIRE(meta);
  CHECK(meta->status == 200);

  auto preflight = client.Options("/api/evaluate");
  REQUIRE(preflight);
  CHECK(preflight->status == 204);
  CHECK(preflight->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  server.stop();
  loop.join();
}
