#include <doctest.h>

#include <sstream>

#include "draftval/cli.hpp"
#include "draftval/report.hpp"
#include "draftval/service.hpp"
#include "synthetic.hpp"
#include "tempdir.hpp"

using namespace draftval;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "draftval");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string join(const TradeSide& s) {
  std::string out;
  for (PickNumber n : s.picks()) out += (out.empty() ? "" : ",") + std::to_string(n.value());
  return out;
}

std::filesystem::path write_corpus(const testing::TempDir& dir, int count) {
  const auto trades = testing::noisy_market_corpus(CurveParams(0.02, 1.4), count, 0.1, 77);
  std::string text = "season,up_picks,down_picks\n";
  int year = 2006;
  for (const Trade& t : trades) {
    text += std::to_string(year) + ",\"" + join(t.up) + "\",\"" + join(t.down) + "\"\n";
    year = year == 2023 ? 2006 : year + 1;
  }
  return dir.write("trades.csv", text);
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"evaluate", "--up", "1", "--params", "0.1,1"}).code == 2);
  CHECK(run({"evaluate", "--up", "1", "--down", "x", "--params", "0.1,1"}).code == 2);
  CHECK(run({"evaluate", "--up", "1,1", "--down", "2", "--params", "0.1,1"}).code == 2);
  CHECK(run({"evaluate", "--up", "1", "--down", "2", "--params", "0.1"}).code == 5);
  CHECK(run({"chart", "--picks", "0", "--l1", "0.1,1", "--l2", "0.1,1"}).code == 2);
}

TEST_CASE("evaluate") {
  const Run same = run({"evaluate", "--up", "1", "--down", "1", "--params", "0.03,1.6"});
  CHECK(same.code == 0);
  CHECK(same.out.find("verdict:              balanced") != std::string::npos);

  testing::TempDir dir;
  const Run r = run({"evaluate", "--up", "1", "--down", "2,3", "--params", "0.030773,1.638750",
                     "--out", (dir / "eval.txt").string()});
  CHECK(r.code == 0);
  const KeyValues kv = KeyValues::load(dir / "eval.txt");
  CHECK(kv.require_double("delta") == doctest::Approx(-0.8783178954382154).epsilon(1e-13));
  CHECK(kv.require_double("p") == 1.0);
  CHECK(kv.require("verdict") == "down_side_overpays");

  const Run l2 = run({"evaluate", "--up", "1", "--down", "2,3", "--params", "0.030773,1.638750",
                      "--p", "2", "--out", (dir / "eval2.txt").string()});
  CHECK(l2.code == 0);
  CHECK(KeyValues::load(dir / "eval2.txt").require_double("delta") ==
        doctest::Approx(-0.3288732222662355).epsilon(1e-13));
}

TEST_CASE("fit exit codes") {
  testing::TempDir dir;
  const auto header_only = dir.write("empty.csv", "season,up_picks,down_picks\n");
  CHECK(run({"fit", "--data", header_only.string()}).code == 3);
  CHECK(run({"fit", "--data", (dir / "nope.csv").string()}).code == 5);
  const auto wrong = dir.write("wrong.csv", "a,b,c\n1,2,3\n");
  CHECK(run({"fit", "--data", wrong.string()}).code == 3);
  const auto data = write_corpus(dir, 40);
  CHECK(run({"fit", "--data", data.string(), "--loss", "huber"}).code == 2);
  CHECK(run({"fit", "--data", data.string(), "--p", "0.5"}).code == 2);
  CHECK(run({"fit", "--data", data.string(), "--init-lambda", "9"}).code == 2);
}

TEST_CASE("fit writes a report that chart and evaluate consume") {
  testing::TempDir dir;
  const auto data = write_corpus(dir, 60);
  const auto l1 = dir / "l1.txt";
  const auto l2 = dir / "l2.txt";
  REQUIRE(run({"fit", "--data", data.string(), "--loss", "mae", "--out", l1.string()}).code == 0);
  REQUIRE(run({"fit", "--data", data.string(), "--loss", "mse", "--out", l2.string()}).code == 0);
  const FitReport f1 = load_fit_report(l1);
  const FitReport f2 = load_fit_report(l2);
  CHECK(f1.p == NormOrder::l1());
  CHECK(f2.p == NormOrder::l2());
  CHECK(f1.trade_count == 60);
  REQUIRE(f1.ingest);
  CHECK(f1.ingest->rows_read == 60);

  const auto from_reports = dir / "a.csv";
  REQUIRE(run({"chart", "--l1-fit", l1.string(), "--l2-fit", l2.string(), "--out",
               from_reports.string()})
              .code == 0);
  const auto from_params = dir / "b.csv";
  REQUIRE(run({"chart", "--l1",
               format_exact(f1.result.params.lambda()) + "," + format_exact(f1.result.params.beta()),
               "--l2",
               format_exact(f2.result.params.lambda()) + "," + format_exact(f2.result.params.beta()),
               "--out", from_params.string()})
              .code == 0);
  const auto from_data = dir / "c.csv";
  REQUIRE(run({"chart", "--data", data.string(), "--out", from_data.string()}).code == 0);
  const std::string a = testing::slurp(from_reports);
  CHECK(a == testing::slurp(from_params));
  CHECK(a == testing::slurp(from_data));
  CHECK(a.rfind("Pick,L1_value,L2_value,Jimmy_Johnson\n", 0) == 0);
  CHECK(line_count(a) == 257);

  // The evaluate subcommand and the service agree on the same report.
  const auto eval = dir / "e.txt";
  REQUIRE(run({"evaluate", "--up", "5,40", "--down", "9,12,70", "--params", l2.string(), "--out",
               eval.string()})
              .code == 0);
  const KeyValues kv = KeyValues::load(eval);
  CHECK(kv.require_double("p") == 2.0);
  const ServiceState state(f1, f2, std::nullopt, std::nullopt,
                           JjReference::load(std::string(DRAFTVAL_DEFAULT_ASSET_DIR) +
                                             "/jimmy_johnson.csv"));
  const Response resp = handle_evaluate(state, R"({"up":[5,40],"down":[9,12,70],"norm":"l2"})");
  CHECK(std::abs(resp.body["delta"].get<double>() - kv.require_double("delta")) <= 1e-9);
  CHECK(std::abs(resp.body["value_up"].get<double>() - kv.require_double("value_up")) <= 1e-9);
}

TEST_CASE("decoupled loss and norm are recorded") {
  testing::TempDir dir;
  const auto data = write_corpus(dir, 30);
  const auto out = dir / "fit.txt";
  REQUIRE(run({"fit", "--data", data.string(), "--loss", "mse", "--p", "1", "--out", out.string()})
              .code == 0);
  const KeyValues kv = KeyValues::load(out);
  CHECK(kv.require("loss") == "mse");
  CHECK(kv.require_double("p") == 1.0);
}

TEST_CASE("iteration cap warns but succeeds") {
  testing::TempDir dir;
  const auto data = write_corpus(dir, 30);
  const Run r = run({"fit", "--data", data.string(), "--max-iter", "1"});
  CHECK(r.code == 0);
  CHECK(r.err.find("WARNING") != std::string::npos);
}

TEST_CASE("bootstrap") {
  testing::TempDir dir;
  const auto data = write_corpus(dir, 30);
  CHECK(run({"bootstrap", "--data", data.string(), "--replicates", "1"}).code == 2);
  const auto a = dir / "a.txt";
  const auto b = dir / "b.txt";
  for (const auto& out : {a, b}) {
    REQUIRE(run({"bootstrap", "--data", data.string(), "--loss", "mse", "--replicates", "12",
                 "--seed", "5", "--out", out.string()})
                .code == 0);
  }
  CHECK(testing::slurp(a.string() + ".replicates.csv") ==
        testing::slurp(b.string() + ".replicates.csv"));
  std::string ta = testing::slurp(a), tb = testing::slurp(b);
  // Only the replicates file name differs between the two reports.
  auto strip = [](std::string s) { return s.substr(0, s.find("replicates_file")); };
  CHECK(strip(ta) == strip(tb));
  const BootstrapReport br = load_bootstrap_report(a);
  CHECK(br.result.master_seed == 5);
  CHECK(br.result.replicates_requested == 12);

  // Band output from the saved bootstrap.
  const auto l2 = dir / "l2.txt";
  REQUIRE(run({"fit", "--data", data.string(), "--loss", "mse", "--out", l2.string()}).code == 0);
  const auto band = dir / "band.csv";
  REQUIRE(run({"chart", "--l1", "0.01,1.2", "--l2-fit", l2.string(), "--l2-bootstrap", a.string(),
               "--l2-band-out", band.string(), "--picks", "32", "--out", (dir / "c.csv").string()})
              .code == 0);
  const std::string band_text = testing::slurp(band);
  CHECK(band_text.rfind("Pick,value,lower,upper\n", 0) == 0);
  CHECK(line_count(band_text) == 33);
  CHECK(line_count(testing::slurp(dir / "c.csv")) == 33);
}

TEST_CASE("ingest audit") {
  testing::TempDir dir;
  const auto data = dir.write("t.csv", "season,up_picks,down_picks\n2019,1,\"2,3\"\n2001,4,5\n");
  const auto audit = dir / "audit.csv";
  const Run r = run({"ingest", "--data", data.string(), "--audit", audit.string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("dropped (year):       1") != std::string::npos);
  CHECK(testing::slurp(audit) == "id,year,up_picks,down_picks\n1,2019,1,2|3\n");
  CHECK(run({"ingest", "--data", data.string(), "--year-min", "2000"}).out.find("trades kept:          2") !=
        std::string::npos);
  CHECK(run({"ingest", "--data", data.string(), "--year-min", "2030"}).code == 2);
}
