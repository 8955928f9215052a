#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "elkit/experiments.hpp"

using namespace elkit;

namespace {

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

ScenarioSpec small(const std::string& id, int reps, int n) {
  auto s = builtin_scenario(id);
  s.replications = reps;
  s.sample_sizes = {n};
  return s;
}

}  // namespace

TEST_CASE("histogram counts") {
  const std::vector<double> v{0.0, 1.0, 2.0, 3.0};
  const auto h = emit_histogram(v, {0.0, 2.0, 2});
  REQUIRE(h.size() == 2);
  CHECK(h[0] == HistogramBin{0.0, 2.0, 2});
  CHECK(h[1] == HistogramBin{2.0, 4.0, 2});

  const std::vector<double> one{0.7};
  const auto single = emit_histogram(one, covering_bins(one, 1));
  REQUIRE(single.size() == 1);
  CHECK(single[0].count == 1);

  CHECK_THROWS_AS(emit_histogram(v, {0.0, 0.0, 2}), std::domain_error);
  CHECK_THROWS_AS(emit_histogram(v, {0.0, 1.0, 2}), std::domain_error);
  CHECK_THROWS_AS(emit_histogram(std::vector<double>{}, {0.0, 1.0, 2}), std::domain_error);
}

TEST_CASE("histogram counts sum to the input size") {
  RngStream rng(3, 0);
  std::vector<double> v(997);
  for (auto& x : v) x = rng.standard_normal();
  for (int bins : {1, 7, 40}) {
    const auto h = emit_histogram(v, covering_bins(v, bins));
    std::size_t total = 0;
    for (const auto& b : h) total += b.count;
    CHECK(total == v.size());
  }
}

TEST_CASE("report serialization") {
  Report empty{"s", {}, {}};
  CHECK(format_report(empty, ReportFormat::csv) == "scenario,label,n,kind,value,mc_se\n");

  Report r{"demo", {{"mele", 100, "mean", 0.1, 0.01}, {"el_global@local", 100, "rate", 1.0 / 3.0, 0.2}}, {}};
  r.raw["mele@n=100"] = {0.25, -1.5};
  const auto csv = format_report(r, ReportFormat::csv);
  CHECK(count_lines(csv) == r.rows.size() + 1);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.find("demo,mele,100,mean,0.1,0.01\n") != std::string::npos);

  const auto back = parse_report_json(format_report(r, ReportFormat::json));
  CHECK(back.scenario == r.scenario);
  CHECK(back.rows == r.rows);
  CHECK(back.raw == r.raw);

  const auto dir = std::filesystem::temp_directory_path() / "elkit_test_experiments";
  std::filesystem::create_directories(dir);
  write_report(r, dir / "r.csv", ReportFormat::csv);
  std::ifstream in(dir / "r.csv", std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == csv);
  CHECK_THROWS(write_report(r, dir / "missing" / "r.csv", ReportFormat::csv));
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 12345678.9, 0.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(1.0) == "1");
}

TEST_CASE("dataset parsing") {
  const auto a = parse_dataset("1.0\n2.0\n", 1);
  CHECK(a.size() == 2);
  CHECK(a.values() == std::vector<double>{1.0, 2.0});
  const auto b = parse_dataset("1,2\n3,4\n", 2);
  REQUIRE(b.size() == 2);
  CHECK(b.row(1)[0] == 3.0);
  CHECK(b.row(1)[1] == 4.0);
  try {
    parse_dataset("1,x\n", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 1);
  }
  try {
    parse_dataset("1,2\n3\n", 2);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
  }
  CHECK_THROWS_AS(read_dataset("/nonexistent/elkit.csv", 1), std::runtime_error);
}

TEST_CASE("builtin scenarios validate") {
  for (const auto& id : builtin_scenario_ids()) {
    CAPTURE(id);
    CHECK_NOTHROW(builtin_scenario(id).validate());
  }
  CHECK_THROWS_AS(builtin_scenario("table9"), std::domain_error);
  auto s = builtin_scenario("table2");
  s.replications = 0;
  CHECK_THROWS_AS(s.validate(), std::domain_error);
  s = builtin_scenario("table2");
  s.el_model = "nope";
  CHECK_THROWS_AS(s.validate(), std::domain_error);
}

TEST_CASE("scenario runs are deterministic") {
  for (const std::string id : {"table2", "table4", "table6", "table8"}) {
    CAPTURE(id);
    const auto spec = small(id, 2, 40);
    const auto a = format_report(run_scenario(spec, {1}), ReportFormat::csv);
    const auto b = format_report(run_scenario(spec, {2}), ReportFormat::csv);
    CHECK(a == b);
  }
}

TEST_CASE("replication data depend only on seed and replication index") {
  const auto spec = builtin_scenario("table3");
  CHECK(draw_replication(spec, 20, 4) == draw_replication(spec, 20, 4));
  CHECK_FALSE(draw_replication(spec, 20, 4) == draw_replication(spec, 20, 5));
  // y = t + t^2 x + e with t = 1, so y - 1 - x has sample mean near zero.
  const auto d = draw_replication(spec, 2000, 0);
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += d.row(i)[1] - 1.0 - d.row(i)[0];
  CHECK(std::fabs(s / 2000.0) < 0.1);
}

TEST_CASE("rates lie in the unit interval with binomial standard errors") {
  const auto rep = run_scenario(small("table6", 20, 50));
  bool any = false;
  for (const auto& row : rep.rows) {
    if (row.kind != "rate") continue;
    any = true;
    CHECK(row.value >= 0.0);
    CHECK(row.value <= 1.0);
    const auto na = rep.find(row.label, row.n, "n/a");
    REQUIRE(na != nullptr);
    const double used = 20.0 - na->value;
    CHECK(row.mc_se == doctest::Approx(std::sqrt(row.value * (1.0 - row.value) / used)));
  }
  CHECK(any);
}

TEST_CASE("histogram scenario counts every fitted replication") {
  const auto rep = run_scenario(small("fig1", 10, 60));
  double total = 0.0;
  for (const auto& row : rep.rows)
    if (row.kind == "count") total += row.value;
  const auto no_fit = rep.find("mele", 60, "no_fit");
  CHECK(total + (no_fit ? no_fit->value : 0.0) == 10.0);
}
