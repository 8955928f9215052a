// elkit: empirical-likelihood fitting, global-maximum testing and Monte Carlo
// scenario runner.
//
// Exit codes: 0 success, 2 domain or parse error, 3 no fit.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "elkit/experiments.hpp"
#include "elkit/gmtests.hpp"
#include "elkit/models.hpp"
#include "elkit/optimize.hpp"

namespace {

using nlohmann::json;

constexpr int kExitDomain = 2;
constexpr int kExitNoFit = 3;

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const elkit::CandidatePoint& c) {
  return {{"theta", num(c.theta)},
          {"value", num(c.value)},
          {"kind", c.kind == elkit::CandidateKind::global_min ? "global_min" : "local_min"}};
}

json to_json(const elkit::FitResult& fit) {
  json cands = json::array();
  for (const auto& c : fit.candidates) cands.push_back(to_json(c));
  return {{"selected", to_json(fit.selected)},
          {"candidates", cands},
          {"evaluations", fit.evaluations},
          {"objective_tag", elkit::to_string(fit.objective_tag)}};
}

json to_json(const elkit::TestOutcome& t) {
  json j{{"method", elkit::to_string(t.method)},
         {"statistic", num(t.statistic)},
         {"ref_dist", elkit::to_string(t.ref_dist)},
         {"p_value", t.p_value ? num(*t.p_value) : json(nullptr)},
         {"reject", t.reject},
         {"alpha", t.alpha},
         {"status", elkit::to_string(t.status)},
         {"used_ael", t.used_ael}};
  if (t.method == elkit::TestMethod::el_global) j["df"] = t.df;
  if (t.bound) j["bound"] = num(*t.bound);
  if (!t.note.empty()) j["note"] = t.note;
  return j;
}

elkit::SearchSpec search_for(const std::vector<double>& box, int grid) {
  elkit::SearchSpec s;
  if (box.size() == 2) s.box = {box[0], box[1]};
  s.grid_points = grid;
  // Keeps the curved-normal pole off the grid.
  s.excluded = {{-1e-6, 1e-6}};
  return s;
}

std::vector<double> read_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return elkit::parse_dataset(buf.str(), 1).values();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical likelihood with estimating functions: fits, global maximum tests, simulations"};
  app.require_subcommand(1);

  // simulate
  std::string scenario;
  int sim_n = 0, reps = 0;
  double sim_alpha = 0.0;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format = "csv";
  unsigned threads = 0;
  auto* simulate = app.add_subcommand("simulate", "Run a builtin Monte Carlo scenario");
  simulate->add_option("--scenario", scenario, "Scenario id")
      ->required()
      ->check(CLI::IsMember(elkit::builtin_scenario_ids()));
  simulate->add_option("--n", sim_n, "Single sample size (overrides the scenario list)");
  simulate->add_option("--reps", reps, "Replications");
  simulate->add_option("--alpha", sim_alpha, "Test level");
  auto* seed_opt = simulate->add_option("--seed", seed, "Base seed");
  simulate->add_option("--out", out_path, "Output path (stdout when absent)");
  simulate->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("--threads", threads, "Worker threads (0 = all cores)");

  // fit / test-global / roots share data options
  std::string data_path, model_id;
  std::size_t obs_dim = 0;
  bool use_ael = false;
  std::vector<double> box;
  int grid = 401;
  auto* fit = app.add_subcommand("fit", "Maximum empirical likelihood estimate; prints FitResult JSON");
  fit->add_option("--data", data_path)->required();
  fit->add_option("--model", model_id)->required();
  fit->add_option("--obs-dim", obs_dim)->required();
  fit->add_flag("--ael", use_ael, "Use the adjusted empirical likelihood");
  fit->add_option("--box", box)->expected(2);
  fit->add_option("--grid", grid);

  double theta = 0.0, test_alpha = 0.05;
  auto* test = app.add_subcommand("test-global", "Global maximum test at theta; prints TestOutcome JSON");
  test->add_option("--data", data_path)->required();
  test->add_option("--model", model_id)->required();
  test->add_option("--theta", theta)->required();
  test->add_option("--alpha", test_alpha)->required();
  test->add_option("--obs-dim", obs_dim);
  test->add_flag("--ael", use_ael, "Use the adjusted empirical likelihood");

  auto* roots = app.add_subcommand("roots", "All roots of the estimating equation in a box");
  roots->add_option("--data", data_path)->required();
  roots->add_option("--model", model_id)->required();
  roots->add_option("--box", box)->expected(2)->required();
  roots->add_option("--obs-dim", obs_dim);
  roots->add_option("--grid", grid);

  std::string hist_in;
  int bins = 20;
  auto* hist = app.add_subcommand("hist", "Histogram of one value per line");
  hist->add_option("--in", hist_in)->required();
  hist->add_option("--bins", bins)->required();
  hist->add_option("--out", out_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitDomain;
  }

  try {
    if (*simulate) {
      auto spec = elkit::builtin_scenario(scenario);
      if (sim_n > 0) spec.sample_sizes = {sim_n};
      if (reps > 0) spec.replications = reps;
      if (sim_alpha > 0.0) spec.alpha = sim_alpha;
      if (*seed_opt) spec.seed = seed;
      const auto report = elkit::run_scenario(spec, {threads});
      const auto fmt = format == "json" ? elkit::ReportFormat::json : elkit::ReportFormat::csv;
      if (out_path.empty())
        std::cout << elkit::format_report(report, fmt);
      else
        elkit::write_report(report, out_path, fmt);
      return 0;
    }

    if (*fit || *test || *roots) {
      const auto model = elkit::make_estimating_model(model_id);
      const auto data = elkit::read_dataset(data_path, obs_dim ? obs_dim : model.obs_dim());
      if (*fit) {
        auto search = search_for(box, grid);
        // Scalar data: scan at and between observations, where estimating
        // functions such as cube roots have kinks.
        if (data.dim() == 1) search.extra_nodes = elkit::observation_nodes(data);
        const auto result = elkit::mele(data, model, search, use_ael);
        std::cout << to_json(result).dump(2) << '\n';
      } else if (*test) {
        elkit::GlobalTestOptions opts;
        opts.use_ael = use_ael;
        const auto outcome = elkit::global_maximum_test(data, model, theta, test_alpha, opts);
        std::cout << to_json(outcome).dump(2) << '\n';
      } else {
        const auto found = elkit::solve_estimating_equation(data, model, search_for(box, grid));
        json arr = json::array();
        for (double r : found) arr.push_back(r);
        std::cout << json{{"roots", arr}}.dump(2) << '\n';
      }
      return 0;
    }

    if (*hist) {
      const auto values = read_values(hist_in);
      const auto result = elkit::emit_histogram(values, elkit::covering_bins(values, bins));
      std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot open " + out_path);
      out << "bin_left,bin_right,count\n";
      for (const auto& b : result)
        out << elkit::format_double(b.left) << ',' << elkit::format_double(b.right) << ',' << b.count
            << '\n';
      return 0;
    }
  } catch (const elkit::NoFitError& e) {
    std::cerr << "no fit: " << e.what() << '\n';
    return kExitNoFit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return 0;
}
