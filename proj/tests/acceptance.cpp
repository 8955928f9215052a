// Acceptance run: one PASS/FAIL line per criterion. Monte Carlo criteria run
// the builtin scenarios at their full replication counts. The exit status is
// nonzero only when a criterion cannot be evaluated at all.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "catalog_cases.hpp"
#include "elkit/el_core.hpp"
#include "elkit/experiments.hpp"
#include "elkit/gmtests.hpp"
#include "elkit/models.hpp"
#include "elkit/numerics.hpp"
#include "elkit/optimize.hpp"
#include "oracles.hpp"

using namespace elkit;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

bool within(double v, double center, double tol) { return std::fabs(v - center) <= tol; }

// Appends "name=value [ok|out]" to the detail string and folds it into pass.
void check(Verdict& v, const std::string& name, double value, bool ok) {
  if (!v.detail.empty()) v.detail += "; ";
  v.detail += name + "=" + fmt("%.5g", value) + (ok ? "" : " (out of range)");
  v.pass = v.pass && ok;
}

double row(const Report& r, const std::string& label, int n, const std::string& kind) {
  const auto* p = r.find(label, n, kind);
  if (!p) throw std::runtime_error("report has no row " + label + "/" + kind);
  return p->value;
}

Report run(const std::string& id, std::vector<int> sizes) {
  auto spec = builtin_scenario(id);
  spec.sample_sizes = std::move(sizes);
  return run_scenario(spec);
}

Verdict oracle_equivalence() {
  Verdict v{true, ""};
  RngStream rng(20231015, 1);
  double worst = 0.0;
  int done = 0;
  while (done < 50) {
    const int n = 3 + static_cast<int>(rng.uniform() * 4.0);
    const int m = 1 + static_cast<int>(rng.uniform() * 2.0);
    GMatrix g(n, m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) g(i, j) = rng.standard_normal() + 0.5;
    const bool inside = m == 1 ? g.col(0).minCoeff() < 0.0 && g.col(0).maxCoeff() > 0.0
                               : oracle::origin_in_hull_interior_2d(g);
    if (!inside) continue;
    const auto expect = oracle::primal_el(g);
    const auto got = pelr_from_g(g);
    if (!expect || !std::isfinite(got.w_n)) {
      v.pass = false;
      worst = INFINITY;
    } else {
      worst = std::max(worst, std::fabs(got.w_n - *expect));
    }
    ++done;
  }
  check(v, "max|W_n - oracle|", worst, worst <= 1e-6);
  return v;
}

Verdict chisq_calibration() {
  Verdict v{true, ""};
  const auto model = curved_normal_remedy_model();
  const auto search = default_search(ScenarioFamily::curved_normal);
  std::vector<double> stats;
  int rejects = 0;
  for (int r = 0; r < 2000; ++r) {
    RngStream rng(20231015, static_cast<std::uint64_t>(r));
    const auto data = sample(normal_dist(1.0, 1.0), 200, rng);
    const auto fit = mele(data, model, search, false);
    const auto out = global_maximum_test(data, model, fit.selected.theta, 0.05);
    stats.push_back(out.statistic);
    rejects += out.reject;
  }
  const double rate = rejects / 2000.0;
  const double q95 = quantile(stats, 0.95);
  check(v, "rate", rate, rate >= 0.03 && rate <= 0.08);
  check(v, "q95(2W_n)", q95, within(q95, 3.84, 0.5));
  return v;
}

Verdict table1() {
  Verdict v{true, ""};
  const auto r = run("table1", {50, 100, 200});
  const double r50 = row(r, "roots_outside_unit", 50, "rate");
  const double r100 = row(r, "roots_outside_unit", 100, "rate");
  const double r200 = row(r, "roots_outside_unit", 200, "rate");
  check(v, "rate@50", r50, true);
  check(v, "rate@100", r100, within(r100, 0.260, 0.045));
  check(v, "rate@200", r200, r50 - r200 <= 0.045);
  return v;
}

Verdict table2() {
  Verdict v{true, ""};
  const auto r = run("table2", {100});
  const double mean = row(r, "mele", 100, "mean");
  const double var = row(r, "mele", 100, "variance");
  const double mle_var = row(r, "mle", 100, "variance");
  check(v, "mele mean", mean, within(mean, 0.0, 0.02));
  check(v, "mele var", var, var >= 0.016 && var <= 0.027);
  check(v, "mle var", mle_var, mle_var >= 0.015 && mle_var <= 0.026);
  return v;
}

Verdict tables3_4() {
  Verdict v{true, ""};
  const auto est = run("table3", {50});
  const double var = row(est, "mele", 50, "variance");
  check(v, "mele var", var, within(var, 1.5e-4, 0.3 * 1.5e-4));
  const auto t = run("table4", {50});
  const double local = row(t, "el_global@local", 50, "rate");
  const double global = row(t, "el_global@global", 50, "rate");
  const double dh = row(t, "dehaan100@local", 50, "rate");
  check(v, "el_global@local", local, local >= 0.99);
  check(v, "el_global@global", global, global <= 0.12);
  check(v, "dehaan100@local", dh, within(dh, 0.748, 0.05));
  return v;
}

Verdict tables5_6() {
  Verdict v{true, ""};
  const auto est = run("table5", {100});
  const double mean = row(est, "mele", 100, "mean");
  const double var = row(est, "mele", 100, "variance");
  check(v, "mele mean", mean, within(mean, 0.999, 0.01));
  check(v, "mele var", var, within(var, 0.0032, 0.3 * 0.0032));
  const auto t = run("table6", {100});
  const double eg = row(t, "el_global@global", 100, "rate");
  const double el = row(t, "el_global@local", 100, "rate");
  const double jg = row(t, "jiang@global", 100, "rate");
  const double jl = row(t, "jiang@local", 100, "rate");
  check(v, "el_global@global", eg, within(eg, 0.048, 0.03));
  check(v, "el_global@local", el, el == 1.0);
  check(v, "jiang@global", jg, within(jg, 0.168, 0.05));
  check(v, "jiang@local", jl, within(jl, 0.553, 0.07));
  return v;
}

Verdict tables7_8() {
  Verdict v{true, ""};
  const auto t = run("table7", {100});
  const double eg = row(t, "el_global@global", 100, "rate");
  const double el = row(t, "el_global@local", 100, "rate");
  check(v, "el_global@global", eg, within(eg, 0.046, 0.03));
  check(v, "el_global@local", el, el == 1.0);
  const auto est = run("table8", {100});
  const double dm = std::fabs(row(est, "mele", 100, "mean") - row(est, "mle", 100, "mean"));
  const double ve = row(est, "mele", 100, "variance"), vm = row(est, "mle", 100, "variance");
  const double rel = std::fabs(ve - vm) / vm;
  check(v, "|mean diff|", dm, dm <= 2e-3);
  check(v, "rel var diff", rel, rel <= 0.05);
  return v;
}

Verdict divergence() {
  Verdict v{true, ""};
  const auto model = cauchy_remedy_model();
  const double theta[] = {3.0};
  std::vector<double> med;
  for (int n : {50, 100, 200}) {
    std::vector<double> w;
    for (int r = 0; r < 200; ++r) {
      RngStream rng(20231015, static_cast<std::uint64_t>(r));
      w.push_back(profile_pelr(sample(cauchy_dist(0.0), static_cast<std::size_t>(n), rng), model, theta).w_n);
    }
    med.push_back(median(w));
  }
  check(v, "median@50", med[0], true);
  check(v, "median@100", med[1], med[1] > med[0]);
  check(v, "median@200", med[2], med[2] > med[1]);
  check(v, "ratio", med[2] / med[0], med[2] / med[0] > 2.0);
  return v;
}

Verdict determinism() {
  Verdict v{true, ""};
  int identical = 0;
  for (const auto& id : builtin_scenario_ids()) {
    auto spec = builtin_scenario(id);
    spec.replications = std::min(spec.replications, 20);
    const auto a = format_report(run_scenario(spec), ReportFormat::csv);
    const auto b = format_report(run_scenario(spec), ReportFormat::csv);
    identical += a == b;
  }
  check(v, "identical scenarios", identical,
        identical == static_cast<int>(builtin_scenario_ids().size()));
  return v;
}

Verdict unbiasedness() {
  Verdict v{true, ""};
  double worst = 0.0;
  for (const auto& c : cases::catalog_cases()) {
    const auto res = cases::component_means(c, 100000, 20231015);
    for (std::size_t j = 0; j < res.size(); ++j) {
      if (!c.components.empty() &&
          std::find(c.components.begin(), c.components.end(), j) == c.components.end())
        continue;
      worst = std::max(worst, std::fabs(res[j].mean) / res[j].std_error);
    }
  }
  check(v, "max |mean|/se", worst, worst <= 4.0);
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"chi-square calibration", chisq_calibration},
      {"Cauchy root census", table1},
      {"Cauchy remedy estimates", table2},
      {"NLR estimates and tests", tables3_4},
      {"curved normal estimates and tests", tables5_6},
      {"mixture tests and estimates", tables7_8},
      {"divergence at a wrong parameter", divergence},
      {"determinism", determinism},
      {"unbiasedness", unbiasedness},
  };
  int errors = 0, passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const auto v = criteria[i].second();
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      passed += v.pass;
      std::printf("criterion %zu %s: %s [%s] (%.1fs)\n", i + 1, criteria[i].first.c_str(),
                  v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    } catch (const std::exception& e) {
      ++errors;
      std::printf("criterion %zu %s: ERROR %s\n", i + 1, criteria[i].first.c_str(), e.what());
    }
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", passed, criteria.size());
  return errors == 0 ? 0 : 1;
}
