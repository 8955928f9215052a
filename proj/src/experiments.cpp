#include "elkit/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "elkit/gmtests.hpp"
#include "elkit/models.hpp"

namespace elkit {

namespace {

constexpr std::uint64_t kTestStreamBit = 1ull << 63;

struct ReplicationResult {
  std::map<std::string, std::optional<double>> estimates;
  std::map<std::string, std::optional<bool>> rejects;
  std::map<std::string, double> stats;
  std::vector<double> profile_theta;
  std::vector<double> profile_value;
};

ParametricModel parametric_by_name(const std::string& name) {
  auto cat = parametric_catalog();
  if (name == "cauchy") return cat.cauchy;
  if (name == "curved_normal") return cat.curved_normal;
  if (name == "mixture") return cat.mixture;
  if (name == "nlr_gaussian") return cat.nlr_gaussian;
  throw std::domain_error("unknown parametric model: " + name);
}

std::optional<FitResult> try_fit(const auto& fit_fn) {
  try {
    return fit_fn();
  } catch (const NoFitError&) {
    return std::nullopt;
  }
}

std::optional<CandidatePoint> local_candidate(const FitResult& fit, LocalRule rule) {
  std::optional<CandidatePoint> best;
  for (const auto& c : fit.candidates) {
    if (c.kind == CandidateKind::global_min || !std::isfinite(c.value)) continue;
    if (!best) {
      best = c;
      continue;
    }
    const bool closer = rule == LocalRule::nearest_minus_one
                            ? std::fabs(c.theta + 1.0) < std::fabs(best->theta + 1.0)
                            : c.value < best->value;
    if (closer) best = c;
  }
  return best;
}

void run_root_census(const ScenarioSpec& spec, const Dataset& data, ReplicationResult& out) {
  const auto model = make_estimating_model(spec.el_model);
  const auto xs = data.column(0);
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  SearchSpec s = spec.search;
  s.box = {std::min(*lo, -1.0) - 5.0, std::max(*hi, 1.0) + 5.0};
  s.extra_nodes = observation_stencil(data, 3.0, 0.1);
  for (double x = -10.0; x <= 10.0; x += 0.05) s.extra_nodes.push_back(x);
  s.extra_nodes.push_back(-1.0);
  s.extra_nodes.push_back(1.0);
  const auto roots = solve_estimating_equation(data, model, s);
  const bool outside =
      std::any_of(roots.begin(), roots.end(), [](double r) { return std::fabs(r) > 1.0; });
  out.rejects["roots_outside_unit"] = outside;
  out.stats["root_count"] = static_cast<double>(roots.size());
}

void run_fits_and_tests(const ScenarioSpec& spec, const Dataset& data, int replication,
                        ReplicationResult& out) {
  const auto model = make_estimating_model(spec.el_model);
  SearchSpec search = spec.search;
  // The cube-root component has a vertical tangent at every observation, so
  // W_n has small basins between neighbouring observations.
  if (spec.family == ScenarioFamily::cauchy) {
    const auto nodes = observation_nodes(data);
    search.extra_nodes.insert(search.extra_nodes.end(), nodes.begin(), nodes.end());
  }
  const auto el_fit = try_fit([&] { return mele(data, model, search, spec.use_ael); });
  out.estimates["mele"] = el_fit ? std::optional(el_fit->selected.theta) : std::nullopt;

  std::optional<FitResult> par_fit;
  std::optional<ParametricModel> par;
  if (!spec.parametric_model.empty()) {
    par = parametric_by_name(spec.parametric_model);
    par_fit = try_fit([&] { return mle(data, *par, spec.search); });
    out.estimates["mle"] = par_fit ? std::optional(par_fit->selected.theta) : std::nullopt;
  }

  if (spec.tests.el_global) {
    GlobalTestOptions opts;
    opts.use_ael = spec.use_ael;
    std::optional<bool> at_global, at_local;
    if (el_fit) {
      const auto g = global_maximum_test(data, model, el_fit->selected.theta, spec.alpha, opts);
      at_global = g.reject;
      out.stats["el_stat@global"] = g.statistic;
      if (const auto loc = local_candidate(*el_fit, spec.local_rule)) {
        const auto l = global_maximum_test(data, model, loc->theta, spec.alpha, opts);
        at_local = l.reject;
        out.stats["el_stat@local"] = l.statistic;
      }
    }
    out.rejects["el_global@global"] = at_global;
    out.rejects["el_global@local"] = at_local;
  }

  if (!spec.tests.dehaan_draws.empty()) {
    if (!par) throw std::domain_error("De Haan test needs a parametric objective");
    const auto objective = make_parametric_objective(data, *par);
    const auto maximize = [&objective](double t) { return -objective(t); };
    RngStream rng(spec.seed, kTestStreamBit | static_cast<std::uint64_t>(replication));
    const auto loc = par_fit ? local_candidate(*par_fit, spec.local_rule) : std::nullopt;
    for (int draws : spec.tests.dehaan_draws) {
      const std::string tag = "dehaan" + std::to_string(draws);
      std::optional<bool> at_global, at_local;
      // The global and local candidates are judged against the same draws.
      const RngStream start = rng;
      if (par_fit) {
        RngStream r = start;
        at_global = dehaan_test(maximize, -par_fit->selected.value, spec.search.box, draws,
                                spec.alpha, r)
                        .reject;
        if (loc) {
          RngStream r2 = start;
          at_local = dehaan_test(maximize, -loc->value, spec.search.box, draws, spec.alpha, r2).reject;
        }
        rng = r;
      }
      out.rejects[tag + "@global"] = at_global;
      out.rejects[tag + "@local"] = at_local;
    }
  }

  if (spec.tests.jiang) {
    if (!par) throw std::domain_error("Jiang test needs a parametric model");
    std::optional<bool> at_global, at_local;
    const auto judge = [&](double theta) -> std::optional<bool> {
      const auto t = jiang_test(data, *par, theta, spec.alpha);
      if (t.status != TestStatus::ok) return std::nullopt;
      return t.reject;
    };
    if (par_fit) {
      at_global = judge(par_fit->selected.theta);
      if (const auto loc = local_candidate(*par_fit, spec.local_rule)) at_local = judge(loc->theta);
    }
    out.rejects["jiang@global"] = at_global;
    out.rejects["jiang@local"] = at_local;
  }

  if (spec.profile_trace && replication == 0) {
    const auto profile = scan_profile(data, model, spec.search,
                                      spec.use_ael ? ObjectiveTag::ael_pelr : ObjectiveTag::pelr);
    out.profile_theta = profile.theta;
    out.profile_value = profile.value;
  }
}

ReplicationResult run_replication(const ScenarioSpec& spec, int n, int replication) {
  const Dataset data = draw_replication(spec, n, replication);
  ReplicationResult out;
  if (spec.family == ScenarioFamily::cauchy_roots)
    run_root_census(spec, data, out);
  else
    run_fits_and_tests(spec, data, replication, out);
  return out;
}

std::vector<ReplicationResult> run_all(const ScenarioSpec& spec, int n, unsigned threads) {
  std::vector<ReplicationResult> results(static_cast<std::size_t>(spec.replications));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (int r = next++; r < spec.replications; r = next++) {
      try {
        results[static_cast<std::size_t>(r)] = run_replication(spec, n, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = spec.replications;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

void add_estimate_rows(Report& report, const std::string& label, int n,
                       const std::vector<double>& values, std::size_t missing) {
  if (values.size() >= 2) {
    const auto s = summarize(values);
    const double nd = static_cast<double>(values.size());
    double m4 = 0.0;
    for (double v : values) m4 += std::pow(v - s.mean, 4);
    m4 /= nd;
    report.rows.push_back({label, n, "mean", s.mean, std::sqrt(s.variance / nd)});
    report.rows.push_back(
        {label, n, "variance", s.variance, std::sqrt(std::max(0.0, m4 - s.variance * s.variance) / nd)});
  }
  report.rows.push_back({label, n, "no_fit", static_cast<double>(missing), 0.0});
}

void aggregate(const ScenarioSpec& spec, int n, const std::vector<ReplicationResult>& results,
               Report& report) {
  const std::string suffix = "@n=" + std::to_string(n);
  if (results.empty()) return;

  if (spec.report_estimates || spec.histogram || spec.keep_raw) {
    for (const auto& [label, unused] : results.front().estimates) {
      std::vector<double> values;
      std::vector<double> raw;
      std::size_t missing = 0;
      for (const auto& r : results) {
        const auto& v = r.estimates.at(label);
        raw.push_back(v.value_or(std::numeric_limits<double>::quiet_NaN()));
        if (v)
          values.push_back(*v);
        else
          ++missing;
      }
      if (spec.report_estimates) add_estimate_rows(report, label, n, values, missing);
      if (spec.keep_raw || spec.histogram) report.raw[label + suffix] = raw;
      if (spec.histogram && label == "mele" && !values.empty()) {
        const double w = spec.histogram->bin_width;
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        const double left = std::floor(*lo / w) * w;
        const int count = std::max(1, static_cast<int>(std::floor((*hi - left) / w)) + 1);
        for (const auto& b : emit_histogram(values, {left, w, count}))
          report.rows.push_back({"mele_hist[" + format_double(b.left) + "," + format_double(b.right) + ")",
                                 n, "count", static_cast<double>(b.count), 0.0});
      }
    }
  }

  for (const auto& [label, unused] : results.front().rejects) {
    std::size_t hits = 0, valid = 0;
    for (const auto& r : results) {
      const auto& v = r.rejects.at(label);
      if (!v) continue;
      ++valid;
      if (*v) ++hits;
    }
    const std::size_t na = results.size() - valid;
    if (valid > 0) {
      const double rate = static_cast<double>(hits) / static_cast<double>(valid);
      report.rows.push_back(
          {label, n, "rate", rate, std::sqrt(rate * (1.0 - rate) / static_cast<double>(valid))});
    }
    report.rows.push_back({label, n, "n/a", static_cast<double>(na), 0.0});
  }

  if (spec.keep_raw) {
    std::map<std::string, std::vector<double>> stats;
    for (const auto& r : results)
      for (const auto& [k, unused] : results.front().stats) {
        const auto it = r.stats.find(k);
        stats[k].push_back(it == r.stats.end() ? std::numeric_limits<double>::quiet_NaN()
                                               : it->second);
      }
    for (auto& [k, v] : stats) report.raw[k + suffix] = std::move(v);
  }

  if (spec.profile_trace && !results.front().profile_theta.empty()) {
    const auto& r = results.front();
    report.raw["profile_theta" + suffix] = r.profile_theta;
    report.raw["profile_w" + suffix] = r.profile_value;
    const auto it = std::min_element(r.profile_value.begin(), r.profile_value.end());
    report.rows.push_back(
        {"profile_min", n, "theta", r.profile_theta[static_cast<std::size_t>(it - r.profile_value.begin())], 0.0});
    report.rows.push_back({"profile_min", n, "w_n", *it, 0.0});
  }
}

}  // namespace

const char* to_string(ScenarioFamily f) {
  switch (f) {
    case ScenarioFamily::cauchy_roots:
      return "cauchy_roots";
    case ScenarioFamily::cauchy:
      return "cauchy";
    case ScenarioFamily::nlr:
      return "nlr";
    case ScenarioFamily::curved_normal:
      return "curved_normal";
    case ScenarioFamily::mixture:
      return "mixture";
  }
  return "unknown";
}

void ScenarioSpec::validate() const {
  if (replications < 1) throw std::domain_error("replications must be >= 1");
  if (sample_sizes.empty()) throw std::domain_error("scenario needs at least one sample size");
  for (int n : sample_sizes)
    if (n < 2) throw std::domain_error("sample size must be >= 2");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
  generator.validate();
  search.validate();
  const auto& ids = estimating_model_ids();
  if (std::find(ids.begin(), ids.end(), el_model) == ids.end())
    throw std::domain_error("unknown model id: " + el_model);
  if (!parametric_model.empty()) (void)parametric_by_name(parametric_model);
  if (make_estimating_model(el_model).obs_dim() != generator.dimension())
    throw std::domain_error("generator dimension does not match the model");
}

const ReportRow* Report::find(const std::string& label, int n, const std::string& kind) const {
  for (const auto& r : rows)
    if (r.label == label && r.n == n && r.kind == kind) return &r;
  return nullptr;
}

SearchSpec default_search(ScenarioFamily family) {
  SearchSpec s;
  switch (family) {
    case ScenarioFamily::cauchy_roots:
    case ScenarioFamily::cauchy:
      s.box = {-10.0, 10.0};
      break;
    case ScenarioFamily::nlr:
      s.box = {-5.0, 5.0};
      break;
    case ScenarioFamily::curved_normal:
      s.box = {-5.0, 5.0};
      s.excluded = {{-1e-6, 1e-6}};
      break;
    case ScenarioFamily::mixture:
      s.box = {-2.0, 20.0};
      break;
  }
  return s;
}

const std::vector<std::string>& builtin_scenario_ids() {
  static const std::vector<std::string> ids{"table1", "table2", "fig1",   "table3", "table4",
                                            "table5", "table6", "table7", "table8", "fig2"};
  return ids;
}

ScenarioSpec builtin_scenario(const std::string& id) {
  ScenarioSpec s;
  s.name = id;
  if (id == "table1") {
    s.family = ScenarioFamily::cauchy_roots;
    s.generator = cauchy_dist(0.0);
    s.el_model = "cauchy-score";
    s.sample_sizes = {50, 100, 200};
  } else if (id == "table2" || id == "fig1") {
    s.family = ScenarioFamily::cauchy;
    s.generator = cauchy_dist(0.0);
    s.el_model = "cauchy-remedy";
    s.parametric_model = "cauchy";
    s.sample_sizes = {50, 100, 200};
    if (id == "fig1") {
      s.sample_sizes = {200};
      s.report_estimates = false;
      s.parametric_model.clear();
      s.histogram = HistogramRequest{};
    }
  } else if (id == "table3" || id == "table4") {
    s.family = ScenarioFamily::nlr;
    s.generator = product_dist({normal_dist(5.0, 4.0), normal_dist(0.0, 1.0)});
    s.theta_true = 1.0;
    s.el_model = "nlr-remedy";
    s.parametric_model = "nlr_gaussian";
    s.sample_sizes = {30, 50, 100};
    s.local_rule = LocalRule::nearest_minus_one;
    if (id == "table4") {
      s.report_estimates = false;
      s.tests.el_global = true;
      s.tests.dehaan_draws = {50, 100};
    }
  } else if (id == "table5" || id == "table6") {
    s.family = ScenarioFamily::curved_normal;
    s.generator = normal_dist(1.0, 1.0);
    s.theta_true = 1.0;
    s.el_model = "curved-remedy";
    s.parametric_model = "curved_normal";
    s.sample_sizes = {30, 50, 100};
    if (id == "table6") {
      s.report_estimates = false;
      s.tests.el_global = true;
      s.tests.jiang = true;
    }
  } else if (id == "table7" || id == "table8" || id == "fig2") {
    s.family = ScenarioFamily::mixture;
    s.generator = normal_mixture_dist(0.4, 0.0, 1.0, 10.0, 16.0);
    s.theta_true = 0.0;
    s.el_model = "mixture-three-score";
    s.parametric_model = "mixture";
    s.use_ael = true;
    s.sample_sizes = {100, 200, 500};
    if (id == "table7") {
      s.report_estimates = false;
      s.tests.el_global = true;
      s.tests.jiang = true;
    } else if (id == "fig2") {
      s.sample_sizes = {100};
      s.replications = 1;
      s.parametric_model.clear();
      s.report_estimates = false;
      s.profile_trace = true;
    }
  } else {
    throw std::domain_error("unknown scenario id: " + id);
  }
  s.search = default_search(s.family);
  return s;
}

Dataset draw_replication(const ScenarioSpec& spec, int n, int replication) {
  RngStream rng(spec.seed, static_cast<std::uint64_t>(replication));
  Dataset data = sample(spec.generator, static_cast<std::size_t>(n), rng);
  if (spec.family == ScenarioFamily::nlr) {
    const double t = spec.theta_true;
    for (std::size_t i = 0; i < data.size(); ++i) {
      auto row = data.row(i);
      row[1] = t + t * t * row[0] + row[1];
    }
  }
  return data;
}

Report run_scenario(const ScenarioSpec& spec, const RunOptions& opts) {
  spec.validate();
  const unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  Report report;
  report.scenario = spec.name;
  for (int n : spec.sample_sizes) aggregate(spec, n, run_all(spec, n, threads), report);
  return report;
}

std::vector<HistogramBin> emit_histogram(std::span<const double> values, const BinSpec& bins) {
  if (values.empty()) throw std::domain_error("histogram needs at least one value");
  if (!(bins.width > 0.0) || !std::isfinite(bins.width))
    throw std::domain_error("histogram bins must have positive width");
  if (bins.count < 1) throw std::domain_error("histogram needs at least one bin");
  std::vector<HistogramBin> out;
  out.reserve(static_cast<std::size_t>(bins.count));
  for (int i = 0; i < bins.count; ++i)
    out.push_back({bins.left + i * bins.width, bins.left + (i + 1) * bins.width, 0});
  const double right = out.back().right;
  for (double v : values) {
    if (!(v >= bins.left && v <= right)) throw std::domain_error("value outside histogram range");
    auto k = static_cast<std::size_t>(std::floor((v - bins.left) / bins.width));
    k = std::min(k, out.size() - 1);
    // Guard against round-off at bin edges.
    while (k > 0 && v < out[k].left) --k;
    while (k + 1 < out.size() && v >= out[k].right) ++k;
    ++out[k].count;
  }
  return out;
}

BinSpec covering_bins(std::span<const double> values, int count) {
  if (values.empty()) throw std::domain_error("histogram needs at least one value");
  if (count < 1) throw std::domain_error("histogram needs at least one bin");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (!std::isfinite(*lo) || !std::isfinite(*hi)) throw std::domain_error("non-finite value");
  const double span = *hi - *lo;
  // Widened by a few ulps so the maximum lands inside the last bin.
  return {*lo, span > 0.0 ? span / count * (1.0 + 1e-12) : 1.0, count};
}

}  // namespace elkit
