#include "elkit/gmtests.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace elkit {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("alpha must lie in (0,1)");
}

}  // namespace

const char* to_string(TestMethod m) {
  switch (m) {
    case TestMethod::el_global:
      return "el_global";
    case TestMethod::dehaan:
      return "dehaan";
    case TestMethod::jiang:
      return "jiang";
  }
  return "unknown";
}

const char* to_string(ReferenceDistribution r) {
  switch (r) {
    case ReferenceDistribution::chisq:
      return "chisq";
    case ReferenceDistribution::standard_normal:
      return "standard_normal";
    case ReferenceDistribution::extreme_value_interval:
      return "extreme_value_interval";
  }
  return "unknown";
}

const char* to_string(TestStatus s) {
  switch (s) {
    case TestStatus::ok:
      return "ok";
    case TestStatus::hull_failure:
      return "hull_failure";
    case TestStatus::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

TestOutcome el_global_outcome(double w_n, int df, double alpha) {
  check_alpha(alpha);
  TestOutcome out;
  out.method = TestMethod::el_global;
  out.ref_dist = ReferenceDistribution::chisq;
  out.df = df;
  out.alpha = alpha;
  if (!std::isfinite(w_n)) {
    out.statistic = std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
    out.reject = true;
    out.status = TestStatus::hull_failure;
    out.note = "convex hull condition fails at theta";
    return out;
  }
  // Tiny negative values are solver round-off.
  out.statistic = std::max(0.0, 2.0 * w_n);
  out.p_value = chisq_sf(out.statistic, df);
  out.reject = *out.p_value < alpha;
  return out;
}

TestOutcome global_maximum_test(const Dataset& data, const EstimatingModel& model,
                                std::span<const double> theta, double alpha,
                                const GlobalTestOptions& opts) {
  if (model.m() <= model.q())
    throw std::domain_error(
        "global maximum test needs an over-determined model (m > q); with m = q every root is a "
        "global maximum");
  check_alpha(alpha);
  const int df = static_cast<int>(model.m() - model.q());

  if (opts.use_ael) {
    auto out = el_global_outcome(adjusted_pelr(data, model, theta, opts.solver).w_n, df, alpha);
    out.used_ael = true;
    return out;
  }
  const auto ev = profile_pelr(data, model, theta, opts.solver);
  if (ev.inner.status != SolveStatus::hull_failure) {
    auto out = el_global_outcome(ev.inner.converged() ? ev.w_n
                                                      : std::numeric_limits<double>::infinity(),
                                 df, alpha);
    if (!ev.inner.converged()) out.note = "inner solve hit the iteration cap";
    return out;
  }
  if (!opts.ael_fallback) return el_global_outcome(ev.w_n, df, alpha);
  auto out = el_global_outcome(adjusted_pelr(data, model, theta, opts.solver).w_n, df, alpha);
  out.used_ael = true;
  out.note = "plain EL hull condition failed; adjusted EL used";
  return out;
}

TestOutcome global_maximum_test(const Dataset& data, const EstimatingModel& model, double theta,
                                double alpha, const GlobalTestOptions& opts) {
  return global_maximum_test(data, model, std::span<const double>(&theta, 1), alpha, opts);
}

double dehaan_bound(double largest, double second_largest, double p, int dim) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("confidence level must lie in (0,1)");
  if (dim < 1) throw std::domain_error("parameter dimension must be positive");
  if (largest == second_largest) return largest;
  return largest + (largest - second_largest) / (std::pow(p, -2.0 / dim) - 1.0);
}

TestOutcome dehaan_test(const ScalarObjective& objective_to_maximize, double candidate_value,
                        Interval box, int draws, double alpha, RngStream& rng, int dim) {
  check_alpha(alpha);
  if (draws < 2) throw std::domain_error("De Haan test needs at least two draws");
  if (!(std::isfinite(box.lo) && std::isfinite(box.hi) && box.lo < box.hi))
    throw std::domain_error("De Haan test needs a bounded box");

  double top = -std::numeric_limits<double>::infinity();
  double second = top;
  for (int i = 0; i < draws; ++i) {
    const double v = objective_to_maximize(rng.uniform(box.lo, box.hi));
    if (v > top) {
      second = top;
      top = v;
    } else if (v > second) {
      second = v;
    }
  }

  TestOutcome out;
  out.method = TestMethod::dehaan;
  out.ref_dist = ReferenceDistribution::extreme_value_interval;
  out.alpha = alpha;
  out.statistic = candidate_value;
  out.bound = dehaan_bound(top, second, alpha, dim);
  out.reject = candidate_value < *out.bound;
  if (top == second) out.note = "degenerate interval: two largest draws coincide";
  return out;
}

JiangMoments jiang_moments(const Dataset& data, const ParametricModel& model, double theta) {
  if (!model.has_bartlett_phi())
    throw std::domain_error("parametric model '" + model.name + "' has no Bartlett function");
  const std::size_t n = data.size();
  if (n < 2) throw std::domain_error("Jiang test needs at least two observations");
  const double h = 1e-5 * (1.0 + std::fabs(theta));

  std::vector<double> score(n);
  double phi_sum = 0.0, phi_sq = 0.0, s_phi = 0.0, dphi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.row(i);
    const double phi = model.bartlett_phi(x, theta);
    score[i] = model.score(x, theta);
    phi_sum += phi;
    phi_sq += phi * phi;
    s_phi += score[i] * phi;
    dphi += (model.bartlett_phi(x, theta + h) - model.bartlett_phi(x, theta - h)) / (2.0 * h);
  }
  const double nd = static_cast<double>(n);
  JiangMoments mom{};
  mom.phi_sum = phi_sum;
  mom.phi_sq_mean = phi_sq / nd;
  mom.fisher_info = summarize(score).variance;
  mom.s_phi_mean = s_phi / nd;
  mom.dphi_mean = dphi / nd;
  mom.sigma_sq = mom.phi_sq_mean + (2.0 * mom.s_phi_mean * mom.dphi_mean +
                                    mom.dphi_mean * mom.dphi_mean) /
                                       mom.fisher_info;
  return mom;
}

TestOutcome jiang_test(const Dataset& data, const ParametricModel& model, double theta,
                       double alpha) {
  check_alpha(alpha);
  const auto mom = jiang_moments(data, model, theta);
  TestOutcome out;
  out.method = TestMethod::jiang;
  out.ref_dist = ReferenceDistribution::standard_normal;
  out.alpha = alpha;
  if (!(mom.fisher_info > 0.0) || !(mom.sigma_sq > 0.0) || !std::isfinite(mom.sigma_sq)) {
    out.status = TestStatus::inconclusive;
    out.statistic = std::numeric_limits<double>::quiet_NaN();
    out.note = "estimated variance is not positive";
    return out;
  }
  out.statistic = mom.phi_sum / (std::sqrt(static_cast<double>(data.size()) * mom.sigma_sq));
  out.p_value = normal_two_sided_p(out.statistic);
  out.reject = *out.p_value < alpha;
  return out;
}

}  // namespace elkit
