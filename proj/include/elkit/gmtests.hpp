#pragma once

#include <optional>
#include <string>

#include "elkit/el_core.hpp"
#include "elkit/models.hpp"
#include "elkit/numerics.hpp"
#include "elkit/optimize.hpp"

namespace elkit {

enum class TestMethod { el_global, dehaan, jiang };
enum class ReferenceDistribution { chisq, standard_normal, extreme_value_interval };
enum class TestStatus { ok, hull_failure, inconclusive };

const char* to_string(TestMethod m);
const char* to_string(ReferenceDistribution r);
const char* to_string(TestStatus s);

struct TestOutcome {
  TestMethod method = TestMethod::el_global;
  double statistic = 0.0;
  ReferenceDistribution ref_dist = ReferenceDistribution::chisq;
  int df = 0;                     // chi-square degrees of freedom (el_global)
  std::optional<double> p_value;  // absent for dehaan and inconclusive jiang
  std::optional<double> bound;    // L^p for dehaan
  bool reject = false;
  double alpha = 0.05;
  TestStatus status = TestStatus::ok;
  bool used_ael = false;
  std::string note;
};

struct GlobalTestOptions {
  // Evaluate with the adjusted EL from the start.
  bool use_ael = false;
  // Retry with the adjusted EL when the plain EL hull condition fails.
  bool ael_fallback = true;
  InnerSolveConfig solver{};
};

// Rejects "theta is a global minimum of W_n" when P(chi2_{m-q} > 2 W_n) < alpha.
// Throws std::domain_error when m <= q.
TestOutcome global_maximum_test(const Dataset& data, const EstimatingModel& model,
                                std::span<const double> theta, double alpha,
                                const GlobalTestOptions& opts = {});
TestOutcome global_maximum_test(const Dataset& data, const EstimatingModel& model, double theta,
                                double alpha, const GlobalTestOptions& opts = {});

// Decision rule shared by every el_global evaluation.
TestOutcome el_global_outcome(double w_n, int df, double alpha);

// Extreme-value interval test for an objective to be maximized. Draws
// `draws` points uniformly on the box and compares candidate_value with
// L^p = L(m) + (L(m) - L(m-1)) / (p^{-2/dim} - 1), p = alpha.
TestOutcome dehaan_test(const ScalarObjective& objective_to_maximize, double candidate_value,
                        Interval box, int draws, double alpha, RngStream& rng, int dim = 1);

// The bound from the two largest order statistics.
double dehaan_bound(double largest, double second_largest, double p, int dim);

struct JiangMoments {
  double phi_sum;
  double phi_sq_mean;
  double fisher_info;  // sample variance of the score
  double s_phi_mean;
  double dphi_mean;
  double sigma_sq;
};

JiangMoments jiang_moments(const Dataset& data, const ParametricModel& model, double theta);

// Bartlett-identity test: T = sum phi / (sqrt(n) sigma-hat), two-sided normal p-value.
TestOutcome jiang_test(const Dataset& data, const ParametricModel& model, double theta,
                       double alpha);

}  // namespace elkit
