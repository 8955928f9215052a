#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace elkit {

// An m-dimensional unbiased estimating function g(x; theta) for a
// q-dimensional parameter. Immutable after construction.
class EstimatingModel {
 public:
  using EvalFn = std::function<void(std::span<const double> x, std::span<const double> theta,
                                    std::span<double> out)>;

  EstimatingModel(std::string name, std::size_t m, std::size_t q, std::size_t obs_dim, EvalFn fn,
                  std::map<std::string, double> known_constants = {});

  const std::string& name() const { return name_; }
  std::size_t m() const { return m_; }
  std::size_t q() const { return q_; }
  std::size_t obs_dim() const { return obs_dim_; }
  const std::map<std::string, double>& known_constants() const { return constants_; }

  void eval(std::span<const double> x, std::span<const double> theta, std::span<double> out) const {
    fn_(x, theta, out);
  }
  std::vector<double> operator()(std::span<const double> x, std::span<const double> theta) const;
  // Scalar-parameter convenience.
  std::vector<double> operator()(std::span<const double> x, double theta) const;

 private:
  std::string name_;
  std::size_t m_;
  std::size_t q_;
  std::size_t obs_dim_;
  EvalFn fn_;
  std::map<std::string, double> constants_;
};

enum class ParametricObjective { log_likelihood, least_squares };

// Scalar-parameter parametric model. For least-squares objectives logpdf
// holds minus the squared residual, so the summed "log-likelihood" is -S_n.
struct ParametricModel {
  using Fn = std::function<double(std::span<const double> x, double theta)>;

  std::string name;
  std::size_t obs_dim = 1;
  ParametricObjective objective = ParametricObjective::log_likelihood;
  Fn logpdf;
  Fn score;
  Fn bartlett_phi;  // score^2 + d score / d theta; empty when unused

  bool has_bartlett_phi() const { return static_cast<bool>(bartlett_phi); }
};

struct MixtureConstants {
  double weight = 0.4;  // proportion of the first component
  double mean2 = 10.0;
  double sd1 = 1.0;
  double sd2 = 4.0;
};

// Real odd cube root.
double signed_cbrt(double u);

EstimatingModel mean_model();
EstimatingModel mean_var_equal_model();
EstimatingModel cauchy_score_model();
EstimatingModel cube_root_model();
EstimatingModel cauchy_remedy_model();
EstimatingModel nlr_score_model();
EstimatingModel nlr_remedy_model();
// Throws std::domain_error at theta = 0.
EstimatingModel curved_normal_score_model();
EstimatingModel curved_normal_remedy_model();

struct MixtureModels {
  EstimatingModel score;           // s(x; theta), m = 1
  EstimatingModel score_plus_phi;  // (s, phi), m = 2
  EstimatingModel three_score;     // (s(x;theta), s(x;mu2), s(x;p)), m = 3
};
MixtureModels mixture_models(const MixtureConstants& c = {});

EstimatingModel asset_pricing_model();

// Concatenates the outputs of a and b. Requires equal obs_dim and q.
EstimatingModel stack(const EstimatingModel& a, const EstimatingModel& b);

// Multiplies component `component` of the model output by `factor`.
EstimatingModel scale_component(const EstimatingModel& model, std::size_t component,
                                double factor);

struct ParametricCatalog {
  ParametricModel cauchy;
  ParametricModel curved_normal;
  ParametricModel mixture;
  ParametricModel nlr_gaussian;
};
ParametricCatalog parametric_catalog(const MixtureConstants& c = {});

// CLI identifiers: mean, mean-var, cauchy-score, cauchy-remedy, nlr-score,
// nlr-remedy, curved-score, curved-remedy, mixture-score, mixture-score-phi,
// mixture-three-score, asset-pricing.
const std::vector<std::string>& estimating_model_ids();
// Throws std::domain_error for unknown ids.
EstimatingModel make_estimating_model(const std::string& id);

}  // namespace elkit
