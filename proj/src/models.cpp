#include "elkit/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace elkit {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

double log_std_normal_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double log_add_exp(double a, double b) {
  const double hi = std::max(a, b);
  if (std::isinf(hi)) return hi;
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Log-density pieces of w/sd1 phi((x-theta)/sd1) + (1-w)/sd2 phi((x-mu2)/sd2).
struct MixtureTerms {
  double log_phi1;  // log phi((x - theta)/sd1)
  double log_phi2;  // log phi((x - mu2)/sd2)
  double log_f;

  // phi((x - theta)/sd1) / f and phi((x - mu2)/sd2) / f
  double ratio1() const { return std::exp(log_phi1 - log_f); }
  double ratio2() const { return std::exp(log_phi2 - log_f); }
  // Posterior probability of the first component.
  double resp1(const MixtureConstants& c) const {
    return std::exp(std::log(c.weight / c.sd1) + log_phi1 - log_f);
  }
};

MixtureTerms mixture_terms(double x, double theta, const MixtureConstants& c) {
  MixtureTerms t{};
  t.log_phi1 = log_std_normal_pdf((x - theta) / c.sd1);
  t.log_phi2 = log_std_normal_pdf((x - c.mean2) / c.sd2);
  t.log_f = log_add_exp(std::log(c.weight / c.sd1) + t.log_phi1,
                        std::log((1.0 - c.weight) / c.sd2) + t.log_phi2);
  return t;
}

void validate_mixture(const MixtureConstants& c) {
  if (!(c.weight > 0.0 && c.weight < 1.0))
    throw std::domain_error("mixture proportion must lie in (0,1)");
  if (!(c.sd1 > 0.0 && c.sd2 > 0.0))
    throw std::domain_error("mixture standard deviations must be positive");
}

std::map<std::string, double> mixture_constant_map(const MixtureConstants& c) {
  return {{"pi", c.weight}, {"mu2", c.mean2}, {"sigma1", c.sd1}, {"sigma2", c.sd2}};
}

double nlr_residual(std::span<const double> obs, double theta) {
  return obs[1] - theta - theta * theta * obs[0];
}

void require_nonzero(double theta) {
  if (theta == 0.0) throw std::domain_error("curved normal score has a pole at theta = 0");
}

// Exponent shared by both asset-pricing components.
double asset_excess(std::span<const double> obs, double theta) {
  return std::expm1(-0.72 - theta * (obs[0] + obs[1]) + 3.0 * obs[1]);
}

}  // namespace

double signed_cbrt(double u) { return std::cbrt(u); }

EstimatingModel::EstimatingModel(std::string name, std::size_t m, std::size_t q,
                                 std::size_t obs_dim, EvalFn fn,
                                 std::map<std::string, double> known_constants)
    : name_(std::move(name)),
      m_(m),
      q_(q),
      obs_dim_(obs_dim),
      fn_(std::move(fn)),
      constants_(std::move(known_constants)) {
  if (m_ == 0 || q_ == 0 || obs_dim_ == 0)
    throw std::domain_error("estimating model dimensions must be positive");
}

std::vector<double> EstimatingModel::operator()(std::span<const double> x,
                                                std::span<const double> theta) const {
  std::vector<double> out(m_);
  fn_(x, theta, out);
  return out;
}

std::vector<double> EstimatingModel::operator()(std::span<const double> x, double theta) const {
  return (*this)(x, std::span<const double>(&theta, 1));
}

EstimatingModel mean_model() {
  return {"mean", 1, 1, 1,
          [](std::span<const double> x, std::span<const double> th, std::span<double> out) {
            out[0] = x[0] - th[0];
          }};
}

EstimatingModel mean_var_equal_model() {
  return {"mean-var", 2, 1, 1,
          [](std::span<const double> x, std::span<const double> th, std::span<double> out) {
            out[0] = x[0] - th[0];
            out[1] = x[0] * x[0] - th[0] - th[0] * th[0];
          }};
}

EstimatingModel cauchy_score_model() {
  return {"cauchy-score", 1, 1, 1,
          [](std::span<const double> x, std::span<const double> th, std::span<double> out) {
            const double u = x[0] - th[0];
            out[0] = u / (1.0 + u * u);
          }};
}

EstimatingModel cube_root_model() {
  return {"cube-root", 1, 1, 1,
          [](std::span<const double> x, std::span<const double> th, std::span<double> out) {
            out[0] = signed_cbrt(x[0] - th[0]);
          }};
}

EstimatingModel cauchy_remedy_model() {
  return {"cauchy-remedy", 2, 1, 1,
          [](std::span<const double> x, std::span<const double> th, std::span<double> out) {
            const double u = x[0] - th[0];
            out[0] = u / (1.0 + u * u);
            out[1] = signed_cbrt(u);
          }};
}

EstimatingModel nlr_score_model() {
  return {"nlr-score", 1, 1, 2,
          [](std::span<const double> obs, std::span<const double> th, std::span<double> out) {
            out[0] = (1.0 + 2.0 * th[0] * obs[0]) * nlr_residual(obs, th[0]);
          }};
}

EstimatingModel nlr_remedy_model() {
  return {"nlr-remedy", 2, 1, 2,
          [](std::span<const double> obs, std::span<const double> th, std::span<double> out) {
            const double r = nlr_residual(obs, th[0]);
            out[0] = r;
            out[1] = obs[0] * r;
          }};
}

EstimatingModel curved_normal_score_model() {
  return {"curved-score", 1, 1, 1,
          [](std::span<const double> x, std::span<const double> th, std::span<double> out) {
            const double t = th[0];
            require_nonzero(t);
            out[0] = x[0] * x[0] / (t * t * t) - x[0] / (t * t) - 1.0 / t;
          }};
}

EstimatingModel curved_normal_remedy_model() {
  return {"curved-remedy", 2, 1, 1,
          [](std::span<const double> x, std::span<const double> th, std::span<double> out) {
            out[0] = x[0] - th[0];
            out[1] = x[0] * x[0] - 2.0 * th[0] * th[0];
          }};
}

MixtureModels mixture_models(const MixtureConstants& c) {
  validate_mixture(c);
  const auto constants = mixture_constant_map(c);
  EstimatingModel score{
      "mixture-score", 1, 1, 1,
      [c](std::span<const double> x, std::span<const double> th, std::span<double> out) {
        const auto t = mixture_terms(x[0], th[0], c);
        out[0] = (x[0] - th[0]) * t.ratio1();
      },
      constants};
  EstimatingModel score_plus_phi{
      "mixture-score-phi", 2, 1, 1,
      [c](std::span<const double> x, std::span<const double> th, std::span<double> out) {
        const auto t = mixture_terms(x[0], th[0], c);
        const double u = x[0] - th[0];
        const double r = t.ratio1();
        out[0] = u * r;
        out[1] = (u * u - c.sd1 * c.sd1) * r;
      },
      constants};
  EstimatingModel three_score{
      "mixture-three-score", 3, 1, 1,
      [c](std::span<const double> x, std::span<const double> th, std::span<double> out) {
        const auto t = mixture_terms(x[0], th[0], c);
        const double r1 = t.ratio1();
        const double r2 = t.ratio2();
        out[0] = (x[0] - th[0]) * r1;
        out[1] = (x[0] - c.mean2) * r2;
        out[2] = c.sd2 * r1 - c.sd1 * r2;
      },
      constants};
  return {std::move(score), std::move(score_plus_phi), std::move(three_score)};
}

EstimatingModel asset_pricing_model() {
  return {"asset-pricing", 2, 1, 2,
          [](std::span<const double> obs, std::span<const double> th, std::span<double> out) {
            const double e = asset_excess(obs, th[0]);
            out[0] = e;
            out[1] = obs[1] * e;
          }};
}

EstimatingModel stack(const EstimatingModel& a, const EstimatingModel& b) {
  if (a.obs_dim() != b.obs_dim())
    throw std::domain_error("stack: models disagree on observation dimension");
  if (a.q() != b.q()) throw std::domain_error("stack: models disagree on parameter dimension");
  auto constants = a.known_constants();
  constants.insert(b.known_constants().begin(), b.known_constants().end());
  const std::size_t ma = a.m();
  return {a.name() + "+" + b.name(), a.m() + b.m(), a.q(), a.obs_dim(),
          [a, b, ma](std::span<const double> x, std::span<const double> th,
                     std::span<double> out) {
            a.eval(x, th, out.first(ma));
            b.eval(x, th, out.subspan(ma));
          },
          std::move(constants)};
}

EstimatingModel scale_component(const EstimatingModel& model, std::size_t component,
                                double factor) {
  if (component >= model.m()) throw std::domain_error("scale_component: component out of range");
  return {model.name(), model.m(), model.q(), model.obs_dim(),
          [model, component, factor](std::span<const double> x, std::span<const double> th,
                                     std::span<double> out) {
            model.eval(x, th, out);
            out[component] *= factor;
          },
          model.known_constants()};
}

ParametricCatalog parametric_catalog(const MixtureConstants& c) {
  validate_mixture(c);

  ParametricModel cauchy;
  cauchy.name = "cauchy";
  cauchy.logpdf = [](std::span<const double> x, double th) {
    const double u = x[0] - th;
    return -std::log(std::numbers::pi) - std::log1p(u * u);
  };
  cauchy.score = [](std::span<const double> x, double th) {
    const double u = x[0] - th;
    return 2.0 * u / (1.0 + u * u);
  };
  cauchy.bartlett_phi = [](std::span<const double> x, double th) {
    const double u = x[0] - th;
    const double d = 1.0 + u * u;
    return (6.0 * u * u - 2.0) / (d * d);
  };

  // N(theta, theta^2)
  ParametricModel curved;
  curved.name = "curved_normal";
  curved.logpdf = [](std::span<const double> x, double th) {
    require_nonzero(th);
    const double z = (x[0] - th) / th;
    return -kLogSqrt2Pi - std::log(std::fabs(th)) - 0.5 * z * z;
  };
  curved.score = [](std::span<const double> x, double th) {
    require_nonzero(th);
    const double v = x[0];
    return v * v / (th * th * th) - v / (th * th) - 1.0 / th;
  };
  curved.bartlett_phi = [](std::span<const double> x, double th) {
    require_nonzero(th);
    const double v = x[0];
    const double t2 = th * th;
    const double s = v * v / (t2 * th) - v / t2 - 1.0 / th;
    const double ds = -3.0 * v * v / (t2 * t2) + 2.0 * v / (t2 * th) + 1.0 / t2;
    return s * s + ds;
  };

  ParametricModel mixture;
  mixture.name = "mixture";
  mixture.logpdf = [c](std::span<const double> x, double th) {
    return mixture_terms(x[0], th, c).log_f;
  };
  mixture.score = [c](std::span<const double> x, double th) {
    const auto t = mixture_terms(x[0], th, c);
    return t.resp1(c) * (x[0] - th) / (c.sd1 * c.sd1);
  };
  // f''/f with respect to theta.
  mixture.bartlett_phi = [c](std::span<const double> x, double th) {
    const auto t = mixture_terms(x[0], th, c);
    const double u = x[0] - th;
    const double v1 = c.sd1 * c.sd1;
    return t.resp1(c) * (u * u / (v1 * v1) - 1.0 / v1);
  };

  ParametricModel nlr;
  nlr.name = "nlr_gaussian";
  nlr.obs_dim = 2;
  nlr.objective = ParametricObjective::least_squares;
  nlr.logpdf = [](std::span<const double> obs, double th) {
    const double r = nlr_residual(obs, th);
    return -r * r;
  };
  nlr.score = [](std::span<const double> obs, double th) {
    return 2.0 * (1.0 + 2.0 * th * obs[0]) * nlr_residual(obs, th);
  };

  return {std::move(cauchy), std::move(curved), std::move(mixture), std::move(nlr)};
}

const std::vector<std::string>& estimating_model_ids() {
  static const std::vector<std::string> ids{
      "mean",         "mean-var",      "cauchy-score",  "cauchy-remedy",
      "nlr-score",    "nlr-remedy",    "curved-score",  "curved-remedy",
      "mixture-score", "mixture-score-phi", "mixture-three-score", "asset-pricing"};
  return ids;
}

EstimatingModel make_estimating_model(const std::string& id) {
  if (id == "mean") return mean_model();
  if (id == "mean-var") return mean_var_equal_model();
  if (id == "cauchy-score") return cauchy_score_model();
  if (id == "cauchy-remedy") return cauchy_remedy_model();
  if (id == "nlr-score") return nlr_score_model();
  if (id == "nlr-remedy") return nlr_remedy_model();
  if (id == "curved-score") return curved_normal_score_model();
  if (id == "curved-remedy") return curved_normal_remedy_model();
  if (id == "mixture-score") return mixture_models().score;
  if (id == "mixture-score-phi") return mixture_models().score_plus_phi;
  if (id == "mixture-three-score") return mixture_models().three_score;
  if (id == "asset-pricing") return asset_pricing_model();
  throw std::domain_error("unknown model id: " + id);
}

}  // namespace elkit
