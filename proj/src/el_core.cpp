#include "elkit/el_core.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "elkit/models.hpp"

namespace elkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-14;
constexpr double kRoundOff = 1e-13;
// Bound on |lambda'grad| / n, which equals |sum p_i - 1|.
constexpr double kMassTol = 1e-12;

// Owen's pseudo-logarithm: log(z) for z >= eps, and its second-order Taylor
// expansion at eps below that. Concave and C2 on the whole line.
double log_star(double lin, double eps) {
  const double z = 1.0 + lin;
  if (z >= eps) return std::log1p(lin);
  const double r = z / eps;
  return std::log(eps) - 1.5 + 2.0 * r - 0.5 * r * r;
}

// First and (negated) second derivatives of log_star.
double dlog_star(double z, double eps) { return z >= eps ? 1.0 / z : (2.0 - z / eps) / eps; }
double neg_d2log_star(double z, double eps) { return z >= eps ? 1.0 / (z * z) : 1.0 / (eps * eps); }

double dual_value(const Eigen::VectorXd& lin, double eps) {
  double omega = 0.0;
  for (Eigen::Index i = 0; i < lin.size(); ++i) omega += log_star(lin[i], eps);
  return omega;
}

Eigen::VectorXd dual_gradient(const GMatrix& g, const Eigen::VectorXd& lin, double eps) {
  Eigen::VectorXd d(lin.size());
  for (Eigen::Index i = 0; i < lin.size(); ++i) d[i] = dlog_star(1.0 + lin[i], eps);
  return g.transpose() * d;
}

InnerSolution finish(const GMatrix& g, Eigen::VectorXd lambda, SolveStatus status, int iterations,
                     std::vector<double> trace) {
  const auto n = g.rows();
  InnerSolution sol;
  sol.status = status;
  sol.iterations = iterations;
  sol.dual_trace = std::move(trace);
  if (status == SolveStatus::hull_failure) {
    sol.weights = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
    sol.w_value = kInf;
  } else {
    const Eigen::VectorXd lin = g * lambda;
    sol.weights = (1.0 / (static_cast<double>(n) * (1.0 + lin.array()))).matrix();
    double w = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) w += std::log1p(lin[i]);
    sol.w_value = w;
  }
  sol.lambda = std::move(lambda);
  return sol;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged:
      return "converged";
    case SolveStatus::hull_failure:
      return "hull_failure";
    case SolveStatus::iteration_cap:
      return "iteration_cap";
  }
  return "unknown";
}

InnerSolution lagrange_solve(const GMatrix& g, const InnerSolveConfig& cfg) {
  const auto n = g.rows();
  const auto m = g.cols();
  if (n < 1 || m < 1) throw std::domain_error("lagrange_solve: empty estimating-function matrix");
  if (!g.allFinite()) throw std::domain_error("lagrange_solve: non-finite estimating-function value");

  const double nd = static_cast<double>(n);
  const double floor = cfg.feasibility_floor.value_or(1.0 / nd);
  const double tol = cfg.grad_tol.value_or(1e-10 * nd);

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);

  // Zero rows drop out of the Lagrange equation; all-zero data is solved by lambda = 0.
  if ((g.array() == 0.0).all()) return finish(g, lambda, SolveStatus::converged, 0, {0.0});

  if (m == 1) {
    // Exact hull test in one dimension.
    if (!(g.col(0).minCoeff() < 0.0 && g.col(0).maxCoeff() > 0.0))
      return finish(g, lambda, SolveStatus::hull_failure, 0, {});
  }

  Eigen::VectorXd lin = Eigen::VectorXd::Zero(n);
  double omega = 0.0;
  std::vector<double> trace{omega};

  // A stationary point of the pseudo-log dual with some 1 + lambda'g_i below
  // the floor cannot be an EL solution (it would need p_i > 1), so the
  // hull condition fails there.
  const auto classify_stationary = [&](int iter) {
    const bool interior = (1.0 + lin.array()).minCoeff() >= floor;
    return finish(g, lambda, interior ? SolveStatus::converged : SolveStatus::hull_failure, iter,
                  std::move(trace));
  };

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const Eigen::VectorXd grad = dual_gradient(g, lin, floor);
    const double grad_norm = grad.norm();
    const bool stationary = grad_norm <= tol;
    if (stationary && std::fabs(lambda.dot(grad)) <= kMassTol * nd) return classify_stationary(iter);
    if (lambda.norm() > cfg.lambda_cap)
      return finish(g, lambda, SolveStatus::hull_failure, iter, std::move(trace));

    Eigen::ArrayXd curv(n);
    for (Eigen::Index i = 0; i < n; ++i) curv[i] = std::sqrt(neg_d2log_star(1.0 + lin[i], floor));
    const GMatrix scaled = g.array().colwise() * curv;
    const Eigen::MatrixXd neg_hessian = scaled.transpose() * scaled;
    Eigen::VectorXd step = neg_hessian.completeOrthogonalDecomposition().solve(grad);
    double slope = grad.dot(step);
    if (!step.allFinite() || !(slope > 0.0)) {
      step = grad;
      slope = grad.squaredNorm();
    }
    const Eigen::VectorXd dlin = g * step;

    double t = 1.0;
    double trial = -kInf;
    while (t >= kMinStep) {
      const Eigen::VectorXd lin_trial = lin + t * dlin;
      trial = dual_value(lin_trial, floor);
      if (trial >= omega + kArmijo * t * slope) break;
      // Near the optimum the Armijo gain drops below the rounding of omega;
      // accept a step that keeps omega level and shrinks the gradient.
      if (trial >= omega - kRoundOff * (1.0 + std::fabs(omega)) &&
          dual_gradient(g, lin_trial, floor).norm() < grad_norm) {
        trial = std::max(trial, omega);
        break;
      }
      t *= 0.5;
    }
    if (t < kMinStep && stationary) return classify_stationary(iter);
    if (t < kMinStep)
      return finish(g, lambda, SolveStatus::iteration_cap, iter + 1, std::move(trace));

    lambda += t * step;
    lin += t * dlin;
    omega = trial;
    trace.push_back(omega);
  }

  if (dual_gradient(g, lin, floor).norm() <= tol) return classify_stationary(cfg.max_iter);
  const auto status =
      lambda.norm() > cfg.lambda_cap ? SolveStatus::hull_failure : SolveStatus::iteration_cap;
  return finish(g, lambda, status, cfg.max_iter, std::move(trace));
}

GMatrix evaluate_g(const Dataset& data, const EstimatingModel& model,
                   std::span<const double> theta) {
  if (data.dim() != model.obs_dim())
    throw std::domain_error("model '" + model.name() + "' expects observations of dimension " +
                            std::to_string(model.obs_dim()));
  if (theta.size() != model.q())
    throw std::domain_error("model '" + model.name() + "' expects a parameter of dimension " +
                            std::to_string(model.q()));
  const auto n = static_cast<Eigen::Index>(data.size());
  GMatrix g(n, static_cast<Eigen::Index>(model.m()));
  std::vector<double> out(model.m());
  for (Eigen::Index i = 0; i < n; ++i) {
    model.eval(data.row(static_cast<std::size_t>(i)), theta, out);
    for (std::size_t j = 0; j < out.size(); ++j) g(i, static_cast<Eigen::Index>(j)) = out[j];
  }
  return g;
}

ELEvaluation pelr_from_g(const GMatrix& g, const InnerSolveConfig& cfg) {
  InnerSolution inner = lagrange_solve(g, cfg);
  const double nd = static_cast<double>(g.rows());
  ELEvaluation ev{inner.w_value, -kInf, std::move(inner)};
  if (ev.inner.status == SolveStatus::hull_failure) {
    ev.w_n = kInf;
  } else {
    ev.el_n = -ev.w_n - nd * std::log(nd);
  }
  return ev;
}

GMatrix augment_with_pseudo_point(const GMatrix& g) {
  const Eigen::RowVectorXd mean = g.colwise().mean();
  if (!mean.allFinite()) throw std::domain_error("adjusted EL: non-finite mean estimating function");
  GMatrix aug(g.rows() + 1, g.cols());
  aug.topRows(g.rows()) = g;
  aug.row(g.rows()) = -mean;
  return aug;
}

ELEvaluation adjusted_pelr_from_g(const GMatrix& g, const InnerSolveConfig& cfg) {
  return pelr_from_g(augment_with_pseudo_point(g), cfg);
}

ELEvaluation profile_pelr(const Dataset& data, const EstimatingModel& model,
                          std::span<const double> theta, const InnerSolveConfig& cfg) {
  return pelr_from_g(evaluate_g(data, model, theta), cfg);
}

ELEvaluation adjusted_pelr(const Dataset& data, const EstimatingModel& model,
                           std::span<const double> theta, const InnerSolveConfig& cfg) {
  return adjusted_pelr_from_g(evaluate_g(data, model, theta), cfg);
}

}  // namespace elkit
