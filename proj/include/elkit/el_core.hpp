#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "elkit/numerics.hpp"

namespace elkit {

class EstimatingModel;

// n x m matrix of estimating-function values g(x_i; theta), one row per
// observation. The row mean is g-bar_n(theta).
using GMatrix = Eigen::MatrixXd;

struct InnerSolveConfig {
  int max_iter = 100;
  // Tolerance on ||sum_i g_i / (1 + lambda'g_i)||. Defaults to 1e-10 * n.
  std::optional<double> grad_tol;
  // Below this value of 1 + lambda'g_i the dual uses the quadratic
  // pseudo-logarithm; a solution with any value under it is a hull failure.
  // Defaults to 1/n.
  std::optional<double> feasibility_floor;
  // ||lambda|| beyond which a still-growing dual is declared unbounded.
  double lambda_cap = 1e8;
};

enum class SolveStatus { converged, hull_failure, iteration_cap };

const char* to_string(SolveStatus s);

struct InnerSolution {
  SolveStatus status = SolveStatus::iteration_cap;
  Eigen::VectorXd lambda;
  Eigen::VectorXd weights;  // p_i = 1 / (n (1 + lambda'g_i))
  double w_value = 0.0;     // sum_i log(1 + lambda'g_i); +inf on hull failure
  int iterations = 0;
  // Dual objective at each accepted iterate, starting from lambda = 0.
  std::vector<double> dual_trace;

  bool converged() const { return status == SolveStatus::converged; }
};

struct ELEvaluation {
  double w_n;   // profile EL ratio, >= 0 when finite
  double el_n;  // sum log p_i = -w_n - n log n
  InnerSolution inner;
};

// Maximizes the concave dual sum_i log(1 + lambda'g_i) by damped Newton with
// backtracking. Throws std::domain_error on non-finite entries or empty input.
InnerSolution lagrange_solve(const GMatrix& g, const InnerSolveConfig& cfg = {});

GMatrix evaluate_g(const Dataset& data, const EstimatingModel& model,
                   std::span<const double> theta);

ELEvaluation profile_pelr(const Dataset& data, const EstimatingModel& model,
                          std::span<const double> theta, const InnerSolveConfig& cfg = {});

// EL on the rows augmented with the pseudo-observation -g-bar_n.
ELEvaluation adjusted_pelr(const Dataset& data, const EstimatingModel& model,
                           std::span<const double> theta, const InnerSolveConfig& cfg = {});

// Matrix-level entry points used by the two functions above.
ELEvaluation pelr_from_g(const GMatrix& g, const InnerSolveConfig& cfg = {});
ELEvaluation adjusted_pelr_from_g(const GMatrix& g, const InnerSolveConfig& cfg = {});
GMatrix augment_with_pseudo_point(const GMatrix& g);

}  // namespace elkit
