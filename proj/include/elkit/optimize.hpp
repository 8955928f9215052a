#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "elkit/el_core.hpp"
#include "elkit/models.hpp"
#include "elkit/numerics.hpp"

namespace elkit {

struct Interval {
  double lo;
  double hi;
  bool contains(double x) const { return lo <= x && x <= hi; }
};

// Scalar search over a box. Every builtin scenario has q = 1, so the outer
// search is a grid scan followed by golden-section refinement.
struct SearchSpec {
  Interval box{-10.0, 10.0};
  int grid_points = 401;
  double refine_tol = 1e-8;
  int max_candidates = 64;
  // Nodes inside these bands evaluate to +inf (e.g. the pole of a score).
  std::vector<Interval> excluded;
  // Additional scan nodes merged with the uniform grid.
  std::vector<double> extra_nodes;

  void validate() const;
  bool is_excluded(double theta) const;
  std::vector<double> nodes() const;
};

enum class ObjectiveTag { pelr, ael_pelr, parametric_nll, least_squares };
const char* to_string(ObjectiveTag tag);

// Objective to be minimized over theta; +inf marks infeasible points.
using ScalarObjective = std::function<double(double)>;

ScalarObjective make_pelr_objective(const Dataset& data, const EstimatingModel& model, bool use_ael,
                                    const InnerSolveConfig& cfg = {});
// Negative log-likelihood, or S_n for least-squares models.
ScalarObjective make_parametric_objective(const Dataset& data, const ParametricModel& model);

struct ProfileScan {
  std::vector<double> theta;
  std::vector<double> value;
  // True when no node has a finite value.
  bool empty_basin = true;
};

ProfileScan scan(const ScalarObjective& objective, const SearchSpec& spec);
// tag must be pelr or ael_pelr.
ProfileScan scan_profile(const Dataset& data, const EstimatingModel& model, const SearchSpec& spec,
                         ObjectiveTag tag, const InnerSolveConfig& cfg = {});
// tag must be parametric_nll or least_squares, matching the model.
ProfileScan scan_profile(const Dataset& data, const ParametricModel& model, const SearchSpec& spec,
                         ObjectiveTag tag);

enum class CandidateKind { local_min, global_min };

struct CandidatePoint {
  double theta;
  double value;
  CandidateKind kind = CandidateKind::local_min;
};

// Golden-section search on [lo, hi] assuming the minimum is bracketed.
// Returns (theta, value) of the best evaluated point.
std::pair<double, double> golden_section(const ScalarObjective& objective, double lo, double hi,
                                         double tol, int* evaluations = nullptr);

// Refines every strict interior local minimum of the scan. Candidates are
// returned in ascending theta.
std::vector<CandidatePoint> find_local_minima(const ProfileScan& profile,
                                              const ScalarObjective& objective,
                                              const SearchSpec& spec, int* evaluations = nullptr);

// Values within this distance of the minimum are ties, broken toward
// smaller |theta| and then smaller theta.
inline constexpr double kTieTolerance = 1e-9;

struct FitResult {
  CandidatePoint selected;
  std::vector<CandidatePoint> candidates;  // ascending theta, selected marked global_min
  int evaluations = 0;
  ObjectiveTag objective_tag = ObjectiveTag::pelr;
};

class NoFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Marks the global candidate and fills a FitResult. Throws NoFitError when no
// candidate has a finite value.
FitResult select_global(std::vector<CandidatePoint> candidates, int evaluations, ObjectiveTag tag);

FitResult minimize_scalar(const ScalarObjective& objective, const SearchSpec& spec, ObjectiveTag tag);

FitResult mele(const Dataset& data, const EstimatingModel& model, const SearchSpec& spec,
               bool use_ael, const InnerSolveConfig& cfg = {});
FitResult mle(const Dataset& data, const ParametricModel& model, const SearchSpec& spec);

// All sign-change roots of sum_i g(x_i; theta) in the box, ascending.
// Requires m = q = 1.
std::vector<double> solve_estimating_equation(const Dataset& data, const EstimatingModel& model,
                                              const SearchSpec& spec);

// Nodes at each observation (first coordinate) plus offsets k*step for
// |k*step| <= half_width. Used to resolve roots near isolated outliers.
std::vector<double> observation_stencil(const Dataset& data, double half_width, double step);

// Each observation (first coordinate) and the midpoint of each pair of
// neighbouring observations. Estimating functions with a kink at every
// observation are smooth in between, so this puts a node in every segment.
std::vector<double> observation_nodes(const Dataset& data);

}  // namespace elkit
