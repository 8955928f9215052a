#include "elkit/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace elkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvPhi = 0.61803398874989484820;  // 1 / golden ratio
constexpr int kBracketPoints = 17;

ScalarObjective guarded(const ScalarObjective& objective, const SearchSpec& spec, int* counter) {
  return [&objective, &spec, counter](double theta) {
    if (spec.is_excluded(theta)) return kInf;
    if (counter) ++*counter;
    const double v = objective(theta);
    return std::isnan(v) ? kInf : v;
  };
}

// Tie-break among near-equal candidates: smaller |theta|, then smaller theta.
bool better(const CandidatePoint& a, const CandidatePoint& b) {
  const double fa = std::fabs(a.theta), fb = std::fabs(b.theta);
  return fa != fb ? fa < fb : a.theta < b.theta;
}

}  // namespace

void SearchSpec::validate() const {
  if (!(std::isfinite(box.lo) && std::isfinite(box.hi) && box.lo < box.hi))
    throw std::domain_error("search box requires finite lo < hi");
  if (grid_points < 3) throw std::domain_error("search grid needs at least 3 points");
  if (!(refine_tol > 0.0)) throw std::domain_error("refine_tol must be positive");
  if (max_candidates < 1) throw std::domain_error("max_candidates must be positive");
}

bool SearchSpec::is_excluded(double theta) const {
  return std::any_of(excluded.begin(), excluded.end(),
                     [theta](const Interval& band) { return band.contains(theta); });
}

std::vector<double> SearchSpec::nodes() const {
  validate();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(grid_points) + extra_nodes.size());
  const double step = (box.hi - box.lo) / (grid_points - 1);
  for (int i = 0; i < grid_points; ++i)
    out.push_back(i == grid_points - 1 ? box.hi : box.lo + step * i);
  for (double x : extra_nodes)
    if (box.contains(x)) out.push_back(x);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const char* to_string(ObjectiveTag tag) {
  switch (tag) {
    case ObjectiveTag::pelr:
      return "pelr";
    case ObjectiveTag::ael_pelr:
      return "ael_pelr";
    case ObjectiveTag::parametric_nll:
      return "parametric_nll";
    case ObjectiveTag::least_squares:
      return "least_squares";
  }
  return "unknown";
}

ScalarObjective make_pelr_objective(const Dataset& data, const EstimatingModel& model, bool use_ael,
                                    const InnerSolveConfig& cfg) {
  if (model.q() != 1) throw std::domain_error("scalar search requires a scalar parameter");
  return [data, model, use_ael, cfg](double theta) {
    const std::span<const double> th(&theta, 1);
    const auto ev = use_ael ? adjusted_pelr(data, model, th, cfg) : profile_pelr(data, model, th, cfg);
    return ev.inner.converged() ? ev.w_n : kInf;
  };
}

ScalarObjective make_parametric_objective(const Dataset& data, const ParametricModel& model) {
  if (data.dim() != model.obs_dim)
    throw std::domain_error("parametric model '" + model.name + "' expects observations of dimension " +
                            std::to_string(model.obs_dim));
  return [data, model](double theta) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) total -= model.logpdf(data.row(i), theta);
    return total;
  };
}

ProfileScan scan(const ScalarObjective& objective, const SearchSpec& spec) {
  ProfileScan out;
  out.theta = spec.nodes();
  out.value.reserve(out.theta.size());
  const auto f = guarded(objective, spec, nullptr);
  for (double t : out.theta) {
    const double v = f(t);
    out.value.push_back(v);
    if (std::isfinite(v)) out.empty_basin = false;
  }
  return out;
}

ProfileScan scan_profile(const Dataset& data, const EstimatingModel& model, const SearchSpec& spec,
                         ObjectiveTag tag, const InnerSolveConfig& cfg) {
  if (tag != ObjectiveTag::pelr && tag != ObjectiveTag::ael_pelr)
    throw std::domain_error("estimating models support only pelr and ael_pelr objectives");
  return scan(make_pelr_objective(data, model, tag == ObjectiveTag::ael_pelr, cfg), spec);
}

ProfileScan scan_profile(const Dataset& data, const ParametricModel& model, const SearchSpec& spec,
                         ObjectiveTag tag) {
  const auto expected = model.objective == ParametricObjective::least_squares
                            ? ObjectiveTag::least_squares
                            : ObjectiveTag::parametric_nll;
  if (tag != expected)
    throw std::domain_error(std::string("parametric model '") + model.name +
                            "' does not support objective " + to_string(tag));
  return scan(make_parametric_objective(data, model), spec);
}

std::pair<double, double> golden_section(const ScalarObjective& objective, double lo, double hi,
                                         double tol, int* evaluations) {
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  int evals = 2;
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = objective(d);
    }
    ++evals;
  }
  if (evaluations) *evaluations += evals;
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

std::vector<CandidatePoint> find_local_minima(const ProfileScan& profile,
                                              const ScalarObjective& objective,
                                              const SearchSpec& spec, int* evaluations) {
  const auto& th = profile.theta;
  const auto& v = profile.value;
  const std::size_t n = th.size();

  struct Seed {
    std::size_t left;   // bracket node indices
    std::size_t right;
    std::size_t best;
  };
  std::vector<Seed> seeds;
  // A run of equal finite values strictly below both neighbours counts as one
  // minimum; the common case is a run of length one.
  for (std::size_t i = 1; i + 1 < n;) {
    if (!std::isfinite(v[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && v[j + 1] == v[i]) ++j;
    if (j + 1 < n && v[i - 1] > v[i] && v[j + 1] > v[i]) seeds.push_back({i - 1, j + 1, (i + j) / 2});
    i = j + 1;
  }

  if (static_cast<int>(seeds.size()) > spec.max_candidates) {
    std::stable_sort(seeds.begin(), seeds.end(),
                     [&v](const Seed& a, const Seed& b) { return v[a.best] < v[b.best]; });
    seeds.resize(static_cast<std::size_t>(spec.max_candidates));
    std::sort(seeds.begin(), seeds.end(),
              [](const Seed& a, const Seed& b) { return a.best < b.best; });
  }

  int evals = 0;
  const auto f = guarded(objective, spec, &evals);
  std::vector<CandidatePoint> out;
  for (const auto& s : seeds) {
    // Objectives with kinks (e.g. cube roots at each observation) can hold
    // several small basins inside one grid bracket; a sub-scan picks the
    // deepest before golden-section.
    const double lo = th[s.left], hi = th[s.right];
    const double step = (hi - lo) / (kBracketPoints - 1);
    int best_k = -1;
    double best_v = v[s.best];
    for (int k = 1; k + 1 < kBracketPoints; ++k) {
      const double fk = f(lo + k * step);
      if (fk < best_v) {
        best_v = fk;
        best_k = k;
      }
    }
    const double sub_lo = best_k < 0 ? lo : lo + (best_k - 1) * step;
    const double sub_hi = best_k < 0 ? hi : lo + (best_k + 1) * step;
    auto [theta, value] = golden_section(f, sub_lo, sub_hi, spec.refine_tol);
    // Re-evaluate at the reported point; fall back to the seed node if the
    // bracket turned out not to be unimodal.
    value = f(theta);
    if (!(value <= best_v)) {
      theta = best_k < 0 ? th[s.best] : lo + best_k * step;
      value = best_v;
    }
    if (!out.empty() && std::fabs(theta - out.back().theta) <= 10.0 * spec.refine_tol) {
      if (value < out.back().value) out.back() = {theta, value};
      continue;
    }
    out.push_back({theta, value});
  }
  if (evaluations) *evaluations += evals;
  return out;
}

FitResult select_global(std::vector<CandidatePoint> candidates, int evaluations, ObjectiveTag tag) {
  double best = kInf;
  for (const auto& c : candidates) best = std::min(best, c.value);
  if (!std::isfinite(best)) throw NoFitError("no finite candidate in the search box");

  std::size_t pick = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    candidates[i].kind = CandidateKind::local_min;
    if (candidates[i].value > best + kTieTolerance) continue;
    if (pick == candidates.size() || better(candidates[i], candidates[pick])) pick = i;
  }
  candidates[pick].kind = CandidateKind::global_min;
  FitResult fit;
  fit.selected = candidates[pick];
  fit.candidates = std::move(candidates);
  fit.evaluations = evaluations;
  fit.objective_tag = tag;
  return fit;
}

FitResult minimize_scalar(const ScalarObjective& objective, const SearchSpec& spec, ObjectiveTag tag) {
  const auto profile = scan(objective, spec);
  int evals = static_cast<int>(profile.theta.size());
  auto candidates = find_local_minima(profile, objective, spec, &evals);
  return select_global(std::move(candidates), evals, tag);
}

FitResult mele(const Dataset& data, const EstimatingModel& model, const SearchSpec& spec,
               bool use_ael, const InnerSolveConfig& cfg) {
  if (model.m() < model.q()) throw std::domain_error("MELE requires m >= q");
  return minimize_scalar(make_pelr_objective(data, model, use_ael, cfg), spec,
                         use_ael ? ObjectiveTag::ael_pelr : ObjectiveTag::pelr);
}

FitResult mle(const Dataset& data, const ParametricModel& model, const SearchSpec& spec) {
  return minimize_scalar(make_parametric_objective(data, model), spec,
                         model.objective == ParametricObjective::least_squares
                             ? ObjectiveTag::least_squares
                             : ObjectiveTag::parametric_nll);
}

std::vector<double> solve_estimating_equation(const Dataset& data, const EstimatingModel& model,
                                              const SearchSpec& spec) {
  if (model.m() != 1 || model.q() != 1)
    throw std::domain_error("root finding requires a just-determined scalar model (m = q = 1)");
  if (data.dim() != model.obs_dim())
    throw std::domain_error("model '" + model.name() + "' expects observations of dimension " +
                            std::to_string(model.obs_dim()));

  double out = 0.0;
  const auto total = [&](double theta) {
    if (spec.is_excluded(theta)) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    const std::span<const double> th(&theta, 1);
    for (std::size_t i = 0; i < data.size(); ++i) {
      model.eval(data.row(i), th, std::span<double>(&out, 1));
      s += out;
    }
    return s;
  };

  const auto nodes = spec.nodes();
  std::vector<double> values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) values[i] = total(nodes[i]);

  std::vector<double> roots;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (values[i] == 0.0) {
      roots.push_back(nodes[i]);
      continue;
    }
    if (i + 1 == nodes.size()) break;
    const double fa = values[i];
    const double fb = values[i + 1];
    if (!std::isfinite(fa) || !std::isfinite(fb) || fb == 0.0 || (fa > 0) == (fb > 0)) continue;
    double a = nodes[i];
    double b = nodes[i + 1];
    double sa = fa;
    while (b - a > spec.refine_tol) {
      const double mid = 0.5 * (a + b);
      const double fm = total(mid);
      if (fm == 0.0) {
        a = b = mid;
        break;
      }
      if ((fm > 0) == (sa > 0)) {
        a = mid;
        sa = fm;
      } else {
        b = mid;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  return roots;
}

std::vector<double> observation_stencil(const Dataset& data, double half_width, double step) {
  if (!(step > 0.0) || !(half_width >= 0.0))
    throw std::domain_error("observation stencil needs a positive step");
  const int k = static_cast<int>(std::floor(half_width / step));
  std::vector<double> out;
  out.reserve(data.size() * static_cast<std::size_t>(2 * k + 1));
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double x = data.row(i)[0];
    for (int j = -k; j <= k; ++j) out.push_back(x + j * step);
  }
  return out;
}

std::vector<double> observation_nodes(const Dataset& data) {
  auto xs = data.column(0);
  std::sort(xs.begin(), xs.end());
  std::vector<double> out;
  out.reserve(2 * xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0 && xs[i] > xs[i - 1]) out.push_back(0.5 * (xs[i - 1] + xs[i]));
    out.push_back(xs[i]);
  }
  return out;
}

}  // namespace elkit
