#pragma once

// Each catalog model paired with a data generator under which theta_star is
// the true parameter.

#include <string>
#include <vector>

#include "elkit/models.hpp"
#include "elkit/numerics.hpp"

namespace cases {

struct CatalogCase {
  std::string model_id;
  double theta_star;
  // Components checked for unbiasedness; empty means all of them.
  std::vector<std::size_t> components;
  elkit::Dataset (*draw)(std::size_t n, elkit::RngStream& rng);
};

inline elkit::Dataset draw_std_normal(std::size_t n, elkit::RngStream& rng) {
  return elkit::sample(elkit::normal_dist(0.0, 1.0), n, rng);
}
inline elkit::Dataset draw_equal_mean_var(std::size_t n, elkit::RngStream& rng) {
  return elkit::sample(elkit::normal_dist(2.0, 2.0), n, rng);
}
inline elkit::Dataset draw_cauchy(std::size_t n, elkit::RngStream& rng) {
  return elkit::sample(elkit::cauchy_dist(0.0), n, rng);
}
inline elkit::Dataset draw_curved(std::size_t n, elkit::RngStream& rng) {
  return elkit::sample(elkit::normal_dist(1.0, 1.0), n, rng);
}
inline elkit::Dataset draw_mixture(std::size_t n, elkit::RngStream& rng) {
  return elkit::sample(elkit::normal_mixture_dist(0.4, 0.0, 1.0, 10.0, 16.0), n, rng);
}
inline elkit::Dataset draw_asset(std::size_t n, elkit::RngStream& rng) {
  return elkit::sample(elkit::product_dist({elkit::normal_dist(0.0, 0.16), elkit::normal_dist(0.0, 0.16)}),
                       n, rng);
}
// (x, y) with y = 1 + x + e, x ~ N(5, 4), e ~ N(0, 1).
inline elkit::Dataset draw_nlr(std::size_t n, elkit::RngStream& rng) {
  auto d = elkit::sample(elkit::product_dist({elkit::normal_dist(5.0, 4.0), elkit::normal_dist(0.0, 1.0)}),
                         n, rng);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = d.row(i);
    r[1] = 1.0 + r[0] + r[1];
  }
  return d;
}

inline std::vector<CatalogCase> catalog_cases() {
  return {
      {"mean", 0.0, {}, draw_std_normal},
      {"mean-var", 2.0, {}, draw_equal_mean_var},
      {"cauchy-score", 0.0, {}, draw_cauchy},
      {"cauchy-remedy", 0.0, {}, draw_cauchy},
      {"nlr-score", 1.0, {}, draw_nlr},
      {"nlr-remedy", 1.0, {}, draw_nlr},
      {"curved-score", 1.0, {}, draw_curved},
      {"curved-remedy", 1.0, {}, draw_curved},
      {"mixture-score", 0.0, {}, draw_mixture},
      {"mixture-score-phi", 0.0, {}, draw_mixture},
      {"mixture-three-score", 0.0, {}, draw_mixture},
      {"asset-pricing", 3.0, {}, draw_asset},
      {"asset-pricing", 0.0, {0}, draw_asset},
  };
}

struct ComponentCheck {
  double mean;
  double std_error;
};

// Monte Carlo mean and standard error of each estimating-function component.
inline std::vector<ComponentCheck> component_means(const CatalogCase& c, std::size_t draws,
                                                   std::uint64_t seed) {
  const auto model = elkit::make_estimating_model(c.model_id);
  elkit::RngStream rng(seed, 0);
  const auto data = c.draw(draws, rng);
  std::vector<std::vector<double>> cols(model.m(), std::vector<double>(draws));
  std::vector<double> out(model.m());
  const double theta[] = {c.theta_star};
  for (std::size_t i = 0; i < draws; ++i) {
    model.eval(data.row(i), theta, out);
    for (std::size_t j = 0; j < model.m(); ++j) cols[j][i] = out[j];
  }
  std::vector<ComponentCheck> res;
  for (const auto& col : cols) {
    const auto s = elkit::summarize(col);
    res.push_back({s.mean, std::sqrt(s.variance / static_cast<double>(draws))});
  }
  return res;
}

}  // namespace cases
