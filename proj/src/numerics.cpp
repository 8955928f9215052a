#include "elkit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace elkit {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x9e3779b9u};
  return std::mt19937_64(seq);
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void sample_into(const DistributionSpec& dist, RngStream& rng, std::span<double> out) {
  std::visit(overloaded{
                 [&](const UniformDist& d) { out[0] = rng.uniform(d.lo, d.hi); },
                 [&](const NormalDist& d) {
                   out[0] = d.mean + std::sqrt(d.variance) * rng.standard_normal();
                 },
                 [&](const CauchyDist& d) {
                   out[0] = d.location + std::tan(std::numbers::pi * (rng.uniform() - 0.5));
                 },
                 [&](const NormalMixtureDist& d) {
                   const bool first = rng.uniform() < d.weight;
                   const double z = rng.standard_normal();
                   out[0] = first ? d.mean1 + std::sqrt(d.variance1) * z
                                  : d.mean2 + std::sqrt(d.variance2) * z;
                 },
                 [&](const ProductDist& d) {
                   std::size_t offset = 0;
                   for (const auto& c : d.components) {
                     const std::size_t k = c.dimension();
                     sample_into(c, rng, out.subspan(offset, k));
                     offset += k;
                   }
                 },
             },
             dist.kind);
}

void check_finite_param(double v, const char* what) {
  if (!std::isfinite(v)) throw std::domain_error(std::string("non-finite parameter: ") + what);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::uniform() {
  // 53 random bits, shifted by half an ulp so 0 is never returned.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::standard_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  has_spare_ = true;
  return u * f;
}

Dataset::Dataset(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw std::domain_error("dataset dimension must be positive");
  if (values_.size() % dim_ != 0)
    throw std::domain_error("dataset size is not a multiple of its dimension");
}

std::vector<double> Dataset::column(std::size_t j) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i * dim_ + j];
  return out;
}

std::size_t DistributionSpec::dimension() const {
  if (const auto* p = std::get_if<ProductDist>(&kind)) {
    std::size_t d = 0;
    for (const auto& c : p->components) d += c.dimension();
    return d;
  }
  return 1;
}

void DistributionSpec::validate() const {
  std::visit(overloaded{
                 [](const UniformDist& d) {
                   check_finite_param(d.lo, "lo");
                   check_finite_param(d.hi, "hi");
                   if (!(d.lo < d.hi)) throw std::domain_error("uniform requires lo < hi");
                 },
                 [](const NormalDist& d) {
                   check_finite_param(d.mean, "mean");
                   check_finite_param(d.variance, "variance");
                   if (d.variance < 0) throw std::domain_error("normal variance must be >= 0");
                 },
                 [](const CauchyDist& d) { check_finite_param(d.location, "location"); },
                 [](const NormalMixtureDist& d) {
                   check_finite_param(d.mean1, "mean1");
                   check_finite_param(d.mean2, "mean2");
                   if (!(d.weight >= 0.0 && d.weight <= 1.0))
                     throw std::domain_error("mixing proportion must lie in [0,1]");
                   if (!(d.variance1 >= 0.0) || !(d.variance2 >= 0.0) ||
                       !std::isfinite(d.variance1) || !std::isfinite(d.variance2))
                     throw std::domain_error("mixture variances must be >= 0");
                 },
                 [](const ProductDist& d) {
                   if (d.components.empty())
                     throw std::domain_error("product distribution needs components");
                   for (const auto& c : d.components) c.validate();
                 },
             },
             kind);
}

DistributionSpec uniform_dist(double lo, double hi) { return {UniformDist{lo, hi}}; }
DistributionSpec normal_dist(double mean, double variance) {
  return {NormalDist{mean, variance}};
}
DistributionSpec cauchy_dist(double location) { return {CauchyDist{location}}; }
DistributionSpec normal_mixture_dist(double weight, double mean1, double variance1, double mean2,
                                     double variance2) {
  return {NormalMixtureDist{weight, mean1, variance1, mean2, variance2}};
}
DistributionSpec product_dist(std::vector<DistributionSpec> components) {
  return {ProductDist{std::move(components)}};
}

Dataset sample(const DistributionSpec& dist, std::size_t n, RngStream& rng) {
  if (n == 0) throw std::domain_error("sample size must be positive");
  dist.validate();
  const std::size_t dim = dist.dimension();
  Dataset data(dim, std::vector<double>(n * dim));
  for (std::size_t i = 0; i < n; ++i) sample_into(dist, rng, data.row(i));
  return data;
}

double chisq_sf(double x, int df) {
  if (df < 1) throw std::domain_error("chi-square df must be >= 1");
  if (!(x >= 0.0)) throw std::domain_error("chi-square argument must be >= 0");
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

double chisq_cdf(double x, int df) {
  if (df < 1) throw std::domain_error("chi-square df must be >= 1");
  if (!(x >= 0.0)) throw std::domain_error("chi-square argument must be >= 0");
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(0.5 * df, 0.5 * x);
}

double chisq_quantile(double p, int df) {
  if (df < 1) throw std::domain_error("chi-square df must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("quantile level must lie in (0,1)");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(df), p);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_two_sided_p(double z) { return std::erfc(std::fabs(z) / std::numbers::sqrt2); }

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("summarize: empty input");
  const auto n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double variance = std::numeric_limits<double>::quiet_NaN();
  if (n >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    variance = ss / static_cast<double>(n - 1);
  }
  return {mean, variance, n};
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::domain_error("quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile level must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, values.size() - 1);
  if (lo == hi || values[lo] == values[hi]) return values[lo];
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace elkit
