#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

namespace elkit {

// Deterministic random stream keyed by (seed, stream_id). Each unit of
// parallel work owns one; instances are never shared across threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double standard_normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

// Row-major table of n observations, each a flat vector of `dim` reals.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t dim, std::vector<double> values);

  std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  // Column j as a copy.
  std::vector<double> column(std::size_t j) const;
  const std::vector<double>& values() const { return values_; }

  bool operator==(const Dataset&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

struct UniformDist {
  double lo;
  double hi;
};
struct NormalDist {
  double mean;
  double variance;
};
struct CauchyDist {
  double location;
};
// weight is the probability of the first component.
struct NormalMixtureDist {
  double weight;
  double mean1;
  double variance1;
  double mean2;
  double variance2;
};

struct DistributionSpec;
struct ProductDist {
  std::vector<DistributionSpec> components;
};

struct DistributionSpec {
  std::variant<UniformDist, NormalDist, CauchyDist, NormalMixtureDist, ProductDist> kind;

  std::size_t dimension() const;
  // Throws std::domain_error on invalid parameters.
  void validate() const;
};

DistributionSpec uniform_dist(double lo, double hi);
DistributionSpec normal_dist(double mean, double variance);
DistributionSpec cauchy_dist(double location);
DistributionSpec normal_mixture_dist(double weight, double mean1, double variance1, double mean2,
                                     double variance2);
DistributionSpec product_dist(std::vector<DistributionSpec> components);

Dataset sample(const DistributionSpec& dist, std::size_t n, RngStream& rng);

// P(chi2_df > x) via the regularized upper incomplete gamma.
double chisq_sf(double x, int df);
double chisq_cdf(double x, int df);
// Upper quantile: smallest x with chisq_cdf(x, df) >= p.
double chisq_quantile(double p, int df);

double normal_cdf(double x);
double normal_two_sided_p(double z);

struct Summary {
  double mean;
  double variance;  // divisor n-1; NaN when count < 2
  std::size_t count;
};

Summary summarize(std::span<const double> values);

// Linear-interpolation sample quantile (type 7). Requires a non-empty input.
double quantile(std::vector<double> values, double p);
double median(std::vector<double> values);

}  // namespace elkit
