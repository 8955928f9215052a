#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "elkit/numerics.hpp"
#include "elkit/optimize.hpp"

namespace elkit {

enum class ScenarioFamily {
  cauchy_roots,   // census of Cauchy score roots
  cauchy,         // Cauchy remedy MELE vs Cauchy MLE
  nlr,            // nonlinear regression y = t + t^2 x + e
  curved_normal,  // N(t, t^2) on N(1,1) data
  mixture,        // 0.4 N(t,1) + 0.6 N(10,16), t unknown
};

const char* to_string(ScenarioFamily f);

// Which non-global candidate the tests are applied to.
enum class LocalRule {
  nearest_minus_one,  // candidate closest to theta = -1
  best_non_global,    // lowest-valued candidate other than the global one
};

struct TestSet {
  bool el_global = false;
  std::vector<int> dehaan_draws;
  bool jiang = false;
};

struct HistogramRequest {
  double bin_width = 0.05;
};

struct ScenarioSpec {
  std::string name;
  ScenarioFamily family = ScenarioFamily::cauchy;
  // For nlr the generator yields (x, error) and y is formed from theta_true.
  DistributionSpec generator = normal_dist(0.0, 1.0);
  double theta_true = 0.0;
  std::string el_model;          // estimating-model catalog id
  std::string parametric_model;  // cauchy, curved_normal, mixture, nlr_gaussian or empty
  std::vector<int> sample_sizes{100};
  int replications = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 20231015;
  SearchSpec search;
  TestSet tests;
  bool use_ael = false;
  bool report_estimates = true;
  LocalRule local_rule = LocalRule::best_non_global;
  std::optional<HistogramRequest> histogram;  // of the MELE
  bool profile_trace = false;                  // W_n scan of replication 0
  bool keep_raw = false;

  void validate() const;
};

struct ReportRow {
  std::string label;
  int n = 0;
  std::string kind;  // mean, variance, rate, n/a, no_fit, count, ...
  double value = 0.0;
  double mc_se = 0.0;

  bool operator==(const ReportRow&) const = default;
};

struct Report {
  std::string scenario;
  std::vector<ReportRow> rows;
  // Optional per-replication series, keyed by name (e.g. "mele@n=200").
  std::map<std::string, std::vector<double>> raw;

  const ReportRow* find(const std::string& label, int n, const std::string& kind) const;
};

struct RunOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
};

const std::vector<std::string>& builtin_scenario_ids();
// Throws std::domain_error for unknown ids.
ScenarioSpec builtin_scenario(const std::string& id);

Report run_scenario(const ScenarioSpec& spec, const RunOptions& opts = {});

// Data generation for one replication; stream (seed, replication).
Dataset draw_replication(const ScenarioSpec& spec, int n, int replication);

// Default search boxes per family.
SearchSpec default_search(ScenarioFamily family);

struct BinSpec {
  double left;
  double width;
  int count;
};

struct HistogramBin {
  double left;
  double right;
  std::size_t count;

  bool operator==(const HistogramBin&) const = default;
};

// Bins are [left, right); the last bin also includes its right edge. Values
// outside the bins are a domain error, so counts sum to the input size.
std::vector<HistogramBin> emit_histogram(std::span<const double> values, const BinSpec& bins);
// `count` equal-width bins spanning [min, max] of the values.
BinSpec covering_bins(std::span<const double> values, int count);

enum class ReportFormat { csv, json };

std::string format_report(const Report& report, ReportFormat format);
Report parse_report_json(const std::string& text);
void write_report(const Report& report, const std::filesystem::path& path, ReportFormat format);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : std::runtime_error(what + " (row " + std::to_string(row) + ")"), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

// Headerless CSV of obs_dim decimal columns. Rows are numbered from 1.
Dataset parse_dataset(const std::string& text, std::size_t obs_dim);
Dataset read_dataset(const std::filesystem::path& path, std::size_t obs_dim);

// Shortest round-trip decimal form used in CSV output.
std::string format_double(double v);

}  // namespace elkit
