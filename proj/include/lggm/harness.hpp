// Experiment orchestration: metrics, train/test threshold tuning, the
// end-to-end experiment runner and its CSV/JSON reports.
#ifndef LGGM_HARNESS_HPP
#define LGGM_HARNESS_HPP

#include "lggm/baselines.hpp"
#include "lggm/generators.hpp"
#include "lggm/sampler.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lggm {

// Metrics over binary vectors already restricted to the evaluated pairs.

/// Harmonic mean of precision and recall with 1 as the positive class; 0 when
/// there are no true positives.
double metric_f1(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred);
double metric_accuracy(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred);
/// Rank-based ROC area with ties averaged; empty when truth has a single class.
std::optional<double> metric_auc(const Eigen::VectorXd& truth, const Eigen::VectorXd& score);

using Metric = std::function<double(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred)>;

struct TuningCase {
  Eigen::VectorXd truth;  // binary
  Eigen::VectorXd score;  // continuous prediction, thresholded as score >= tau
};

struct TuneResult {
  double mean = 0.0;                // mean over splits of the mean test metric
  double stddev = 0.0;              // across splits
  std::vector<double> split_means;  // one per split
  std::vector<double> thresholds;   // tau* per split
  std::vector<double> per_case;     // mean test metric of each case over the splits
                                    // that held it out (NaN if never held out)
};

/// Train/test threshold tuning. For each of `splits` random bisections of
/// the cases, picks the grid value maximizing the mean train metric (ties go
/// to the smallest value), then averages the metric over the test half.
/// Requires an even number of cases, at least two.
TuneResult tune_and_score(std::span<const TuningCase> cases, std::span<const double> grid,
                          int splits, const Metric& metric, Rng& rng);

std::vector<double> linear_grid(double first, double last, int count);

struct ExperimentConfig {
  std::string family = "grid";  // grid | ba | ergm | file

  GridParams grid;
  std::vector<Index> ba_nodes{46, 48, 50, 52};
  int ba_n1 = 2;
  int ba_n2 = 4;
  double ba_pi = 0.5;
  ErgmSpec ergm;
  std::string test_manifest;   // family = file: graphs to estimate
  std::string prior_manifest;  // optional prior dataset for any family

  double unknown_fraction = 0.1;
  Index unknown_count = 0;  // > 0 overrides unknown_fraction
  bool balanced_unknown = false;

  std::vector<double> k_ratios{0.5, 1.0, 2.5, 5.0};  // k = round(ratio * |U|)
  std::vector<double> k_values;                      // used instead of ratios if non-empty

  int samples = 10;
  double sigma_max = 0.5;
  double sigma_min = 0.03;
  int levels = 10;
  int steps = 300;
  double epsilon = 1e-6;

  std::vector<std::string> methods{"lpost", "lpr", "ll", "threshold", "wgl"};
  int instances = 100;
  int splits = 10;
  std::vector<double> thresholds = linear_grid(0.05, 0.95, 19);
  std::vector<double> theta_grid = linear_grid(0.0, 1.0, 51);
  std::vector<double> lambda_grid = linear_grid(0.01, 0.5, 50);

  std::uint64_t seed = 1;
  int dataset_size = 1000;
  int prior_relabelings = 0;
  int bootstrap_resamples = 50;
  std::vector<double> bootstrap_margins{0.1, 0.2};
  double bootstrap_lambda = 0.1;
  double magnitude_low = 0.5;
  double magnitude_high = 1.0;
  int threads = 0;
  int max_failures = 0;

  /// Throws InvalidArgument for an odd or too small instance count, empty grids,
  /// unknown methods or families.
  void validate() const;
};

/// Applies one "key = value" setting (lists are comma-separated).
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Names accepted by apply_setting, with a one-line description each.
const std::vector<std::pair<std::string, std::string>>& setting_keys();

/// Reads a key-value text file: "key = value" lines, '#' starts a comment.
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

struct MethodSummary {
  std::string method;
  double k = 0.0;
  int cases = 0;
  int failures = 0;
  TuneResult f1;
  TuneResult accuracy;
  double auc_mean = 0.0;
  double auc_std = 0.0;
  int auc_cases = 0;
  double runtime_ms = 0.0;
};

struct InstanceRow {
  int instance = 0;
  double k = 0.0;
  std::string method;
  Index nodes = 0;
  Index unknown = 0;
  Index positives = 0;
  bool ok = false;
  double auc = 0.0;  // NaN when undefined
  double cv_f1 = 0.0;
  double cv_accuracy = 0.0;
  std::string error;  // empty unless ok is false
};

struct MetricReport {
  std::vector<MethodSummary> summaries;
  std::vector<InstanceRow> rows;
  std::optional<LambdaCurve> lambda_curve;  // fitted from per-k tuned WGL lambdas
  std::vector<std::pair<double, double>> tuned_lambdas;
  int failed_instances = 0;
  int total_instances = 0;

  const MethodSummary* find(const std::string& method, double k) const;
};

/// Generates instances, hides unknown pairs, samples observations for every k,
/// runs each method and scores it with tune_and_score. Per-instance failures
/// are recorded and excluded from tuning.
MetricReport run_experiment(const ExperimentConfig& cfg);

/// Per-instance rows; deterministic for a fixed configuration.
std::string report_csv(const MetricReport& report);
/// Summary including tuned thresholds and runtimes.
std::string report_json(const MetricReport& report, const ExperimentConfig& cfg);
void write_report(const MetricReport& report, const ExperimentConfig& cfg,
                  const std::filesystem::path& dir);

}  // namespace lggm

#endif  // LGGM_HARNESS_HPP
