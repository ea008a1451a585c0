#ifndef HTL_EXPERIMENTS_HPP
#define HTL_EXPERIMENTS_HPP

#include <map>
#include <string>
#include <vector>

#include "htl/synth.hpp"

namespace htl::experiments {

enum class LambdaPolicy { fixed, theorem2 };

struct ExperimentConfig {
  std::string experiment = "rates";
  std::vector<long> m_grid = {32, 64, 128, 256, 512, 1024, 2048, 4096};
  int trials = 50;
  double eta = 3.0;
  LambdaPolicy lambda_policy = LambdaPolicy::fixed;
  double lambda = 0.1;
  double tau = 1.0;  // class radius for theorem2 / excess oracle
  double rho = 1.0;
  int workers = 1;
  bool trim_extremes = false;  // drop smallest/largest m from slope fits
  std::string out;             // output path prefix
  std::vector<double> gamma_levels = {0.1, 1.0, 10.0};
  synth::TaskSpec task;  // template; m and source_quality overridden per run
};

ExperimentConfig load_config(const std::string& path);

struct ResultRow {
  std::string variant;
  long m = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double gap = 0.0;
  double bound = 0.0;
  double r_hat = 0.0;
  double r_holdout = 0.0;
  double r_src = 0.0;
  double omega_w = 0.0;
  bool failed = false;
};

struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
  int points = 0;
};

// ordinary least squares of log(y) on log(x); non-positive y values are skipped
SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct ExperimentResult {
  std::string experiment;
  std::vector<ResultRow> rows;
  std::map<std::string, double> summary;
  long failures = 0;
};

ExperimentResult run_rates(const ExperimentConfig& config);
ExperimentResult run_perfect(const ExperimentConfig& config);
ExperimentResult run_bound_validity(const ExperimentConfig& config);
ExperimentResult run_excess(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config);

// long-format CSV (experiment, variant, m, trial, gap, bound, seed, ...) and a
// JSON with the summary + echoed config
void save_results(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::string& prefix);

}  // namespace htl::experiments

#endif  // HTL_EXPERIMENTS_HPP
