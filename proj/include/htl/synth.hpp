#ifndef HTL_SYNTH_HPP
#define HTL_SYNTH_HPP

#include <cstdint>
#include <string>

#include "htl/dataset.hpp"
#include "htl/losses.hpp"
#include "htl/sources.hpp"

namespace htl::synth {

enum class TaskMode { regression_square, classification_squared_hinge };

struct TaskSpec {
  int d = 8;
  long m = 100;
  long m_holdout = 100000;
  double noise_std = 0.0;
  double C = 1.0;  // label bound
  int source_count = 1;
  double source_quality = 0.0;  // gamma; 0 means a perfect linear source
  std::uint64_t seed = 0;
  TaskMode mode = TaskMode::regression_square;
};

TaskMode parse_mode(const std::string& name);
std::string mode_name(TaskMode mode);

struct GeneratedTask {
  Dataset train;
  Dataset holdout;
  sources::SourceEnsemble ensemble;
  Eigen::VectorXd oracle_w;  // the generating linear model
};

// Features uniform on the unit ball. Regression labels are
// clip(<w*,x> + noise, [-C, C]); classification labels are sign(<w*,x>) with
// rows of margin below 0.1 resampled so a perfect source exists. Sources are
// perturbations w* + gamma * u_i of the generator (scaled by 1/margin in
// classification mode so the gamma = 0 source incurs zero squared-hinge loss).
// Deterministic in spec.seed.
GeneratedTask generate(const TaskSpec& spec);

// Plug-in estimate of R_src: source risk on the (large) holdout.
double measure_source_quality(const sources::SourceEnsemble& ensemble,
                              const sources::SourceCombination& comb,
                              const Dataset& holdout, const losses::LossSpec& loss);

}  // namespace htl::synth

#endif  // HTL_SYNTH_HPP
