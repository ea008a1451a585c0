#include "htl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "htl/rng.hpp"

namespace htl::synth {

namespace {

constexpr double kClassificationMargin = 0.1;

// stream ids within a task seed
enum : std::uint64_t { kStreamTrain = 1, kStreamHoldout = 2, kStreamSources = 3 };

void check_spec(const TaskSpec& spec) {
  if (spec.d < 1) throw std::invalid_argument("task: d must be >= 1");
  if (spec.m < 1 || spec.m_holdout < 1)
    throw std::invalid_argument("task: sample sizes must be >= 1");
  if (spec.noise_std < 0) throw std::invalid_argument("task: noise_std must be >= 0");
  if (spec.C <= 0) throw std::invalid_argument("task: C must be positive");
  if (spec.source_count < 1) throw std::invalid_argument("task: source_count >= 1");
  if (spec.source_quality < 0)
    throw std::invalid_argument("task: source_quality must be >= 0");
}

Dataset sample_split(const TaskSpec& spec, const Eigen::VectorXd& w_star, long m,
                     Rng& rng) {
  Dataset data;
  data.C = spec.C;
  data.X.resize(m, spec.d);
  data.y.resize(m);
  for (long i = 0; i < m; ++i) {
    Eigen::VectorXd x = rng.ball_vector(spec.d);
    double margin = w_star.dot(x);
    if (spec.mode == TaskMode::classification_squared_hinge) {
      while (std::abs(margin) < kClassificationMargin) {
        x = rng.ball_vector(spec.d);
        margin = w_star.dot(x);
      }
      data.y[i] = margin > 0 ? 1.0 : -1.0;
    } else {
      double y = margin + (spec.noise_std > 0 ? spec.noise_std * rng.normal() : 0.0);
      data.y[i] = std::clamp(y, -spec.C, spec.C);
    }
    data.X.row(i) = x;
  }
  return data;
}

}  // namespace

TaskMode parse_mode(const std::string& name) {
  if (name == "regression_square") return TaskMode::regression_square;
  if (name == "classification_squared_hinge")
    return TaskMode::classification_squared_hinge;
  throw std::invalid_argument("unknown task mode: " + name);
}

std::string mode_name(TaskMode mode) {
  return mode == TaskMode::regression_square ? "regression_square"
                                             : "classification_squared_hinge";
}

GeneratedTask generate(const TaskSpec& spec) {
  check_spec(spec);
  GeneratedTask task;

  Rng src_rng(spec.seed, kStreamSources);
  Eigen::VectorXd w_star = src_rng.unit_vector(spec.d);
  if (spec.mode == TaskMode::regression_square && spec.C < 1.0)
    w_star *= spec.C;  // keep the clean signal inside the label range
  task.oracle_w = w_star;

  Rng train_rng(spec.seed, kStreamTrain);
  Rng holdout_rng(spec.seed, kStreamHoldout);
  task.train = sample_split(spec, w_star, spec.m, train_rng);
  task.holdout = sample_split(spec, w_star, spec.m_holdout, holdout_rng);

  // In classification mode a source must clear the unit margin to make the
  // squared hinge vanish, so the generating direction is scaled by 1/margin.
  const double source_scale =
      spec.mode == TaskMode::classification_squared_hinge
          ? 1.0 / kClassificationMargin
          : 1.0;
  double max_norm = 0.0;
  for (int j = 0; j < spec.source_count; ++j) {
    sources::Source src;
    src.kind = sources::Source::Kind::linear;
    Eigen::VectorXd w = w_star;
    if (spec.source_quality > 0) w += spec.source_quality * src_rng.unit_vector(spec.d);
    src.w = source_scale * w;
    max_norm = std::max(max_norm, src.w.norm());
    task.ensemble.sources.push_back(std::move(src));
  }
  task.ensemble.output_bound = max_norm;
  return task;
}

double measure_source_quality(const sources::SourceEnsemble& ensemble,
                              const sources::SourceCombination& comb,
                              const Dataset& holdout, const losses::LossSpec& loss) {
  return sources::source_risk(ensemble, comb, holdout, loss);
}

}  // namespace htl::synth
