#include "htl/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "htl/bounds.hpp"
#include "htl/rng.hpp"
#include "htl/solver.hpp"

namespace htl::experiments {

using nlohmann::json;

namespace {

std::uint64_t row_seed(std::uint64_t base, int variant, long m, int trial) {
  const std::uint64_t stream = (static_cast<std::uint64_t>(variant) << 48) ^
                               (static_cast<std::uint64_t>(m) << 24) ^
                               static_cast<std::uint64_t>(trial);
  return Rng(base, stream).next_u64();
}

// Executes fn(0..count-1) on a bounded pool. Every work item writes only its
// own output slot, so the result is invariant to the worker count.
void parallel_for(int workers, long count, const std::function<void(long)>& fn) {
  if (workers <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  const int nthreads = static_cast<int>(std::min<long>(workers, count));
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t)
    pool.emplace_back([&] {
      for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (auto& th : pool) th.join();
}

struct FitOutcome {
  solver::TargetModel model;
  solver::TrainReport report;
};

FitOutcome fit_model(const Dataset& train, const Eigen::MatrixXd& S,
                     const Eigen::VectorXd& beta, const losses::LossSpec& loss,
                     const reg::RegularizerSpec& reg_w, double lambda) {
  const Eigen::VectorXd offsets =
      S.size() > 0 ? Eigen::VectorXd(S * beta)
                   : Eigen::VectorXd(Eigen::VectorXd::Zero(train.rows()));
  FitOutcome out;
  out.model.beta = beta;
  out.model.loss = loss;
  out.model.regularizer = reg_w;
  out.model.lambda = lambda;
  if (loss.name == losses::LossName::square && reg_w.name == reg::RegName::sq_l2) {
    out.model.w = solver::solve_ridge_closed_form(train, lambda, offsets, reg_w.scale);
    solver::TrainReport& rep = out.report;
    rep.empirical_risk = solver::empirical_risk(train, loss, offsets, out.model.w);
    rep.source_empirical_risk = solver::empirical_risk(
        train, loss, offsets, Eigen::VectorXd::Zero(train.dim()));
    rep.reg_value = reg_value(reg_w, out.model.w);
    rep.final_objective = rep.empirical_risk + lambda * rep.reg_value;
    rep.converged = true;
    rep.certificate_a = rep.empirical_risk <= rep.source_empirical_risk + 1e-9;
    rep.certificate_b = rep.reg_value <= rep.source_empirical_risk / lambda + 1e-9;
  } else {
    auto solved = solver::solve_erm(train, loss, reg_w, lambda, offsets);
    out.model.w = std::move(solved.w);
    out.report = solved.report;
  }
  return out;
}

double holdout_risk(const solver::TargetModel& model, const Dataset& holdout,
                    const Eigen::MatrixXd& S_holdout) {
  const Eigen::VectorXd pred =
      holdout.X * model.w +
      (S_holdout.size() > 0 ? Eigen::VectorXd(S_holdout * model.beta)
                            : Eigen::VectorXd(Eigen::VectorXd::Zero(holdout.rows())));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < holdout.rows(); ++i)
    acc += losses::loss_value(model.loss, pred[i], holdout.y[i]);
  return acc / static_cast<double>(holdout.rows());
}

Eigen::VectorXd unit_beta(int n) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
  if (n > 0) beta[0] = 1.0;
  return beta;
}

double mean_abs(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return acc / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
    if (x[i] > 0 && y[i] > 0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  SlopeFit fit;
  fit.points = static_cast<int>(lx.size());
  if (fit.points < 2) {
    fit.std_error = std::numeric_limits<double>::infinity();
    return fit;
  }
  const double n = static_cast<double>(fit.points);
  double mx = 0, my = 0;
  for (int i = 0; i < fit.points; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < fit.points; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  if (fit.points > 2) {
    double rss = 0;
    const double intercept = my - fit.slope * mx;
    for (int i = 0; i < fit.points; ++i) {
      const double r = ly[i] - intercept - fit.slope * lx[i];
      rss += r * r;
    }
    fit.std_error = std::sqrt(rss / ((n - 2.0) * sxx));
  } else {
    fit.std_error = std::numeric_limits<double>::infinity();
  }
  return fit;
}

ExperimentResult run_rates(const ExperimentConfig& config) {
  if (config.m_grid.size() < 2)
    throw std::invalid_argument("rates: m_grid needs at least 2 points");
  ExperimentResult result;
  result.experiment = "rates";
  const long n_m = static_cast<long>(config.m_grid.size());
  const long per_variant = n_m * config.trials;
  result.rows.resize(2 * per_variant);

  parallel_for(config.workers, 2 * per_variant, [&](long idx) {
    const int variant = static_cast<int>(idx / per_variant);  // 0 bad, 1 good
    const long rest = idx % per_variant;
    const long m = config.m_grid[rest / config.trials];
    const int trial = static_cast<int>(rest % config.trials);
    ResultRow& row = result.rows[idx];
    row.variant = variant == 0 ? "bad" : "good";
    row.m = m;
    row.trial = trial;
    row.seed = row_seed(config.task.seed, variant, m, trial);
    try {
      synth::TaskSpec spec = config.task;
      spec.m = m;
      spec.seed = row.seed;
      spec.mode = synth::TaskMode::regression_square;
      if (variant == 1) {
        // good source: clean task, mildly perturbed source, beta = e1
        spec.noise_std = 0.0;
      }
      const auto task = synth::generate(spec);
      const auto loss = losses::make_loss(losses::LossName::square);
      const auto reg_w = reg::make_sq_l2(1.0);
      const Eigen::MatrixXd S = sources::source_matrix(task.ensemble, task.train);
      const Eigen::MatrixXd Sh = sources::source_matrix(task.ensemble, task.holdout);
      const Eigen::VectorXd beta =
          variant == 0 ? Eigen::VectorXd(Eigen::VectorXd::Zero(task.ensemble.n()))
                       : unit_beta(task.ensemble.n());
      const auto fit = fit_model(task.train, S, beta, loss, reg_w, config.lambda);
      row.r_hat = fit.report.empirical_risk;
      row.r_src = fit.report.source_empirical_risk;
      row.omega_w = fit.report.reg_value;
      row.r_holdout = holdout_risk(fit.model, task.holdout, Sh);
      row.gap = row.r_holdout - row.r_hat;
    } catch (const std::exception&) {
      row.failed = true;
    }
  });

  for (const auto& row : result.rows)
    if (row.failed) ++result.failures;

  // per-variant slope of log(mean |gap|) vs log m
  for (int variant = 0; variant < 2; ++variant) {
    const std::string name = variant == 0 ? "bad" : "good";
    std::vector<double> ms, gaps;
    for (std::size_t k = 0; k < config.m_grid.size(); ++k) {
      std::vector<double> g;
      for (const auto& row : result.rows)
        if (!row.failed && row.variant == name && row.m == config.m_grid[k])
          g.push_back(row.gap);
      ms.push_back(static_cast<double>(config.m_grid[k]));
      gaps.push_back(mean_abs(g));
      double mean = 0.0;
      for (double v : g) mean += v;
      if (!g.empty()) mean /= static_cast<double>(g.size());
      std::ostringstream tag;
      tag << "_" << name << "_m" << config.m_grid[k];
      result.summary["mean_gap" + tag.str()] = mean;
      result.summary["median_gap" + tag.str()] = median(g);
    }
    std::vector<double> ms_fit = ms, gaps_fit = gaps;
    if (config.trim_extremes && ms_fit.size() > 5) {
      ms_fit.erase(ms_fit.begin());
      gaps_fit.erase(gaps_fit.begin());
      ms_fit.pop_back();
      gaps_fit.pop_back();
    }
    const auto fit = fit_loglog_slope(ms_fit, gaps_fit);
    result.summary["slope_" + name] = fit.slope;
    result.summary["slope_" + name + "_se"] = fit.std_error;
    // small-m segment: the first half of the grid (at least 3 points)
    const std::size_t half = std::max<std::size_t>(3, ms.size() / 2);
    std::vector<double> ms_small(ms.begin(), ms.begin() + std::min(half, ms.size()));
    std::vector<double> gaps_small(gaps.begin(),
                                   gaps.begin() + std::min(half, gaps.size()));
    const auto fit_small = fit_loglog_slope(ms_small, gaps_small);
    result.summary["slope_" + name + "_small_m"] = fit_small.slope;
  }
  result.summary["failures"] = static_cast<double>(result.failures);
  return result;
}

ExperimentResult run_perfect(const ExperimentConfig& config) {
  if (config.task.source_quality != 0.0)
    throw std::invalid_argument(
        "perfect: requires source_quality (gamma) = 0; got a noisy source");
  ExperimentResult result;
  result.experiment = "perfect";
  result.rows.resize(config.trials);

  parallel_for(config.workers, config.trials, [&](long idx) {
    ResultRow& row = result.rows[idx];
    row.variant = "perfect";
    row.m = config.task.m;
    row.trial = static_cast<int>(idx);
    row.seed = row_seed(config.task.seed, 0, config.task.m, row.trial);
    try {
      synth::TaskSpec spec = config.task;
      spec.mode = synth::TaskMode::classification_squared_hinge;
      spec.source_quality = 0.0;
      spec.seed = row.seed;
      const auto task = synth::generate(spec);
      const auto loss = losses::make_loss(losses::LossName::squared_hinge);
      const auto reg_w = reg::make_sq_l2(1.0);
      const Eigen::MatrixXd S = sources::source_matrix(task.ensemble, task.train);
      const Eigen::MatrixXd Sh = sources::source_matrix(task.ensemble, task.holdout);
      const Eigen::VectorXd beta = unit_beta(task.ensemble.n());
      const auto fit = fit_model(task.train, S, beta, loss, reg_w, config.lambda);
      row.r_src = fit.report.source_empirical_risk;
      row.r_hat = fit.report.empirical_risk;
      row.omega_w = fit.report.reg_value;
      row.r_holdout = holdout_risk(fit.model, task.holdout, Sh);
      row.gap = row.r_holdout - row.r_hat;
      const bool exact = row.r_src == 0.0 && fit.model.w.norm() == 0.0 &&
                         row.r_hat == 0.0 && row.r_holdout == 0.0;
      if (!exact)
        throw std::runtime_error(
            "perfect-source trial is not exact: r_src=" + std::to_string(row.r_src) +
            " |w|=" + std::to_string(fit.model.w.norm()) +
            " r_hat=" + std::to_string(row.r_hat) +
            " r_holdout=" + std::to_string(row.r_holdout));
    } catch (const std::exception&) {
      row.failed = true;
    }
  });

  for (const auto& row : result.rows)
    if (row.failed) ++result.failures;
  result.summary["exact_trials"] =
      static_cast<double>(config.trials - result.failures);
  result.summary["failures"] = static_cast<double>(result.failures);
  return result;
}

ExperimentResult run_bound_validity(const ExperimentConfig& config) {
  ExperimentResult result;
  result.experiment = "bound_validity";
  result.rows.resize(config.trials);

  parallel_for(config.workers, config.trials, [&](long idx) {
    ResultRow& row = result.rows[idx];
    row.variant = "validity";
    row.m = config.task.m;
    row.trial = static_cast<int>(idx);
    row.seed = row_seed(config.task.seed, 0, config.task.m, row.trial);
    try {
      synth::TaskSpec spec = config.task;
      spec.seed = row.seed;
      const auto task = synth::generate(spec);
      const auto loss = losses::make_loss(spec.mode == synth::TaskMode::regression_square
                                              ? losses::LossName::square
                                              : losses::LossName::squared_hinge);
      const auto reg_w = reg::make_sq_l2(1.0);
      const Eigen::MatrixXd S = sources::source_matrix(task.ensemble, task.train);
      const Eigen::MatrixXd Sh = sources::source_matrix(task.ensemble, task.holdout);
      const Eigen::VectorXd beta = unit_beta(task.ensemble.n());
      const auto fit = fit_model(task.train, S, beta, loss, reg_w, config.lambda);
      row.r_hat = fit.report.empirical_risk;
      row.omega_w = fit.report.reg_value;
      row.r_holdout = holdout_risk(fit.model, task.holdout, Sh);
      row.gap = row.r_holdout - row.r_hat;

      // plug-in source risk from the holdout
      sources::SourceCombination comb;
      comb.beta = beta;
      row.r_src = sources::source_risk(task.ensemble, comb, task.holdout, loss);

      bounds::BoundInputs in;
      in.H = loss.H;
      in.sigma = reg_w.sigma();
      in.m = spec.m;
      in.lambda = config.lambda;
      in.rho = config.rho;
      in.B = 1.0;
      in.C_src = std::sqrt(static_cast<double>(task.ensemble.n())) *
                 task.ensemble.output_bound;
      in.eta = config.eta;
      in.R_src_hat = row.r_src;
      in.r = row.r_src;
      const double pred_bound = solver::prediction_magnitude_bound(
          fit.report.source_empirical_risk / config.lambda, in.sigma, beta,
          task.ensemble.output_bound);
      in.M = loss.range_bound(pred_bound, spec.C);
      const double rad = bounds::rad_bound_smooth(in);
      row.bound = bounds::gen_gap_bound(rad, in).relaxed;
    } catch (const std::exception&) {
      row.failed = true;
    }
  });

  long violations = 0;
  for (const auto& row : result.rows) {
    if (row.failed)
      ++result.failures;
    else if (row.gap > row.bound)
      ++violations;
  }
  const double n = static_cast<double>(config.trials - result.failures);
  const double frac = n > 0 ? static_cast<double>(violations) / n : 0.0;
  const double target = std::exp(-config.eta);
  result.summary["violations"] = static_cast<double>(violations);
  result.summary["violation_fraction"] = frac;
  result.summary["allowed_fraction"] =
      target + 2.0 * std::sqrt(std::max(target * (1.0 - target), frac * (1.0 - frac)) /
                               std::max(n, 1.0));
  result.summary["failures"] = static_cast<double>(result.failures);
  return result;
}

namespace {

// empirical best-in-class: minimize holdout risk over Omega(w) <= tau by
// projected gradient with backtracking
Eigen::VectorXd constrained_oracle(const Dataset& holdout,
                                   const Eigen::VectorXd& offsets,
                                   const losses::LossSpec& loss,
                                   const reg::RegularizerSpec& reg_w, double tau,
                                   bool* converged) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(holdout.dim());
  if (tau <= 0) {
    *converged = true;
    return w;  // singleton class {0}
  }
  double step = 1.0 / loss.H;
  double risk = solver::empirical_risk(holdout, loss, offsets, w);
  *converged = false;
  for (int it = 0; it < 3000; ++it) {
    const Eigen::VectorXd pred = holdout.X * w + offsets;
    Eigen::VectorXd g(holdout.rows());
    for (Eigen::Index i = 0; i < holdout.rows(); ++i)
      g[i] = losses::loss_grad(loss, pred[i], holdout.y[i]);
    const Eigen::VectorXd grad =
        holdout.X.transpose() * g / static_cast<double>(holdout.rows());
    Eigen::VectorXd w_next;
    double risk_next = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      w_next = reg::ball_project(reg_w, w - step * grad, tau);
      risk_next = solver::empirical_risk(holdout, loss, offsets, w_next);
      if (risk_next <= risk + 1e-15) break;
      step *= 0.5;
    }
    const double move = (w_next - w).norm() / std::max(step, 1e-18);
    w = w_next;
    const double dec = risk - risk_next;
    risk = risk_next;
    if (move <= 1e-7 || (it > 20 && dec < 1e-14)) {
      *converged = true;
      break;
    }
    step *= 1.2;
  }
  return w;
}

}  // namespace

ExperimentResult run_excess(const ExperimentConfig& config) {
  ExperimentResult result;
  result.experiment = "excess";
  const int levels = static_cast<int>(config.gamma_levels.size());
  result.rows.resize(static_cast<long>(levels) * config.trials);

  parallel_for(config.workers, result.rows.size(), [&](long idx) {
    const int level = static_cast<int>(idx / config.trials);
    const int trial = static_cast<int>(idx % config.trials);
    const double gamma = config.gamma_levels[level];
    ResultRow& row = result.rows[idx];
    std::ostringstream tag;
    tag << "gamma=" << gamma;
    row.variant = tag.str();
    row.m = config.task.m;
    row.trial = trial;
    // same seed across gamma levels: paired trials
    row.seed = row_seed(config.task.seed, 0, config.task.m, trial);
    try {
      synth::TaskSpec spec = config.task;
      spec.seed = row.seed;
      spec.source_quality = gamma;
      const auto task = synth::generate(spec);
      const auto loss = losses::make_loss(spec.mode == synth::TaskMode::regression_square
                                              ? losses::LossName::square
                                              : losses::LossName::squared_hinge);
      const auto reg_w = reg::make_sq_l2(1.0);
      const Eigen::MatrixXd S = sources::source_matrix(task.ensemble, task.train);
      const Eigen::MatrixXd Sh = sources::source_matrix(task.ensemble, task.holdout);
      const Eigen::VectorXd beta = unit_beta(task.ensemble.n());

      sources::SourceCombination comb;
      comb.beta = beta;
      row.r_src = sources::source_risk(task.ensemble, comb, task.holdout, loss);

      bounds::BoundInputs in;
      in.H = loss.H;
      in.sigma = reg_w.sigma();
      in.m = spec.m;
      in.rho = config.rho;
      in.eta = config.eta;
      in.R_src_hat = row.r_src;
      in.C_src = std::sqrt(static_cast<double>(task.ensemble.n())) *
                 task.ensemble.output_bound;
      const double pred_bound = solver::prediction_magnitude_bound(
          config.tau, in.sigma, beta, task.ensemble.output_bound);
      in.M = loss.range_bound(pred_bound, spec.C);
      const double lambda =
          std::max(bounds::excess_lambda_star(in, config.tau), 1e-8);
      in.lambda = lambda;
      row.bound = bounds::excess_gap_bound(in, config.tau);

      const auto fit = fit_model(task.train, S, beta, loss, reg_w, lambda);
      row.r_hat = fit.report.empirical_risk;
      row.omega_w = fit.report.reg_value;
      row.r_holdout = holdout_risk(fit.model, task.holdout, Sh);

      bool oracle_ok = false;
      const Eigen::VectorXd offsets_h = Sh * beta;
      const Eigen::VectorXd w_oracle = constrained_oracle(
          task.holdout, offsets_h, loss, reg_w, config.tau, &oracle_ok);
      if (!oracle_ok) throw std::runtime_error("oracle did not converge");
      const double best =
          solver::empirical_risk(task.holdout, loss, offsets_h, w_oracle);
      row.gap = row.r_holdout - best;  // excess risk
    } catch (const std::exception&) {
      row.failed = true;
    }
  });

  for (const auto& row : result.rows)
    if (row.failed) ++result.failures;

  // medians per gamma level + paired sign tests between adjacent levels
  std::vector<std::vector<double>> excess_by_level(levels);
  for (int level = 0; level < levels; ++level) {
    excess_by_level[level].assign(config.trials,
                                  std::numeric_limits<double>::quiet_NaN());
    for (int trial = 0; trial < config.trials; ++trial) {
      const auto& row = result.rows[static_cast<long>(level) * config.trials + trial];
      if (!row.failed) excess_by_level[level][trial] = row.gap;
    }
    std::vector<double> clean;
    for (double v : excess_by_level[level])
      if (!std::isnan(v)) clean.push_back(v);
    std::ostringstream key;
    key << "median_excess_gamma_" << config.gamma_levels[level];
    result.summary[key.str()] = median(clean);
  }
  for (int level = 0; level + 1 < levels; ++level) {
    long wins = 0, pairs = 0;
    for (int trial = 0; trial < config.trials; ++trial) {
      const double a = excess_by_level[level][trial];
      const double b = excess_by_level[level + 1][trial];
      if (std::isnan(a) || std::isnan(b) || a == b) continue;
      ++pairs;
      if (a < b) ++wins;
    }
    const double z =
        pairs > 0 ? (static_cast<double>(wins) - 0.5 * pairs) / std::sqrt(0.25 * pairs)
                  : 0.0;
    std::ostringstream key;
    key << "sign_z_" << level << "_" << (level + 1);
    result.summary[key.str()] = z;
  }
  result.summary["failures"] = static_cast<double>(result.failures);
  result.summary["failure_fraction"] =
      static_cast<double>(result.failures) /
      std::max<double>(1.0, static_cast<double>(result.rows.size()));
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (config.experiment == "rates") return run_rates(config);
  if (config.experiment == "perfect") return run_perfect(config);
  if (config.experiment == "bound_validity") return run_bound_validity(config);
  if (config.experiment == "excess") return run_excess(config);
  throw std::invalid_argument("unknown experiment: " + config.experiment);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ExperimentConfig config;
  std::string line;
  int lineno = 0;
  auto parse_list_long = [](const std::string& s) {
    std::vector<long> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stol(item));
    return out;
  };
  auto parse_list_double = [](const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string{};
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    try {
      if (key == "experiment")
        config.experiment = value;
      else if (key == "m_grid")
        config.m_grid = parse_list_long(value);
      else if (key == "trials")
        config.trials = std::stoi(value);
      else if (key == "eta")
        config.eta = std::stod(value);
      else if (key == "lambda_policy")
        config.lambda_policy =
            value == "theorem2" ? LambdaPolicy::theorem2 : LambdaPolicy::fixed;
      else if (key == "lambda")
        config.lambda = std::stod(value);
      else if (key == "tau")
        config.tau = std::stod(value);
      else if (key == "rho")
        config.rho = std::stod(value);
      else if (key == "workers")
        config.workers = std::stoi(value);
      else if (key == "trim_extremes")
        config.trim_extremes = value == "1" || value == "true";
      else if (key == "out")
        config.out = value;
      else if (key == "gamma_levels")
        config.gamma_levels = parse_list_double(value);
      else if (key == "d")
        config.task.d = std::stoi(value);
      else if (key == "m")
        config.task.m = std::stol(value);
      else if (key == "m_holdout")
        config.task.m_holdout = std::stol(value);
      else if (key == "noise_std")
        config.task.noise_std = std::stod(value);
      else if (key == "label_bound")
        config.task.C = std::stod(value);
      else if (key == "source_count")
        config.task.source_count = std::stoi(value);
      else if (key == "gamma")
        config.task.source_quality = std::stod(value);
      else if (key == "seed")
        config.task.seed = std::stoull(value);
      else if (key == "mode")
        config.task.mode = synth::parse_mode(value);
      else
        throw std::runtime_error("unknown key '" + key + "'");
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (config.trials < 1) throw std::runtime_error("config: trials must be >= 1");
  for (std::size_t i = 1; i < config.m_grid.size(); ++i)
    if (config.m_grid[i] <= config.m_grid[i - 1])
      throw std::runtime_error("config: m_grid must be strictly increasing");
  return config;
}

void save_results(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::string& prefix) {
  {
    std::ofstream out(prefix + ".csv");
    if (!out) throw std::runtime_error("cannot open " + prefix + ".csv");
    out << "experiment,variant,m,trial,gap,bound,seed,r_hat,r_holdout,r_src,omega_w,"
           "failed\n";
    char buf[512];
    for (const auto& row : result.rows) {
      std::snprintf(buf, sizeof(buf),
                    "%s,%s,%ld,%d,%.17g,%.17g,%llu,%.17g,%.17g,%.17g,%.17g,%d\n",
                    result.experiment.c_str(), row.variant.c_str(), row.m, row.trial,
                    row.gap, row.bound,
                    static_cast<unsigned long long>(row.seed), row.r_hat,
                    row.r_holdout, row.r_src, row.omega_w, row.failed ? 1 : 0);
      out << buf;
    }
  }
  json j;
  j["experiment"] = result.experiment;
  j["summary"] = result.summary;
  j["failures"] = result.failures;
  j["config"] = {{"experiment", config.experiment},
                 {"m_grid", config.m_grid},
                 {"trials", config.trials},
                 {"eta", config.eta},
                 {"lambda", config.lambda},
                 {"tau", config.tau},
                 {"rho", config.rho},
                 {"gamma_levels", config.gamma_levels},
                 {"d", config.task.d},
                 {"m", config.task.m},
                 {"m_holdout", config.task.m_holdout},
                 {"noise_std", config.task.noise_std},
                 {"label_bound", config.task.C},
                 {"source_count", config.task.source_count},
                 {"gamma", config.task.source_quality},
                 {"seed", config.task.seed},
                 {"mode", synth::mode_name(config.task.mode)}};
  std::ofstream out(prefix + ".json");
  if (!out) throw std::runtime_error("cannot open " + prefix + ".json");
  out << j.dump(2) << "\n";
}

}  // namespace htl::experiments
