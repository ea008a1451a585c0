// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line; the
// exit status is the number of failed criteria.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "htl/bounds.hpp"
#include "htl/experiments.hpp"
#include "htl/rng.hpp"
#include "htl/solver.hpp"
#include "htl/sources.hpp"
#include "htl/synth.hpp"

using namespace htl;

namespace {

int g_failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s criterion %2d (%s): %s\n", ok ? "PASS" : "FAIL", id, name,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

Dataset random_dataset(Rng& rng, Eigen::Index m, Eigen::Index d, double label_bound) {
  Dataset data;
  data.C = label_bound;
  data.X.resize(m, d);
  data.y.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    data.X.row(i) = rng.ball_vector(d);
    data.y[i] = rng.uniform(-label_bound, label_bound);
  }
  return data;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string temp_prefix(const char* tag) {
  const char* dir = std::getenv("TMPDIR");
  return std::string(dir ? dir : "/tmp") + "/htl_accept_" + tag;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1. biased regularization and offset reparameterization give the same model
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101, 0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index m = 5 + static_cast<Eigen::Index>(rng.uniform() * 46);
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(rng.uniform() * 9);
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform() * 3);
    const Dataset data = random_dataset(rng, m, d, 1.0);
    Eigen::MatrixXd W_src(d, n);
    for (Eigen::Index j = 0; j < n; ++j) W_src.col(j) = rng.unit_vector(d);
    const Eigen::VectorXd beta = rng.normal_vector(n);
    const double lambda = std::exp(rng.uniform(-3.0, 0.5));
    const auto eq = solver::biased_ls_equivalence(data, lambda, W_src, beta);
    worst = std::max(worst, (eq.w_biased - eq.w_reparam).norm());
  }
  std::ostringstream detail;
  detail << "max |dw| = " << worst << " over 100 instances in " << elapsed_s(t0)
         << " s";
  report(1, "biased-regularization equivalence", worst <= 1e-8 && elapsed_s(t0) < 10.0,
         detail.str());
}

// 2. solver certificates on converged runs across all losses
void criterion_2() {
  Rng rng(102, 0);
  int ok_runs = 0;
  const char* names[] = {"square", "squared_hinge", "logistic"};
  for (int k = 0; k < 100; ++k) {
    const auto loss = losses::make_loss(names[k % 3]);
    const Dataset data = random_dataset(rng, 30, 5, 1.0);
    const Eigen::VectorXd offsets = 0.5 * rng.normal_vector(30);
    const double lambda = std::exp(rng.uniform(-3.0, 0.0));
    const auto result =
        solver::solve_erm(data, loss, reg::make_sq_l2(1.0), lambda, offsets);
    const bool good =
        result.report.converged && result.report.certificate_a &&
        result.report.certificate_b &&
        result.report.empirical_risk <= result.report.source_empirical_risk + 1e-9 &&
        result.report.reg_value <= result.report.source_empirical_risk / lambda + 1e-9;
    if (good) ++ok_runs;
  }
  std::ostringstream detail;
  detail << ok_runs << "/100 converged runs satisfy both certificates";
  report(2, "solver certificates", ok_runs == 100, detail.str());
}

// 3. smooth-loss property grids: self-bounding gradient, H-Lipschitz gradient,
// and the two-point difference bound
void criterion_3() {
  bool ok = true;
  double worst = 0.0;
  for (const char* name : {"square", "squared_hinge", "logistic"}) {
    const auto loss = losses::make_loss(name);
    for (double label : {-1.0, -0.3, 0.0, 0.6, 1.0}) {
      for (double x = -6.0; x <= 6.0; x += 0.05) {
        const double phi = losses::loss_value(loss, x, label);
        const double dphi = losses::loss_grad(loss, x, label);
        const double self_slack =
            std::abs(dphi) - std::sqrt(4.0 * loss.H * phi);
        worst = std::max(worst, self_slack);
        if (self_slack > 1e-9) ok = false;
        for (double z = -6.0; z <= 6.0; z += 0.6) {
          const double lips = std::abs(dphi - losses::loss_grad(loss, z, label)) -
                              loss.H * std::abs(x - z);
          worst = std::max(worst, lips);
          if (lips > 1e-9) ok = false;
          const auto diff = losses::smooth_diff_bound_check(loss, x, z, label);
          worst = std::max(worst, diff.lhs - diff.rhs);
          if (diff.lhs > diff.rhs + 1e-9) ok = false;
        }
      }
    }
  }
  std::ostringstream detail;
  detail << "worst slack " << worst << " across all losses and grids";
  report(3, "smooth-loss properties", ok, detail.str());
}

// 4. Bennett inversion: the closed-form cap dominates, Newton matches bisection
void criterion_4() {
  bool ok = true;
  double worst_gap = 0.0, worst_cap = 0.0;
  for (int k = 0; k < 60; ++k) {
    const double b =
        std::pow(10.0, -6.0 + 12.0 * static_cast<double>(k) / 59.0);
    const double inv = bounds::bennett_u_inverse(b);
    if (inv > bounds::log_bound_cap(b) + 1e-12) ok = false;
    worst_cap = std::max(worst_cap, inv - bounds::log_bound_cap(b));
    // independent bisection oracle on u(a) = b
    double lo = 0.0, hi = 1.0;
    while (bounds::bennett_u(hi) < b) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (bounds::bennett_u(mid) < b ? lo : hi) = mid;
    }
    const double gap = std::abs(inv - 0.5 * (lo + hi));
    worst_gap = std::max(worst_gap, gap / std::max(1.0, inv));
    if (gap > 1e-10 * std::max(1.0, inv)) ok = false;
  }
  std::ostringstream detail;
  detail << "max relative Newton-vs-bisection gap " << worst_gap
         << ", max inverse-minus-cap " << worst_cap;
  report(4, "Bennett inversion", ok, detail.str());
}

// 5. exact enumeration: the scaled-sample surrogate dominates the loss-class
// complexity on random finite classes
void criterion_5() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(105, 0);
  const auto loss = losses::make_loss("square");
  bool ok = true;
  double worst = -1e300;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index m = 4 + static_cast<Eigen::Index>(rng.uniform() * 9);
    const int k = 2 + static_cast<int>(rng.uniform() * 7);
    Eigen::MatrixXd f(m, k);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      y[i] = rng.uniform(-1.0, 1.0);
      for (int j = 0; j < k; ++j) f(i, j) = rng.uniform(-1.0, 1.0);
    }
    Eigen::MatrixXd loss_values(m, k);
    Eigen::VectorXd tau(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      double cap = 0.0;
      for (int j = 0; j < k; ++j) {
        loss_values(i, j) = losses::loss_value(loss, f(i, j), y[i]);
        cap = std::max(cap, loss_values(i, j));
      }
      tau[i] = cap;
    }
    Rng sweep(0, 0);
    const auto lhs = bounds::empirical_rademacher_finite(loss_values, 0, true, sweep);
    const auto rhs =
        bounds::rademacher_smooth_surrogate_finite(f, loss.H, tau, 0, true, sweep);
    worst = std::max(worst, lhs.mean - rhs.mean);
    if (!lhs.exact || !rhs.exact || lhs.mean > rhs.mean + 1e-12) ok = false;
  }
  const double secs = elapsed_s(t0);
  std::ostringstream detail;
  detail << "max lhs-minus-rhs " << worst << " over 50 exact enumerations in " << secs
         << " s";
  report(5, "loss-class contraction surrogate", ok && secs < 60.0, detail.str());
}

// 6. the closed-form complexity bound dominates a Monte Carlo lower estimate of
// the certified loss-class complexity, and collapses at zero source risk
void criterion_6() {
  Rng rng(106, 0);
  bool ok = true;
  double worst = -1e300;
  const int instances = 20, members = 1000, draws = 1000;
  for (int inst = 0; inst < instances; ++inst) {
    synth::TaskSpec spec;
    spec.d = 5;
    spec.m = 30;
    spec.m_holdout = 10;
    spec.noise_std = 0.1 + 0.3 * rng.uniform();
    spec.source_quality = 0.2 + 0.8 * rng.uniform();
    spec.seed = 9000 + static_cast<std::uint64_t>(inst);
    const auto task = synth::generate(spec);
    const auto loss = losses::make_loss("square");
    const auto reg_w = reg::make_sq_l2(1.0);
    const double lambda = std::exp(rng.uniform(-2.0, 0.0));

    const Eigen::MatrixXd S = sources::source_matrix(task.ensemble, task.train);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(task.ensemble.n());
    beta[0] = 1.0;
    const Eigen::VectorXd offsets = S * beta;
    double r_src = 0.0;
    for (Eigen::Index i = 0; i < task.train.rows(); ++i)
      r_src += losses::loss_value(loss, offsets[i], task.train.y[i]);
    r_src /= static_cast<double>(task.train.rows());

    // feasible members: Omega(w) <= R_src_hat / lambda, beta fixed at e1
    const double radius_sq = r_src / lambda;            // Omega(w) = |w|^2 here
    const double radius = std::sqrt(radius_sq);
    const Eigen::Index m = task.train.rows();
    Eigen::MatrixXd L(m, members);
    for (int j = 0; j < members; ++j) {
      const double scale = j == 0 ? 0.0 : (j % 2 ? 1.0 : rng.uniform());
      const Eigen::VectorXd w = scale * radius * rng.unit_vector(spec.d);
      const Eigen::VectorXd pred = task.train.X * w + offsets;
      for (Eigen::Index i = 0; i < m; ++i)
        L(i, j) = losses::loss_value(loss, pred[i], task.train.y[i]);
    }
    double acc = 0.0, acc2 = 0.0;
    for (int t = 0; t < draws; ++t) {
      const Eigen::VectorXd eps = rng.rademacher_vector(m);
      const double sup = (eps.transpose() * L).maxCoeff() / static_cast<double>(m);
      acc += sup;
      acc2 += sup * sup;
    }
    const double mc = acc / draws;
    const double se =
        std::sqrt(std::max(0.0, acc2 / draws - mc * mc) / static_cast<double>(draws));

    bounds::BoundInputs in;
    in.H = loss.H;
    in.sigma = reg_w.sigma();
    in.m = m;
    in.lambda = lambda;
    in.rho = reg::reg_value(reg_w, beta);
    in.B = 1.0;
    in.C_src = task.ensemble.output_bound;
    in.R_src_hat = r_src;
    const double bound = bounds::rad_bound_smooth(in);
    worst = std::max(worst, mc - bound - 3.0 * se);
    if (mc > bound + 3.0 * se) ok = false;
  }
  bounds::BoundInputs zero;
  zero.R_src_hat = 0.0;
  zero.m = 100;
  if (bounds::rad_bound_smooth(zero) != 0.0) ok = false;
  std::ostringstream detail;
  detail << "max MC-minus-(bound+3SE) " << worst << " over " << instances
         << " instances; zero-risk collapse "
         << (bounds::rad_bound_smooth(zero) == 0.0 ? "exact" : "violated");
  report(6, "complexity bound validity", ok, detail.str());
}

experiments::ExperimentConfig base_config(int workers) {
  experiments::ExperimentConfig cfg;
  cfg.workers = workers;
  return cfg;
}

// 7. a perfect source forces w = 0 and zero train and holdout risk exactly
void criterion_7(int workers) {
  auto cfg = base_config(workers);
  cfg.experiment = "perfect";
  cfg.trials = 100;
  cfg.task.d = 6;
  cfg.task.m = 100;
  cfg.task.m_holdout = 2000;
  cfg.task.mode = synth::TaskMode::classification_squared_hinge;
  cfg.task.source_quality = 0.0;
  cfg.task.seed = 107;
  const auto result = experiments::run_experiment(cfg);
  const long exact = static_cast<long>(result.summary.at("exact_trials"));
  std::ostringstream detail;
  detail << exact << "/100 trials exactly zero";
  report(7, "perfect-source collapse", exact == 100 && result.failures == 0,
         detail.str());
}

// 8. the relaxed generalization-gap bound holds at eta = 3 up to binomial noise
void criterion_8(int workers) {
  auto cfg = base_config(workers);
  cfg.experiment = "bound_validity";
  cfg.trials = 200;
  cfg.eta = 3.0;
  cfg.lambda = 0.1;
  cfg.rho = 1.0;
  cfg.task.d = 6;
  cfg.task.m = 200;
  cfg.task.m_holdout = 5000;
  cfg.task.noise_std = 0.2;
  cfg.task.source_quality = 0.3;
  cfg.task.seed = 108;
  const auto result = experiments::run_experiment(cfg);
  const double frac = result.summary.at("violation_fraction");
  const double allowed = result.summary.at("allowed_fraction");
  std::ostringstream detail;
  detail << "violation fraction " << frac << " <= allowed " << allowed << " ("
         << static_cast<long>(result.summary.at("violations")) << "/200)";
  report(8, "generalization bound validity", frac <= allowed && result.failures == 0,
         detail.str());
}

// 9. log-log rate regimes: the uninformed source decays near 1/sqrt(m); the
// informed source decays markedly faster on the small-m segment
void criterion_9(int workers) {
  const auto t0 = std::chrono::steady_clock::now();
  auto cfg = base_config(workers);
  cfg.experiment = "rates";
  cfg.m_grid = {32, 64, 128, 256, 512, 1024, 2048, 4096};
  cfg.trials = 200;
  cfg.lambda = 0.02;
  cfg.trim_extremes = true;
  cfg.task.d = 8;
  cfg.task.m_holdout = 20000;
  cfg.task.noise_std = 0.3;
  cfg.task.C = 2.0;
  cfg.task.source_quality = 0.05;
  cfg.task.seed = 11;
  const auto result = experiments::run_experiment(cfg);
  const double bad = result.summary.at("slope_bad");
  const double good_small = result.summary.at("slope_good_small_m");
  const double secs = elapsed_s(t0);
  const bool ok = bad >= -0.65 && bad <= -0.35 && good_small <= bad - 0.2 &&
                  result.failures == 0 && secs < 900.0;
  std::ostringstream detail;
  detail << "uninformed slope " << bad << " in [-0.65, -0.35], informed small-m slope "
         << good_small << " <= " << bad - 0.2 << "; " << secs << " s";
  report(9, "rate reproduction", ok, detail.str());
}

// 10. excess risk grows with source corruption: strict median ordering plus a
// paired one-sided sign test at 95%
void criterion_10(int workers) {
  auto cfg = base_config(workers);
  cfg.experiment = "excess";
  cfg.trials = 60;
  cfg.gamma_levels = {0.1, 1.0, 10.0};
  cfg.tau = 1.0;
  cfg.rho = 1.0;
  cfg.eta = 1.0;
  cfg.task.d = 6;
  cfg.task.m = 100;
  cfg.task.m_holdout = 4000;
  cfg.task.noise_std = 0.1;
  cfg.task.seed = 110;
  const auto result = experiments::run_experiment(cfg);
  const double m0 = result.summary.at("median_excess_gamma_0.1");
  const double m1 = result.summary.at("median_excess_gamma_1");
  const double m2 = result.summary.at("median_excess_gamma_10");
  const double z01 = result.summary.at("sign_z_0_1");
  const double z12 = result.summary.at("sign_z_1_2");
  const bool ok = m0 < m1 && m1 < m2 && z01 >= 1.645 && z12 >= 1.645 &&
                  result.failures == 0;
  std::ostringstream detail;
  detail << "medians " << m0 << " < " << m1 << " < " << m2 << ", sign z " << z01
         << ", " << z12 << " (need >= 1.645)";
  report(10, "excess-risk monotonicity", ok, detail.str());
}

// 11. output files are byte-identical for 1 and 8 workers on the same config
void criterion_11() {
  auto cfg = base_config(1);
  cfg.experiment = "excess";
  cfg.trials = 12;
  cfg.gamma_levels = {0.1, 1.0};
  cfg.task.d = 5;
  cfg.task.m = 60;
  cfg.task.m_holdout = 600;
  cfg.task.noise_std = 0.1;
  cfg.task.seed = 111;
  const std::string p1 = temp_prefix("serial"), p8 = temp_prefix("parallel");
  const auto serial = experiments::run_experiment(cfg);
  experiments::save_results(serial, cfg, p1);
  cfg.workers = 8;
  const auto parallel = experiments::run_experiment(cfg);
  experiments::save_results(parallel, cfg, p8);
  const bool csv_same = slurp(p1 + ".csv") == slurp(p8 + ".csv");
  const bool json_same = slurp(p1 + ".json") == slurp(p8 + ".json");
  for (const auto& p : {p1, p8}) {
    std::remove((p + ".csv").c_str());
    std::remove((p + ".json").c_str());
  }
  std::ostringstream detail;
  detail << "csv " << (csv_same ? "identical" : "differs") << ", json "
         << (json_same ? "identical" : "differs");
  report(11, "parallel invariance", csv_same && json_same, detail.str());
}

}  // namespace

int main() {
  const unsigned hw = std::thread::hardware_concurrency();
  const int workers = hw > 0 ? static_cast<int>(hw) : 4;
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7(workers);
  criterion_8(workers);
  criterion_9(workers);
  criterion_10(workers);
  criterion_11();
  std::printf("%d of 11 criteria failed\n", g_failures);
  return g_failures;
}
