#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "htl/rng.hpp"
#include "htl/solver.hpp"
#include "htl/sources.hpp"

using namespace htl;

namespace {

Dataset random_dataset(Rng& rng, Eigen::Index m, Eigen::Index d) {
  Dataset data;
  data.C = 1.0;
  data.X.resize(m, d);
  data.y.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    data.X.row(i) = rng.ball_vector(d);
    data.y[i] = rng.uniform(-1.0, 1.0);
  }
  return data;
}

sources::SourceEnsemble linear_ensemble(Rng& rng, Eigen::Index d, int n) {
  sources::SourceEnsemble ensemble;
  double bound = 0.0;
  for (int j = 0; j < n; ++j) {
    sources::Source src;
    src.kind = sources::Source::Kind::linear;
    src.w = rng.unit_vector(d);
    bound = std::max(bound, src.w.norm());
    ensemble.sources.push_back(std::move(src));
  }
  ensemble.output_bound = bound;
  return ensemble;
}

}  // namespace

TEST_CASE("source matrix and combination are linear in beta") {
  Rng rng(41, 0);
  const Dataset data = random_dataset(rng, 15, 4);
  const auto ensemble = linear_ensemble(rng, 4, 3);
  const Eigen::MatrixXd S = sources::source_matrix(ensemble, data);
  REQUIRE(S.cols() == 3);
  const Eigen::VectorXd b1 = rng.normal_vector(3);
  const Eigen::VectorXd b2 = rng.normal_vector(3);
  sources::SourceCombination c1{b1, 0.0, {}}, c2{b2, 0.0, {}},
      csum{b1 + 2.0 * b2, 0.0, {}};
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double lhs = sources::combine_predict(ensemble, csum, data, i);
    const double rhs = sources::combine_predict(ensemble, c1, data, i) +
                       2.0 * sources::combine_predict(ensemble, c2, data, i);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    CHECK(sources::combine_predict(ensemble, c1, data, i) ==
          doctest::Approx(S.row(i).dot(b1)).epsilon(1e-12));
  }
}

TEST_CASE("output bound violations are rejected") {
  Rng rng(42, 0);
  const Dataset data = random_dataset(rng, 10, 3);
  auto ensemble = linear_ensemble(rng, 3, 1);
  ensemble.output_bound = 1e-6;  // certainly violated by a unit-norm source
  CHECK_THROWS_AS(sources::source_matrix(ensemble, data), std::invalid_argument);
}

TEST_CASE("table sources are index aligned and id checked") {
  Rng rng(43, 0);
  const Dataset data = random_dataset(rng, 8, 3);
  sources::SourceEnsemble ensemble;
  sources::Source tab;
  tab.kind = sources::Source::Kind::table;
  tab.dataset_id = "train";
  tab.predictions = 0.5 * rng.normal_vector(8).cwiseMin(1.0).cwiseMax(-1.0);
  ensemble.sources.push_back(tab);
  ensemble.output_bound = 1.0;
  const Eigen::MatrixXd S = sources::source_matrix(ensemble, data, "train");
  CHECK((S.col(0) - ensemble.sources[0].predictions).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(sources::source_matrix(ensemble, data, "holdout"),
                  std::invalid_argument);
  sources::SourceCombination comb{Eigen::VectorXd::Ones(1), 0.0, {}};
  CHECK_THROWS_AS(sources::combine_predict(ensemble, comb, Eigen::VectorXd::Zero(3)),
                  std::invalid_argument);
}

TEST_CASE("source risk matches a direct evaluation") {
  Rng rng(44, 0);
  const Dataset data = random_dataset(rng, 30, 4);
  const auto ensemble = linear_ensemble(rng, 4, 2);
  const auto loss = losses::make_loss("square");
  sources::SourceCombination comb{rng.normal_vector(2), 0.0, {}};
  const Eigen::VectorXd pred = sources::source_matrix(ensemble, data) * comb.beta;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < 30; ++i)
    acc += (pred[i] - data.y[i]) * (pred[i] - data.y[i]);
  CHECK(sources::source_risk(ensemble, comb, data, loss) ==
        doctest::Approx(acc / 30.0).epsilon(1e-12));
}

TEST_CASE("tune_beta beats a dense grid oracle for one source") {
  Rng rng(45, 0);
  const Eigen::Index d = 4;
  Dataset data = random_dataset(rng, 60, d);
  const auto ensemble = linear_ensemble(rng, d, 1);
  // give the source genuine signal so tuning moves beta
  const Eigen::MatrixXd S0 = sources::source_matrix(ensemble, data);
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    data.y[i] = std::clamp(0.7 * S0(i, 0) + 0.1 * data.y[i], -1.0, 1.0);

  const auto loss = losses::make_loss("square");
  const auto reg_w = reg::make_sq_l2(1.0);
  const double lambda = 0.1, rho = 1.0;
  const auto beta_reg = reg::make_sq_l2(1.0);
  const auto tuned =
      sources::tune_beta(ensemble, data, loss, reg_w, lambda, rho, beta_reg);

  // grid oracle over the feasible interval, solving w exactly per point
  double grid_best = std::numeric_limits<double>::infinity();
  const double kappa = loss.H / reg_w.sigma();
  const double c = 2.0 * 4.0 * std::sqrt(3.0 * loss.H) *
                   (1.0 + ensemble.output_bound) *
                   (1.0 + std::sqrt(2.0 * loss.H / (lambda * reg_w.sigma()))) /
                   std::sqrt(reg_w.sigma());
  const double m = static_cast<double>(data.rows());
  for (int k = 0; k <= 100; ++k) {
    Eigen::VectorXd beta(1);
    beta[0] = -1.0 + 2.0 * static_cast<double>(k) / 100.0;
    const Eigen::VectorXd offsets = S0 * beta;
    const Eigen::VectorXd w =
        solver::solve_ridge_closed_form(data, lambda, offsets);
    const double risk = solver::empirical_risk(data, loss, offsets, w);
    double r_src = 0.0;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      r_src += (offsets[i] - data.y[i]) * (offsets[i] - data.y[i]);
    r_src /= m;
    const double obj = risk + c * kappa * r_src / (std::sqrt(m) * lambda) +
                       c * std::sqrt(kappa * kappa * rho * r_src / (m * lambda));
    grid_best = std::min(grid_best, obj);
  }
  CHECK(tuned.objective <= grid_best + 1e-6);
  CHECK(reg::reg_value(beta_reg, tuned.combination.beta) <= rho + 1e-9);
  // accepted objective history is monotone decreasing
  for (std::size_t i = 1; i < tuned.objective_history.size(); ++i)
    CHECK(tuned.objective_history[i] <= tuned.objective_history[i - 1]);
}

TEST_CASE("zero budget pins beta at zero") {
  Rng rng(46, 0);
  const Dataset data = random_dataset(rng, 30, 3);
  const auto ensemble = linear_ensemble(rng, 3, 2);
  const auto tuned = sources::tune_beta(ensemble, data, losses::make_loss("square"),
                                        reg::make_sq_l2(1.0), 0.1, 0.0,
                                        reg::make_sq_l2(1.0));
  CHECK(tuned.combination.beta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("an uninformative zero source keeps beta at zero via the tie break") {
  Rng rng(47, 0);
  const Dataset data = random_dataset(rng, 30, 3);
  sources::SourceEnsemble ensemble;
  sources::Source zero;
  zero.kind = sources::Source::Kind::linear;
  zero.w = Eigen::VectorXd::Zero(3);
  ensemble.sources.push_back(zero);
  ensemble.output_bound = 1.0;
  const auto tuned = sources::tune_beta(ensemble, data, losses::make_loss("square"),
                                        reg::make_sq_l2(1.0), 0.1, 1.0,
                                        reg::make_sq_l2(1.0));
  CHECK(tuned.combination.beta.cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("model prediction and risk estimate are consistent") {
  Rng rng(48, 0);
  const Dataset data = random_dataset(rng, 20, 4);
  const auto ensemble = linear_ensemble(rng, 4, 2);
  solver::TargetModel model;
  model.w = 0.3 * rng.normal_vector(4);
  model.beta = 0.5 * rng.normal_vector(2);
  model.loss = losses::make_loss("square");
  model.regularizer = reg::make_sq_l2(1.0);
  model.lambda = 0.1;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double p = sources::predict(model, ensemble, data, i);
    const double px =
        sources::predict(model, ensemble, Eigen::VectorXd(data.X.row(i)));
    CHECK(p == doctest::Approx(px).epsilon(1e-12));
    acc += (p - data.y[i]) * (p - data.y[i]);
  }
  CHECK(sources::risk_estimate(model, ensemble, data, model.loss) ==
        doctest::Approx(acc / 20.0).epsilon(1e-12));
}
