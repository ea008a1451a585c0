#include "htl/sources.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace htl::sources {

namespace {

Eigen::VectorXd source_predictions(const Source& src, const Dataset& data,
                                   const std::string& dataset_id) {
  if (src.kind == Source::Kind::linear) {
    if (src.w.size() != data.dim())
      throw std::invalid_argument("linear source dimension mismatch");
    return data.X * src.w;
  }
  if (src.predictions.size() != data.rows())
    throw std::out_of_range("table source length does not match dataset");
  if (!dataset_id.empty() && !src.dataset_id.empty() && dataset_id != src.dataset_id)
    throw std::invalid_argument("table source is for dataset '" + src.dataset_id +
                                "', not '" + dataset_id + "'");
  return src.predictions;
}

}  // namespace

Eigen::MatrixXd source_matrix(const SourceEnsemble& ensemble, const Dataset& data,
                              const std::string& dataset_id) {
  Eigen::MatrixXd S(data.rows(), ensemble.n());
  for (int j = 0; j < ensemble.n(); ++j) {
    S.col(j) = source_predictions(ensemble.sources[j], data, dataset_id);
    if (S.col(j).lpNorm<Eigen::Infinity>() > ensemble.output_bound + 1e-9)
      throw std::invalid_argument("source " + std::to_string(j + 1) +
                                  " exceeds the declared output bound");
  }
  return S;
}

double combine_predict(const SourceEnsemble& ensemble, const SourceCombination& comb,
                       const Eigen::VectorXd& x) {
  if (comb.beta.size() != ensemble.n())
    throw std::invalid_argument("beta size does not match ensemble");
  double out = 0.0;
  for (int j = 0; j < ensemble.n(); ++j) {
    const Source& src = ensemble.sources[j];
    if (src.kind != Source::Kind::linear)
      throw std::invalid_argument(
          "table-backed source cannot predict on a raw feature vector");
    out += comb.beta[j] * src.w.dot(x);
  }
  return out;
}

double combine_predict(const SourceEnsemble& ensemble, const SourceCombination& comb,
                       const Dataset& data, Eigen::Index i) {
  if (i < 0 || i >= data.rows()) throw std::out_of_range("row index out of range");
  if (comb.beta.size() != ensemble.n())
    throw std::invalid_argument("beta size does not match ensemble");
  double out = 0.0;
  for (int j = 0; j < ensemble.n(); ++j) {
    const Source& src = ensemble.sources[j];
    if (src.kind == Source::Kind::linear)
      out += comb.beta[j] * src.w.dot(data.X.row(i));
    else {
      if (src.predictions.size() != data.rows())
        throw std::out_of_range("table source length does not match dataset");
      out += comb.beta[j] * src.predictions[i];
    }
  }
  return out;
}

double source_risk(const SourceEnsemble& ensemble, const SourceCombination& comb,
                   const Dataset& data, const losses::LossSpec& loss) {
  if (data.rows() == 0) throw std::invalid_argument("source_risk: empty dataset");
  const Eigen::VectorXd pred = source_matrix(ensemble, data) * comb.beta;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    acc += losses::loss_value(loss, pred[i], data.y[i]);
  return acc / static_cast<double>(data.rows());
}

double predict(const solver::TargetModel& model, const SourceEnsemble& ensemble,
               const Eigen::VectorXd& x) {
  if (model.w.size() != x.size()) throw std::invalid_argument("predict: dimension mismatch");
  SourceCombination comb;
  comb.beta = model.beta;
  return model.w.dot(x) + combine_predict(ensemble, comb, x);
}

double predict(const solver::TargetModel& model, const SourceEnsemble& ensemble,
               const Dataset& data, Eigen::Index i) {
  SourceCombination comb;
  comb.beta = model.beta;
  return model.w.dot(data.X.row(i)) + combine_predict(ensemble, comb, data, i);
}

double risk_estimate(const solver::TargetModel& model, const SourceEnsemble& ensemble,
                     const Dataset& data, const losses::LossSpec& loss) {
  const Eigen::VectorXd pred =
      data.X * model.w + source_matrix(ensemble, data) * model.beta;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    acc += losses::loss_value(loss, pred[i], data.y[i]);
  return acc / static_cast<double>(data.rows());
}

namespace {

struct TuneObjective {
  const Dataset& data;
  const losses::LossSpec& loss;
  double lambda;
  double rho;
  double kappa;
  double c1;
  double c2;
  double ridge;  // tie-break on beta
  const Eigen::MatrixXd& S;

  double source_risk_of(const Eigen::VectorXd& beta) const {
    const Eigen::VectorXd pred = S * beta;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      acc += losses::loss_value(loss, pred[i], data.y[i]);
    return acc / static_cast<double>(data.rows());
  }

  double penalty(double r_src) const {
    const double m = static_cast<double>(data.rows());
    return c1 * kappa * r_src / (std::sqrt(m) * lambda) +
           c2 * std::sqrt(kappa * kappa * rho * r_src / (m * lambda));
  }

  double value(const Eigen::VectorXd& beta, const Eigen::VectorXd& w) const {
    const Eigen::VectorXd pred = data.X * w + S * beta;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < data.rows(); ++i)
      acc += losses::loss_value(loss, pred[i], data.y[i]);
    return acc / static_cast<double>(data.rows()) + penalty(source_risk_of(beta)) +
           ridge * beta.squaredNorm();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& beta,
                           const Eigen::VectorXd& w) const {
    const double m = static_cast<double>(data.rows());
    const Eigen::VectorXd pred = data.X * w + S * beta;
    const Eigen::VectorXd src_pred = S * beta;
    Eigen::VectorXd g_full(data.rows()), g_src(data.rows());
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      g_full[i] = losses::loss_grad(loss, pred[i], data.y[i]);
      g_src[i] = losses::loss_grad(loss, src_pred[i], data.y[i]);
    }
    const double r_src = source_risk_of(beta);
    const double pen_slope =
        c1 * kappa / (std::sqrt(m) * lambda) +
        (rho > 0 ? c2 * kappa * std::sqrt(rho / (m * lambda)) /
                       (2.0 * std::sqrt(std::max(r_src, 1e-16)))
                 : 0.0);
    return S.transpose() * g_full / m + pen_slope * (S.transpose() * g_src / m) +
           2.0 * ridge * beta;
  }
};

}  // namespace

TuneResult tune_beta(const SourceEnsemble& ensemble, const Dataset& data,
                     const losses::LossSpec& loss,
                     const reg::RegularizerSpec& reg_w, double lambda, double rho,
                     const reg::RegularizerSpec& beta_reg,
                     const TuneOptions& options) {
  if (rho < 0) throw std::invalid_argument("tune_beta: rho must be >= 0");
  if (options.outer_iterations < 1)
    throw std::invalid_argument("tune_beta: iterations must be >= 1");

  const Eigen::MatrixXd S = source_matrix(ensemble, data);
  const int n = ensemble.n();
  const double m = static_cast<double>(data.rows());
  const double sigma = reg_w.sigma();
  const double kappa = loss.H / sigma;
  const double alpha = 1.0 / lambda;
  const double B = 1.0;
  const double C = std::sqrt(static_cast<double>(std::max(n, 1))) *
                   ensemble.output_bound;
  const double prefactor = 2.0 * 4.0 * std::sqrt(3.0 * loss.H) * (B + C) *
                           (1.0 + std::sqrt(2.0 * loss.H * B * B * alpha / sigma)) /
                           std::sqrt(sigma);
  TuneObjective obj{data,
                    loss,
                    lambda,
                    rho,
                    kappa,
                    options.c1 >= 0 ? options.c1 : prefactor,
                    options.c2 >= 0 ? options.c2 : prefactor,
                    options.tie_break_ridge,
                    S};

  // square loss + sq_l2: one covariance factorization serves every outer solve
  const bool closed_form = loss.name == losses::LossName::square &&
                           reg_w.name == reg::RegName::sq_l2;
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  if (closed_form) {
    Eigen::MatrixXd A = data.X.transpose() * data.X / m;
    A.diagonal().array() += lambda * reg_w.scale;
    ldlt.compute(A);
  }
  auto solve_w = [&](const Eigen::VectorXd& beta) -> Eigen::VectorXd {
    const Eigen::VectorXd offsets = S * beta;
    if (closed_form)
      return ldlt.solve(data.X.transpose() * (data.y - offsets) / m);
    return solver::solve_erm(data, loss, reg_w, lambda, offsets).w;
  };

  Eigen::VectorXd beta = ball_project(beta_reg, Eigen::VectorXd::Zero(n), rho);
  Eigen::VectorXd w = solve_w(beta);
  double best = obj.value(beta, w);
  if (!std::isfinite(best))
    throw std::runtime_error("tune_beta: non-finite objective at start");

  TuneResult result;
  result.objective_history.push_back(best);
  Eigen::VectorXd best_beta = beta, best_w = w;

  double beta_step = 1.0;
  for (int outer = 0; outer < options.outer_iterations; ++outer) {
    // (b) projected gradient on beta at fixed w
    for (int s = 0; s < options.beta_steps; ++s) {
      const Eigen::VectorXd g = obj.gradient(beta, w);
      bool moved = false;
      for (int bt = 0; bt < 40; ++bt) {
        const Eigen::VectorXd cand =
            ball_project(beta_reg, beta - beta_step * g, rho);
        if (obj.value(cand, w) < obj.value(beta, w) - 1e-15) {
          beta = cand;
          moved = true;
          beta_step *= 1.3;
          break;
        }
        beta_step *= 0.5;
      }
      if (!moved) break;
    }
    // (a) re-solve w for the new beta
    w = solve_w(beta);
    const double current = obj.value(beta, w);
    if (!std::isfinite(current))
      throw std::runtime_error("tune_beta: non-finite objective");
    if (current < best - 1e-15) {
      best = current;
      best_beta = beta;
      best_w = w;
      result.objective_history.push_back(best);
    } else {
      break;  // no accepted improvement
    }
  }

  result.combination.beta = best_beta;
  result.combination.rho = rho;
  result.combination.beta_reg = beta_reg;
  result.model.w = best_w;
  result.model.beta = best_beta;
  result.model.loss = loss;
  result.model.regularizer = reg_w;
  result.model.lambda = lambda;
  result.objective = best;
  return result;
}

}  // namespace htl::sources
