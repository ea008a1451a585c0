#include "htl/solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

namespace htl::solver {

double empirical_risk(const Dataset& data, const losses::LossSpec& loss,
                      const Eigen::VectorXd& offsets, const Eigen::VectorXd& w) {
  const Eigen::Index m = data.rows();
  if (offsets.size() != m) throw std::invalid_argument("offsets size mismatch");
  const Eigen::VectorXd pred = data.X * w + offsets;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    acc += losses::loss_value(loss, pred[i], data.y[i]);
  return acc / static_cast<double>(m);
}

double objective_value(const Dataset& data, const losses::LossSpec& loss,
                       const reg::RegularizerSpec& regularizer, double lambda,
                       const Eigen::VectorXd& offsets, const Eigen::VectorXd& w) {
  return empirical_risk(data, loss, offsets, w) + lambda * reg_value(regularizer, w);
}

namespace {

Eigen::VectorXd risk_gradient(const Dataset& data, const losses::LossSpec& loss,
                              const Eigen::VectorXd& offsets,
                              const Eigen::VectorXd& w, double* risk_out = nullptr) {
  const Eigen::Index m = data.rows();
  const Eigen::VectorXd pred = data.X * w + offsets;
  Eigen::VectorXd g(m);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    g[i] = losses::loss_grad(loss, pred[i], data.y[i]);
    if (risk_out) acc += losses::loss_value(loss, pred[i], data.y[i]);
  }
  if (risk_out) *risk_out = acc / static_cast<double>(m);
  return data.X.transpose() * g / static_cast<double>(m);
}

}  // namespace

SolveResult solve_erm(const Dataset& data, const losses::LossSpec& loss,
                      const reg::RegularizerSpec& regularizer, double lambda,
                      const Eigen::VectorXd& offsets, const SolverOptions& options) {
  if (lambda <= 0) throw std::invalid_argument("solve_erm: lambda must be positive");
  if (offsets.size() != data.rows())
    throw std::invalid_argument("solve_erm: offsets size mismatch");

  const Eigen::Index d = data.dim();
  double max_row_sq = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    max_row_sq = std::max(max_row_sq, data.X.row(i).squaredNorm());

  const double sigma = regularizer.sigma();
  double step = 1.0 / (loss.H * max_row_sq + lambda * sigma);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double fw = 0.0;
  Eigen::VectorXd grad = risk_gradient(data, loss, offsets, w, &fw);
  double obj = fw + lambda * reg_value(regularizer, w);

  Eigen::VectorXd momentum = w;  // accelerated variant extrapolation point
  double t_acc = 1.0;

  double grad_map_norm = std::numeric_limits<double>::infinity();
  int stall = 0;
  long it = 0;
  for (; it < options.max_iterations; ++it) {
    const Eigen::VectorXd& base = options.accelerated ? momentum : w;
    double f_base = fw;
    Eigen::VectorXd g_base = grad;
    if (options.accelerated) g_base = risk_gradient(data, loss, offsets, base, &f_base);

    // backtracking on the smooth part
    Eigen::VectorXd w_next;
    double f_next = 0.0;
    for (;;) {
      w_next = reg_prox(regularizer, base - step * g_base, step * lambda);
      const Eigen::VectorXd diff = w_next - base;
      f_next = empirical_risk(data, loss, offsets, w_next);
      const double quad =
          f_base + g_base.dot(diff) + diff.squaredNorm() / (2.0 * step);
      if (f_next <= quad + 1e-15 * std::max(1.0, std::abs(quad))) break;
      step *= 0.5;
      if (step < 1e-18) break;
    }
    const double obj_next = f_next + lambda * reg_value(regularizer, w_next);
    if (std::isnan(obj_next))
      throw std::runtime_error("solve_erm: objective is NaN");

    grad_map_norm = (base - w_next).norm() / step;

    if (options.accelerated) {
      if (obj_next > obj) {  // restart on non-monotone step
        momentum = w;
        t_acc = 1.0;
        continue;
      }
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
      momentum = w_next + ((t_acc - 1.0) / t_next) * (w_next - w);
      t_acc = t_next;
    }

    const double rel_dec = (obj - obj_next) / std::max(1.0, std::abs(obj));
    w = w_next;
    fw = f_next;
    obj = obj_next;
    if (!options.accelerated) grad = risk_gradient(data, loss, offsets, w);

    if (grad_map_norm <= options.grad_mapping_tol) {
      ++it;
      break;
    }
    stall = rel_dec < options.stall_tol ? stall + 1 : 0;
    if (stall >= options.stall_window) {
      ++it;
      break;
    }
  }

  SolveResult result;
  result.w = w;
  TrainReport& rep = result.report;
  rep.iterations = it;
  rep.grad_mapping_norm = grad_map_norm;
  rep.final_objective = obj;
  rep.empirical_risk = fw;
  rep.reg_value = reg_value(regularizer, w);
  rep.source_empirical_risk =
      empirical_risk(data, loss, offsets, Eigen::VectorXd::Zero(d));
  rep.converged = grad_map_norm <= options.grad_mapping_tol ||
                  stall >= options.stall_window;
  rep.certificate_a = rep.empirical_risk <= rep.source_empirical_risk + 1e-9;
  rep.certificate_b = rep.reg_value <= rep.source_empirical_risk / lambda + 1e-9;

  if (!rep.converged)
    throw SolverError("solve_erm: iteration cap reached (grad mapping norm " +
                          std::to_string(grad_map_norm) + ")",
                      std::move(result));
  return result;
}

Eigen::VectorXd solve_ridge_closed_form(const Dataset& data, double lambda,
                                        const Eigen::VectorXd& offsets,
                                        double reg_scale) {
  if (lambda <= 0) throw std::invalid_argument("ridge: lambda must be positive");
  if (offsets.size() != data.rows())
    throw std::invalid_argument("ridge: offsets size mismatch");
  const double m = static_cast<double>(data.rows());
  const Eigen::Index d = data.dim();
  Eigen::MatrixXd A = data.X.transpose() * data.X / m;
  A.diagonal().array() += lambda * reg_scale;
  const Eigen::VectorXd b = data.X.transpose() * (data.y - offsets) / m;
  return A.ldlt().solve(b);
}

BiasedLsResult biased_ls_equivalence(const Dataset& data, double lambda,
                                     const Eigen::MatrixXd& W_src,
                                     const Eigen::VectorXd& beta) {
  if (W_src.rows() != data.dim())
    throw std::invalid_argument("biased_ls: W_src row dimension mismatch");
  if (W_src.cols() != beta.size())
    throw std::invalid_argument("biased_ls: beta size mismatch");
  const Eigen::VectorXd prior = W_src * beta;
  const double m = static_cast<double>(data.rows());

  // direct: normal equations of (1/m)||Xw - y||^2 + lambda ||w - prior||^2
  Eigen::MatrixXd A = data.X.transpose() * data.X / m;
  A.diagonal().array() += lambda;
  const Eigen::VectorXd b = data.X.transpose() * data.y / m + lambda * prior;
  BiasedLsResult result;
  result.w_biased = A.ldlt().solve(b);

  // reparameterized: w' minimizes the HTL objective with offsets X * prior
  const Eigen::VectorXd offsets = data.X * prior;
  const Eigen::VectorXd w_prime = solve_ridge_closed_form(data, lambda, offsets);
  result.w_reparam = w_prime + prior;
  return result;
}

double prediction_magnitude_bound(double reg_value_w, double sigma,
                                  const Eigen::VectorXd& beta, double output_bound,
                                  double feature_bound) {
  return std::sqrt(2.0 * reg_value_w / sigma) * feature_bound +
         output_bound * beta.lpNorm<1>();
}

}  // namespace htl::solver
