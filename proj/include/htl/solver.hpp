#ifndef HTL_SOLVER_HPP
#define HTL_SOLVER_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "htl/dataset.hpp"
#include "htl/losses.hpp"
#include "htl/regularizers.hpp"

namespace htl::solver {

// Learned target predictor: h(x) = <w, x> + sum_i beta_i h_src_i(x).
struct TargetModel {
  Eigen::VectorXd w;
  Eigen::VectorXd beta;
  losses::LossSpec loss;
  reg::RegularizerSpec regularizer;
  double lambda = 0.0;
};

struct TrainReport {
  double final_objective = 0.0;
  double empirical_risk = 0.0;         // R_hat(h_{w,beta})
  double source_empirical_risk = 0.0;  // R_hat(h_src_beta)
  double reg_value = 0.0;              // Omega(w_hat)
  long iterations = 0;
  double grad_mapping_norm = 0.0;
  bool converged = false;
  // empirical risk does not exceed the source's (w = 0 is feasible)
  bool certificate_a = false;
  // Omega(w_hat) <= R_hat(h_src_beta) / lambda
  bool certificate_b = false;
};

struct SolveResult {
  Eigen::VectorXd w;
  TrainReport report;
};

struct SolverOptions {
  long max_iterations = 100000;
  double grad_mapping_tol = 1e-8;
  double stall_tol = 1e-12;
  int stall_window = 10;
  bool accelerated = false;
};

// Raised when the iteration cap is hit; carries the best iterate.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolveResult best)
      : std::runtime_error(what), best_iterate(std::move(best)) {}
  SolveResult best_iterate;
};

// Minimizes (1/m) sum_i loss(<w, x_i> + offsets_i, y_i) + lambda * Omega(w)
// by proximal gradient with backtracking, started at w = 0.
SolveResult solve_erm(const Dataset& data, const losses::LossSpec& loss,
                      const reg::RegularizerSpec& regularizer, double lambda,
                      const Eigen::VectorXd& offsets,
                      const SolverOptions& options = {});

// Square loss + sq_l2 special case, solved exactly:
// ((1/m) X'X + lambda * scale * I) w = (1/m) X'(y - offsets)
Eigen::VectorXd solve_ridge_closed_form(const Dataset& data, double lambda,
                                        const Eigen::VectorXd& offsets,
                                        double reg_scale = 1.0);

struct BiasedLsResult {
  Eigen::VectorXd w_biased;   // direct solve of the biased-regularization problem
  Eigen::VectorXd w_reparam;  // offset reparameterization, mapped back
};

// Solves min (1/m)||Xw - y||^2 + lambda ||w - W_src beta||^2 two ways: directly
// and through the offset form with w' = w - W_src beta. The two must agree.
BiasedLsResult biased_ls_equivalence(const Dataset& data, double lambda,
                                     const Eigen::MatrixXd& W_src,
                                     const Eigen::VectorXd& beta);

double objective_value(const Dataset& data, const losses::LossSpec& loss,
                       const reg::RegularizerSpec& regularizer, double lambda,
                       const Eigen::VectorXd& offsets, const Eigen::VectorXd& w);

double empirical_risk(const Dataset& data, const losses::LossSpec& loss,
                      const Eigen::VectorXd& offsets, const Eigen::VectorXd& w);

// |<w,x> + h_src_beta(x)| <= sqrt(2 Omega(w)/sigma) ||x|| + output_bound * ||beta||_1
double prediction_magnitude_bound(double reg_value_w, double sigma,
                                  const Eigen::VectorXd& beta, double output_bound,
                                  double feature_bound = 1.0);

}  // namespace htl::solver

#endif  // HTL_SOLVER_HPP
