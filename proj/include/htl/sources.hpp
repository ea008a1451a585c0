#ifndef HTL_SOURCES_HPP
#define HTL_SOURCES_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "htl/dataset.hpp"
#include "htl/losses.hpp"
#include "htl/regularizers.hpp"
#include "htl/solver.hpp"

namespace htl::sources {

// A black-box source hypothesis: either a linear model or a frozen prediction
// table aligned to a dataset by row index.
struct Source {
  enum class Kind { linear, table };
  Kind kind = Kind::linear;
  Eigen::VectorXd w;            // linear
  std::string dataset_id;       // table
  Eigen::VectorXd predictions;  // table
};

struct SourceEnsemble {
  std::vector<Source> sources;
  double output_bound = 1.0;  // >= sup_i ||h_src_i||_inf over the data

  int n() const { return static_cast<int>(sources.size()); }
};

struct SourceCombination {
  Eigen::VectorXd beta;
  double rho = 0.0;               // budget: Omega(beta) <= rho
  reg::RegularizerSpec beta_reg;  // Omega for beta
};

// m x n matrix of per-row source predictions. Table sources must match the
// dataset length; if both ids are non-empty they must agree.
Eigen::MatrixXd source_matrix(const SourceEnsemble& ensemble, const Dataset& data,
                              const std::string& dataset_id = "");

// h_src_beta on an explicit feature vector (linear sources only)
double combine_predict(const SourceEnsemble& ensemble, const SourceCombination& comb,
                       const Eigen::VectorXd& x);
// h_src_beta on dataset row i (any source kind)
double combine_predict(const SourceEnsemble& ensemble, const SourceCombination& comb,
                       const Dataset& data, Eigen::Index i);

// (1/m) sum_i loss(h_src_beta(x_i), y_i)
double source_risk(const SourceEnsemble& ensemble, const SourceCombination& comb,
                   const Dataset& data, const losses::LossSpec& loss);

// Full-model prediction h(x) = <w, x> + h_src_beta(x)
double predict(const solver::TargetModel& model, const SourceEnsemble& ensemble,
               const Eigen::VectorXd& x);
double predict(const solver::TargetModel& model, const SourceEnsemble& ensemble,
               const Dataset& data, Eigen::Index i);
// mean loss of the model over the sample
double risk_estimate(const solver::TargetModel& model, const SourceEnsemble& ensemble,
                     const Dataset& data, const losses::LossSpec& loss);

struct TuneOptions {
  int outer_iterations = 30;
  int beta_steps = 20;       // projected-gradient steps per outer iteration
  double c1 = -1.0;          // bound-term constants; < 0 means derive from inputs
  double c2 = -1.0;
  double tie_break_ridge = 1e-10;
};

struct TuneResult {
  SourceCombination combination;
  solver::TargetModel model;
  double objective = 0.0;
  std::vector<double> objective_history;  // accepted outer iterations
};

// Alternating minimization of the tuning objective
//   R_hat(h_{w,beta}) + c1 kappa R_hat(h_src_beta) / (sqrt(m) lambda)
//                     + c2 sqrt(kappa^2 rho R_hat(h_src_beta) / (m lambda))
// over Omega(beta) <= rho (projected gradient) and w (inner ERM solve). For the
// square loss the inner solve reuses a single factorization of the data
// covariance across all outer iterations.
TuneResult tune_beta(const SourceEnsemble& ensemble, const Dataset& data,
                     const losses::LossSpec& loss,
                     const reg::RegularizerSpec& reg_w, double lambda, double rho,
                     const reg::RegularizerSpec& beta_reg,
                     const TuneOptions& options = {});

}  // namespace htl::sources

#endif  // HTL_SOURCES_HPP
