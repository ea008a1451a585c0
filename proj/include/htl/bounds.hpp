#ifndef HTL_BOUNDS_HPP
#define HTL_BOUNDS_HPP

#include <Eigen/Dense>

#include "htl/losses.hpp"
#include "htl/regularizers.hpp"
#include "htl/rng.hpp"

namespace htl::bounds {

// u(y) = (1 + y) log(1 + y) - y, the Bennett inversion kernel
double bennett_u(double y);
// solves u(a) = b by safeguarded Newton with a bisection fallback
double bennett_u_inverse(double b);
// 3b / (2 log(sqrt(b) + 1)); an upper bound on bennett_u_inverse(b)
double log_bound_cap(double b);

struct RademacherEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // zero when exact
  bool exact = false;
  long draws = 0;
};

// Empirical Rademacher complexity of the linear class {x -> <w,x> :
// Omega(w) <= radius} for an l2-ball regularizer; the inner supremum is
// closed-form per sign vector. Exact enumeration requires m <= 16.
RademacherEstimate empirical_rademacher_linear(const Eigen::MatrixXd& X,
                                               const reg::RegularizerSpec& spec,
                                               double radius, long draws, bool exact,
                                               Rng& rng);

// Finite class given by its value table (m x k): entry (i, j) is f_j(x_i).
// The inner supremum is a max over columns.
RademacherEstimate empirical_rademacher_finite(const Eigen::MatrixXd& values,
                                               long draws, bool exact, Rng& rng);

// Smooth-loss class surrogate E_eps sup_f (2 sqrt(3H)/m) sum_i eps_i
// sqrt(tau_i) f(x_i), evaluated over a finite class value table or the linear
// ball via the scaled sample {sqrt(tau_i) x_i}.
RademacherEstimate rademacher_smooth_surrogate_finite(const Eigen::MatrixXd& values,
                                                      double H,
                                                      const Eigen::VectorXd& tau,
                                                      long draws, bool exact,
                                                      Rng& rng);
RademacherEstimate rademacher_smooth_surrogate_linear(const Eigen::MatrixXd& X,
                                                      double H,
                                                      const Eigen::VectorXd& tau,
                                                      const reg::RegularizerSpec& spec,
                                                      double radius, long draws,
                                                      bool exact, Rng& rng);

// Inputs common to the explicit-constant bound evaluators.
struct BoundInputs {
  double H = 2.0;
  double sigma = 2.0;      // strong convexity of the w-regularizer
  double M = 1.0;          // uniform loss bound over the class
  long m = 1;              // sample size
  double lambda = 1.0;
  double rho = 0.0;        // budget on Omega(beta)
  double B = 1.0;          // feature-norm bound
  double C_src = 1.0;      // bound on ||f(x)|| for the source-output vector
  double eta = 0.0;        // confidence exponent
  double R_src_hat = 0.0;  // empirical (or plug-in) source risk
  double r = 0.0;          // uniform risk bound over the class

  double kappa() const { return H / sigma; }
  double alpha() const { return 1.0 / lambda; }
};

struct TauVector {
  Eigen::VectorXd tau;
  double r_bar = 0.0;  // (1/m) sum |tau_i|
};

// Per-example loss caps over the certified class:
// tau_i = l_i + sqrt((8 H B^2 alpha / sigma) R_hat l_i) + (H B^2 alpha / sigma) R_hat
TauVector tau_vector(const losses::LossSpec& loss,
                     const Eigen::VectorXd& source_predictions,
                     const Eigen::VectorXd& labels, double R_hat_src, double alpha,
                     double B, double sigma);

// 4 sqrt(3H) (B + C) (1 + sqrt(2 H B^2 alpha / sigma)) *
//   (R_hat sqrt(alpha) + sqrt(R_hat rho)) / sqrt(m sigma)
double rad_bound_smooth(const BoundInputs& inputs);

struct GenGapBound {
  double tight = 0.0;
  double relaxed = 0.0;
};

// Generalization-gap bound with v = 4 rad + r:
//   tight:   2 rad + 3 M eta / (m log(1 + sqrt(2 M eta / (v m))))
//   relaxed: 2 rad + 3 sqrt(v M eta / (2m)) + 3 M eta / (2m)
// The v = 0 singularity resolves to the analytic limit (zero confidence term).
GenGapBound gen_gap_bound(double rad, const BoundInputs& inputs);

// Z = kappa sqrt(R_src/m) (sqrt(R_src) + sqrt(rho))
double excess_risk_z(const BoundInputs& inputs);
// lambda* = sqrt(Z/tau + (1/tau) sqrt(Z M eta / m))
double excess_lambda_star(const BoundInputs& inputs, double tau_class);
// explicit excess-risk gap chain at lambda*
double excess_gap_bound(const BoundInputs& inputs, double tau_class);

struct ComparisonBounds {
  double worst_case = 0.0;        // sqrt(2M/(m lambda sigma)) + sqrt(2 rho/(m sigma))
  double localized_r_star = 0.0;  // L(L+1)/(m lambda sigma) + L sqrt(2 rho/(m sigma))
  double loglog_term = 0.0;       // 20 M (eta + 6 log log m) / m
  double localized_risk = 0.0;    // larger root of the implicit inequality in E
  double localized_gap = 0.0;     // localized_risk - R_hat
};

ComparisonBounds comparison_bounds(const BoundInputs& inputs, double L_lipschitz,
                                   double R_hat = 0.0);

// larger root of E <= R_hat + 45 r* + sqrt(8 r* E) + sqrt(4 M L E / m) + 20 M L / m
// where L = eta + 6 log log m
double localized_risk_solution(double R_hat, double r_star, double M, double eta,
                               long m);

}  // namespace htl::bounds

#endif  // HTL_BOUNDS_HPP
