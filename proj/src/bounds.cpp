#include "htl/bounds.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace htl::bounds {

double bennett_u(double y) {
  if (y < 0) throw std::invalid_argument("bennett_u: negative input");
  return (1.0 + y) * std::log1p(y) - y;
}

double log_bound_cap(double b) {
  if (b <= 0) throw std::invalid_argument("log_bound_cap: input must be positive");
  return 3.0 * b / (2.0 * std::log1p(std::sqrt(b)));
}

double bennett_u_inverse(double b) {
  if (b < 0) throw std::invalid_argument("bennett_u_inverse: negative input");
  if (b == 0) return 0.0;
  const double tol = 1e-12 * std::max(1.0, b);
  // u is convex increasing with u(0) = 0; the cap is a guaranteed upper bound
  double hi = log_bound_cap(b);
  double lo = 0.0;
  double a = hi;  // Newton from above stays above the root for a convex u
  for (int it = 0; it < 60; ++it) {
    const double f = bennett_u(a) - b;
    if (std::abs(f) <= tol) return a;
    if (f > 0)
      hi = a;
    else
      lo = a;
    const double deriv = std::log1p(a);
    double next = deriv > 0 ? a - f / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection safeguard
    a = next;
  }
  return a;
}

namespace {

// mean +/- standard error over Monte Carlo sign draws, or the exact 2^m average
RademacherEstimate sweep_signs(Eigen::Index m, long draws, bool exact, Rng& rng,
                               const std::function<double(const Eigen::VectorXd&)>& sup) {
  RademacherEstimate est;
  if (exact) {
    if (m > 16)
      throw std::invalid_argument("exact Rademacher enumeration requires m <= 16");
    const long total = 1L << m;
    double acc = 0.0;
    Eigen::VectorXd eps(m);
    for (long mask = 0; mask < total; ++mask) {
      for (Eigen::Index i = 0; i < m; ++i)
        eps[i] = (mask >> i) & 1 ? 1.0 : -1.0;
      acc += sup(eps);
    }
    est.mean = acc / static_cast<double>(total);
    est.exact = true;
    est.draws = total;
    return est;
  }
  if (draws < 1) throw std::invalid_argument("draws must be >= 1");
  double acc = 0.0, acc2 = 0.0;
  for (long t = 0; t < draws; ++t) {
    const double v = sup(rng.rademacher_vector(m));
    acc += v;
    acc2 += v * v;
  }
  const double n = static_cast<double>(draws);
  est.mean = acc / n;
  const double var = std::max(0.0, acc2 / n - est.mean * est.mean);
  est.std_error = draws > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  est.draws = draws;
  return est;
}

double linear_ball_sup_scale(const reg::RegularizerSpec& spec, double radius) {
  if (spec.name != reg::RegName::sq_l2)
    throw std::invalid_argument(
        "closed-form linear supremum requires an sq_l2 regularizer");
  return std::sqrt(radius / spec.scale);  // sup over Omega(w) <= radius of <w, g>/||g||
}

}  // namespace

RademacherEstimate empirical_rademacher_linear(const Eigen::MatrixXd& X,
                                               const reg::RegularizerSpec& spec,
                                               double radius, long draws, bool exact,
                                               Rng& rng) {
  const double scale = linear_ball_sup_scale(spec, radius);
  const double m = static_cast<double>(X.rows());
  return sweep_signs(X.rows(), draws, exact, rng,
                     [&](const Eigen::VectorXd& eps) {
                       return scale * (X.transpose() * eps).norm() / m;
                     });
}

RademacherEstimate empirical_rademacher_finite(const Eigen::MatrixXd& values,
                                               long draws, bool exact, Rng& rng) {
  const double m = static_cast<double>(values.rows());
  return sweep_signs(values.rows(), draws, exact, rng,
                     [&](const Eigen::VectorXd& eps) {
                       return (values.transpose() * eps).maxCoeff() / m;
                     });
}

RademacherEstimate rademacher_smooth_surrogate_finite(const Eigen::MatrixXd& values,
                                                      double H,
                                                      const Eigen::VectorXd& tau,
                                                      long draws, bool exact,
                                                      Rng& rng) {
  if (tau.size() != values.rows())
    throw std::invalid_argument("tau size does not match sample size");
  const Eigen::MatrixXd scaled =
      tau.array().sqrt().matrix().asDiagonal() * values;
  const double factor = 2.0 * std::sqrt(3.0 * H);
  const double m = static_cast<double>(values.rows());
  return sweep_signs(values.rows(), draws, exact, rng,
                     [&](const Eigen::VectorXd& eps) {
                       return factor * (scaled.transpose() * eps).maxCoeff() / m;
                     });
}

RademacherEstimate rademacher_smooth_surrogate_linear(const Eigen::MatrixXd& X,
                                                      double H,
                                                      const Eigen::VectorXd& tau,
                                                      const reg::RegularizerSpec& spec,
                                                      double radius, long draws,
                                                      bool exact, Rng& rng) {
  if (tau.size() != X.rows())
    throw std::invalid_argument("tau size does not match sample size");
  const Eigen::MatrixXd scaled = tau.array().sqrt().matrix().asDiagonal() * X;
  const double scale = linear_ball_sup_scale(spec, radius);
  const double factor = 2.0 * std::sqrt(3.0 * H);
  const double m = static_cast<double>(X.rows());
  return sweep_signs(X.rows(), draws, exact, rng,
                     [&](const Eigen::VectorXd& eps) {
                       return factor * scale * (scaled.transpose() * eps).norm() / m;
                     });
}

TauVector tau_vector(const losses::LossSpec& loss,
                     const Eigen::VectorXd& source_predictions,
                     const Eigen::VectorXd& labels, double R_hat_src, double alpha,
                     double B, double sigma) {
  if (alpha < 0 || R_hat_src < 0)
    throw std::invalid_argument("tau_vector: alpha and R_hat_src must be >= 0");
  if (source_predictions.size() != labels.size())
    throw std::invalid_argument("tau_vector: size mismatch");
  const double c = loss.H * B * B * alpha / sigma;
  TauVector out;
  out.tau.resize(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const double li = losses::loss_value(loss, source_predictions[i], labels[i]);
    out.tau[i] = li + std::sqrt(8.0 * c * R_hat_src * li) + c * R_hat_src;
  }
  out.r_bar = out.tau.cwiseAbs().mean();
  return out;
}

double rad_bound_smooth(const BoundInputs& in) {
  const double a = in.alpha();
  const double lead = 4.0 * std::sqrt(3.0 * in.H) * (in.B + in.C_src) *
                      (1.0 + std::sqrt(2.0 * in.H * in.B * in.B * a / in.sigma));
  return lead * (in.R_src_hat * std::sqrt(a) + std::sqrt(in.R_src_hat * in.rho)) /
         std::sqrt(static_cast<double>(in.m) * in.sigma);
}

GenGapBound gen_gap_bound(double rad, const BoundInputs& in) {
  if (rad < 0 || in.r < 0)
    throw std::invalid_argument("gen_gap_bound: rad and r must be >= 0");
  const double v = 4.0 * rad + in.r;
  const double m = static_cast<double>(in.m);
  GenGapBound out;
  out.tight = 2.0 * rad;
  out.relaxed = 2.0 * rad;
  if (in.eta <= 0) return out;
  // v = 0 with eta > 0: the log argument diverges and the confidence term has
  // analytic limit 0 (the perfect-source collapse)
  if (v > 0) {
    out.tight +=
        3.0 * in.M * in.eta / (m * std::log1p(std::sqrt(2.0 * in.M * in.eta / (v * m))));
    out.relaxed += 3.0 * std::sqrt(v * in.M * in.eta / (2.0 * m)) +
                   3.0 * in.M * in.eta / (2.0 * m);
  }
  return out;
}

double excess_risk_z(const BoundInputs& in) {
  const double m = static_cast<double>(in.m);
  return in.kappa() * std::sqrt(in.R_src_hat / m) *
         (std::sqrt(in.R_src_hat) + std::sqrt(in.rho));
}

double excess_lambda_star(const BoundInputs& in, double tau_class) {
  if (tau_class <= 0)
    throw std::invalid_argument("excess_lambda_star: tau must be positive");
  const double Z = excess_risk_z(in);
  const double m = static_cast<double>(in.m);
  return std::sqrt(Z / tau_class +
                   std::sqrt(Z * in.M * in.eta / m) / tau_class);
}

double excess_gap_bound(const BoundInputs& in, double tau_class) {
  if (tau_class <= 0)
    throw std::invalid_argument("excess_gap_bound: tau must be positive");
  const double Z = excess_risk_z(in);
  const double m = static_cast<double>(in.m);
  const double bern = std::sqrt(Z * in.M * in.eta / m);
  return std::sqrt(tau_class) * std::sqrt(Z + bern) +
         std::sqrt(in.R_src_hat * in.M * in.eta / m) + in.M * in.eta / m +
         2.0 * std::sqrt(in.R_src_hat * in.M * in.eta / m) +
         2.0 * in.M * in.eta / (3.0 * m);
}

double localized_risk_solution(double R_hat, double r_star, double M, double eta,
                               long m) {
  if (m < 3) throw std::invalid_argument("localized bound requires m >= 3");
  const double mm = static_cast<double>(m);
  const double L = eta + 6.0 * std::log(std::log(mm));
  const double q = std::sqrt(8.0 * r_star) + std::sqrt(4.0 * M * L / mm);
  const double c = R_hat + 45.0 * r_star + 20.0 * M * L / mm;
  const double root = 0.5 * (q + std::sqrt(q * q + 4.0 * c));
  return root * root;
}

ComparisonBounds comparison_bounds(const BoundInputs& in, double L_lipschitz,
                                   double R_hat) {
  if (in.m < 3) throw std::invalid_argument("comparison_bounds: m must be >= 3");
  const double m = static_cast<double>(in.m);
  ComparisonBounds out;
  out.worst_case = std::sqrt(2.0 * in.M / (m * in.lambda * in.sigma)) +
                   std::sqrt(2.0 * in.rho / (m * in.sigma));
  out.localized_r_star =
      L_lipschitz * (L_lipschitz + 1.0) / (m * in.lambda * in.sigma) +
      L_lipschitz * std::sqrt(2.0 * in.rho / (m * in.sigma));
  out.loglog_term = 20.0 * in.M * (in.eta + 6.0 * std::log(std::log(m))) / m;
  out.localized_risk =
      localized_risk_solution(R_hat, out.localized_r_star, in.M, in.eta, in.m);
  out.localized_gap = out.localized_risk - R_hat;
  return out;
}

}  // namespace htl::bounds
