#ifndef HTL_REGULARIZERS_HPP
#define HTL_REGULARIZERS_HPP

#include <Eigen/Dense>
#include <string>

namespace htl::reg {

enum class RegName { sq_l2, biased_sq_l2, elastic };

// A sigma-strongly convex penalty w.r.t. the l2 norm, non-negative and
// minimized at `center` (the zero vector unless biased).
struct RegularizerSpec {
  RegName name = RegName::sq_l2;
  double scale = 1.0;   // quadratic coefficient
  double scale1 = 0.0;  // l1 coefficient (elastic only)
  Eigen::VectorXd center;  // biased_sq_l2 only; empty means zero

  // strong-convexity modulus w.r.t. l2
  double sigma() const { return 2.0 * scale; }
};

RegularizerSpec make_sq_l2(double scale = 1.0);
RegularizerSpec make_biased_sq_l2(double scale, Eigen::VectorXd center);
RegularizerSpec make_elastic(double scale, double scale1);
RegularizerSpec make_reg(const std::string& name, double scale, double scale1 = 0.0,
                         Eigen::VectorXd center = {});
std::string reg_name(const RegularizerSpec& spec);

double reg_value(const RegularizerSpec& spec, const Eigen::VectorXd& w);

// gradient of the smooth (quadratic) part plus l1 subgradient at w where defined
Eigen::VectorXd reg_grad(const RegularizerSpec& spec, const Eigen::VectorXd& w);

// argmin_w { 1/2 ||w - v||^2 + step * Omega(w) }
Eigen::VectorXd reg_prox(const RegularizerSpec& spec, const Eigen::VectorXd& v,
                         double step);

// Closest point (in l2) with Omega(.) <= radius; identity when already feasible.
Eigen::VectorXd ball_project(const RegularizerSpec& spec, const Eigen::VectorXd& w,
                             double radius);

}  // namespace htl::reg

#endif  // HTL_REGULARIZERS_HPP
