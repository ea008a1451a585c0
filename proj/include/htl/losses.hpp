#ifndef HTL_LOSSES_HPP
#define HTL_LOSSES_HPP

#include <string>

namespace htl::losses {

enum class LossName { square, squared_hinge, logistic };

// An H-smooth non-negative loss: the derivative in the prediction argument is
// H-Lipschitz. H is stored analytically per loss, never estimated.
struct LossSpec {
  LossName name;
  double H;

  // Uniform loss bound M over |prediction| <= P, |label| <= C.
  double range_bound(double P, double C) const;
};

LossSpec make_loss(LossName name);
LossSpec make_loss(const std::string& name);
std::string loss_name(const LossSpec& spec);

double loss_value(const LossSpec& spec, double prediction, double label);
double loss_grad(const LossSpec& spec, double prediction, double label);

// Checks |phi(x) - phi(z)| <= sqrt(6 H (phi(x) + phi(z))) |x - z| for the
// smooth non-negative function phi(t) = loss(t, label).
struct SmoothDiffCheck {
  bool holds;
  double lhs;
  double rhs;
};
SmoothDiffCheck smooth_diff_bound_check(const LossSpec& spec, double x, double z,
                                        double label);

}  // namespace htl::losses

#endif  // HTL_LOSSES_HPP
