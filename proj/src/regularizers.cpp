#include "htl/regularizers.hpp"

#include <cmath>
#include <stdexcept>

namespace htl::reg {

RegularizerSpec make_sq_l2(double scale) {
  if (scale <= 0) throw std::invalid_argument("sq_l2: scale must be positive");
  return {RegName::sq_l2, scale, 0.0, {}};
}

RegularizerSpec make_biased_sq_l2(double scale, Eigen::VectorXd center) {
  if (scale <= 0) throw std::invalid_argument("biased_sq_l2: scale must be positive");
  return {RegName::biased_sq_l2, scale, 0.0, std::move(center)};
}

RegularizerSpec make_elastic(double scale, double scale1) {
  if (scale < 0) throw std::invalid_argument("elastic: scale must be non-negative");
  if (scale1 < 0) throw std::invalid_argument("elastic: scale1 must be non-negative");
  return {RegName::elastic, scale, scale1, {}};
}

RegularizerSpec make_reg(const std::string& name, double scale, double scale1,
                         Eigen::VectorXd center) {
  if (name == "sq_l2") return make_sq_l2(scale);
  if (name == "biased_sq_l2") return make_biased_sq_l2(scale, std::move(center));
  if (name == "elastic") return make_elastic(scale, scale1);
  throw std::invalid_argument("unknown regularizer: " + name);
}

std::string reg_name(const RegularizerSpec& spec) {
  switch (spec.name) {
    case RegName::sq_l2:
      return "sq_l2";
    case RegName::biased_sq_l2:
      return "biased_sq_l2";
    case RegName::elastic:
      return "elastic";
  }
  return "?";
}

namespace {

void check_center(const RegularizerSpec& spec, Eigen::Index d) {
  if (spec.name == RegName::biased_sq_l2 && spec.center.size() > 0 &&
      spec.center.size() != d)
    throw std::invalid_argument("regularizer center dimension mismatch");
}

Eigen::VectorXd centered(const RegularizerSpec& spec, const Eigen::VectorXd& w) {
  if (spec.name == RegName::biased_sq_l2 && spec.center.size() > 0)
    return w - spec.center;
  return w;
}

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace

double reg_value(const RegularizerSpec& spec, const Eigen::VectorXd& w) {
  check_center(spec, w.size());
  const Eigen::VectorXd u = centered(spec, w);
  double v = spec.scale * u.squaredNorm();
  if (spec.name == RegName::elastic) v += spec.scale1 * u.lpNorm<1>();
  return v;
}

Eigen::VectorXd reg_grad(const RegularizerSpec& spec, const Eigen::VectorXd& w) {
  check_center(spec, w.size());
  const Eigen::VectorXd u = centered(spec, w);
  Eigen::VectorXd g = 2.0 * spec.scale * u;
  if (spec.name == RegName::elastic)
    g += spec.scale1 * u.unaryExpr([](double x) {
      return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
    });
  return g;
}

Eigen::VectorXd reg_prox(const RegularizerSpec& spec, const Eigen::VectorXd& v,
                         double step) {
  if (step <= 0) throw std::invalid_argument("reg_prox: step must be positive");
  check_center(spec, v.size());
  const double shrink = 1.0 / (1.0 + 2.0 * spec.scale * step);
  switch (spec.name) {
    case RegName::sq_l2:
      return shrink * v;
    case RegName::biased_sq_l2:
      return spec.center.size() > 0
                 ? Eigen::VectorXd(spec.center + shrink * (v - spec.center))
                 : Eigen::VectorXd(shrink * v);
    case RegName::elastic: {
      const double t = step * spec.scale1;
      Eigen::VectorXd out = v.unaryExpr([t](double x) { return soft_threshold(x, t); });
      return shrink * out;
    }
  }
  return v;
}

Eigen::VectorXd ball_project(const RegularizerSpec& spec, const Eigen::VectorXd& w,
                             double radius) {
  if (radius < 0) throw std::invalid_argument("ball_project: radius must be >= 0");
  check_center(spec, w.size());
  if (reg_value(spec, w) <= radius) return w;
  if (spec.name != RegName::elastic) {
    const Eigen::VectorXd u = centered(spec, w);
    const double omega = spec.scale * u.squaredNorm();
    const Eigen::VectorXd scaled = std::sqrt(radius / omega) * u;
    return spec.name == RegName::biased_sq_l2 && spec.center.size() > 0
               ? Eigen::VectorXd(spec.center + scaled)
               : scaled;
  }
  // elastic: the projection is prox_{mu * Omega}(w) for the multiplier mu >= 0
  // with Omega(prox) = radius; Omega(prox_{mu}) is continuous and decreasing
  // in mu, so bisect.
  double lo = 0.0, hi = 1.0;
  while (reg_value(spec, reg_prox(spec, w, hi)) > radius) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (reg_value(spec, reg_prox(spec, w, mid)) > radius)
      lo = mid;
    else
      hi = mid;
  }
  return reg_prox(spec, w, hi);
}

}  // namespace htl::reg
