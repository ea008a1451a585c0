#include "htl/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace htl::losses {

LossSpec make_loss(LossName name) {
  switch (name) {
    case LossName::square:
      return {LossName::square, 2.0};
    case LossName::squared_hinge:
      return {LossName::squared_hinge, 2.0};
    case LossName::logistic:
      return {LossName::logistic, 0.25};
  }
  throw std::invalid_argument("unknown loss");
}

LossSpec make_loss(const std::string& name) {
  if (name == "square") return make_loss(LossName::square);
  if (name == "squared_hinge") return make_loss(LossName::squared_hinge);
  if (name == "logistic") return make_loss(LossName::logistic);
  throw std::invalid_argument("unknown loss name: " + name);
}

std::string loss_name(const LossSpec& spec) {
  switch (spec.name) {
    case LossName::square:
      return "square";
    case LossName::squared_hinge:
      return "squared_hinge";
    case LossName::logistic:
      return "logistic";
  }
  return "?";
}

double LossSpec::range_bound(double P, double C) const {
  switch (name) {
    case LossName::square:
      return (P + C) * (P + C);
    case LossName::squared_hinge: {
      const double a = 1.0 + P * C;
      return a * a;
    }
    case LossName::logistic:
      return std::log1p(std::exp(P * C));
  }
  return 0.0;
}

namespace {

void check_finite(double prediction, double label) {
  if (!std::isfinite(prediction) || !std::isfinite(label))
    throw std::domain_error("loss: non-finite input");
}

// stable log(1 + exp(z))
double softplus(double z) {
  if (z > 0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

}  // namespace

double loss_value(const LossSpec& spec, double prediction, double label) {
  check_finite(prediction, label);
  switch (spec.name) {
    case LossName::square: {
      const double r = prediction - label;
      return r * r;
    }
    case LossName::squared_hinge: {
      const double g = 1.0 - prediction * label;
      return g > 0 ? g * g : 0.0;
    }
    case LossName::logistic:
      return softplus(-prediction * label);
  }
  return 0.0;
}

double loss_grad(const LossSpec& spec, double prediction, double label) {
  check_finite(prediction, label);
  switch (spec.name) {
    case LossName::square:
      return 2.0 * (prediction - label);
    case LossName::squared_hinge: {
      const double g = 1.0 - prediction * label;
      return g > 0 ? -2.0 * g * label : 0.0;
    }
    case LossName::logistic: {
      // d/dt log(1 + exp(-t y)) = -y / (1 + exp(t y))
      const double z = prediction * label;
      return -label / (1.0 + std::exp(z));
    }
  }
  return 0.0;
}

SmoothDiffCheck smooth_diff_bound_check(const LossSpec& spec, double x, double z,
                                        double label) {
  const double px = loss_value(spec, x, label);
  const double pz = loss_value(spec, z, label);
  const double lhs = std::abs(px - pz);
  const double rhs = std::sqrt(6.0 * spec.H * (px + pz)) * std::abs(x - z);
  return {lhs <= rhs + 1e-12, lhs, rhs};
}

}  // namespace htl::losses
