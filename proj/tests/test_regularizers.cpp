#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "htl/regularizers.hpp"
#include "htl/rng.hpp"

using namespace htl;

namespace {

std::vector<reg::RegularizerSpec> specs(Eigen::Index d, Rng& rng) {
  return {reg::make_sq_l2(1.0), reg::make_sq_l2(0.3),
          reg::make_biased_sq_l2(0.8, rng.normal_vector(d)),
          reg::make_elastic(0.5, 0.7)};
}

}  // namespace

TEST_CASE("construction guards") {
  CHECK_THROWS_AS(reg::make_sq_l2(0.0), std::invalid_argument);
  CHECK_THROWS_AS(reg::make_sq_l2(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(reg::make_elastic(-0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(reg::make_elastic(1.0, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(reg::make_reg("huber", 1.0), std::invalid_argument);
  // pure l1 oracle construction is allowed (zero quadratic part)
  CHECK_NOTHROW(reg::make_elastic(0.0, 1.0));
}

TEST_CASE("values and sigma") {
  Eigen::VectorXd w(2);
  w << 3.0, -4.0;
  CHECK(reg::reg_value(reg::make_sq_l2(1.0), w) == doctest::Approx(25.0));
  CHECK(reg::make_sq_l2(1.0).sigma() == 2.0);
  CHECK(reg::make_sq_l2(0.25).sigma() == 0.5);
  const auto el = reg::make_elastic(0.5, 2.0);
  CHECK(reg::reg_value(el, w) == doctest::Approx(0.5 * 25.0 + 2.0 * 7.0));
  Eigen::VectorXd c(2);
  c << 3.0, -4.0;
  CHECK(reg::reg_value(reg::make_biased_sq_l2(1.0, c), w) == doctest::Approx(0.0));
}

TEST_CASE("strong convexity on random triples") {
  Rng rng(42, 0);
  const Eigen::Index d = 6;
  for (const auto& spec : specs(d, rng)) {
    const double sigma = spec.sigma();
    for (int k = 0; k < 1000; ++k) {
      const Eigen::VectorXd x = 3.0 * rng.normal_vector(d);
      const Eigen::VectorXd y = 3.0 * rng.normal_vector(d);
      const double t = rng.uniform();
      const double lhs = reg::reg_value(spec, t * x + (1.0 - t) * y);
      const double rhs = t * reg::reg_value(spec, x) +
                         (1.0 - t) * reg::reg_value(spec, y) -
                         0.5 * sigma * t * (1.0 - t) * (x - y).squaredNorm();
      CHECK(lhs <= rhs + 1e-9);
    }
  }
}

TEST_CASE("prox solves its variational problem") {
  Rng rng(7, 0);
  const Eigen::Index d = 5;
  for (const auto& spec : specs(d, rng)) {
    for (int k = 0; k < 50; ++k) {
      const Eigen::VectorXd v = 2.0 * rng.normal_vector(d);
      const double step = std::exp(rng.uniform(-3.0, 1.0));
      const Eigen::VectorXd p = reg::reg_prox(spec, v, step);
      const double fp = 0.5 * (p - v).squaredNorm() + step * reg::reg_value(spec, p);
      for (int j = 0; j < 30; ++j) {
        const Eigen::VectorXd q = p + 0.1 * rng.normal_vector(d);
        const double fq =
            0.5 * (q - v).squaredNorm() + step * reg::reg_value(spec, q);
        CHECK(fp <= fq + 1e-10);
      }
    }
  }
  CHECK_THROWS_AS(reg::reg_prox(reg::make_sq_l2(1.0), Eigen::VectorXd::Zero(2), 0.0),
                  std::invalid_argument);
}

TEST_CASE("elastic prox with zero quadratic part is soft thresholding") {
  const auto spec = reg::make_elastic(0.0, 1.0);
  Eigen::VectorXd v(4);
  v << 2.0, -0.3, 0.5, -1.8;
  const Eigen::VectorXd p = reg::reg_prox(spec, v, 0.5);
  CHECK(p[0] == doctest::Approx(1.5));
  CHECK(p[1] == 0.0);
  CHECK(p[2] == 0.0);
  CHECK(p[3] == doctest::Approx(-1.3));
}

TEST_CASE("ball projection feasibility, identity and idempotence") {
  Rng rng(11, 0);
  const Eigen::Index d = 5;
  for (const auto& spec : specs(d, rng)) {
    for (int k = 0; k < 100; ++k) {
      const Eigen::VectorXd w = 3.0 * rng.normal_vector(d);
      const double radius = std::exp(rng.uniform(-3.0, 2.0));
      const Eigen::VectorXd p = reg::ball_project(spec, w, radius);
      CHECK(reg::reg_value(spec, p) <= radius + 1e-9);
      if (reg::reg_value(spec, w) <= radius) {
        CHECK((p - w).norm() == 0.0);
      } else {
        // projection lands on the boundary
        CHECK(reg::reg_value(spec, p) == doctest::Approx(radius).epsilon(1e-6));
      }
      const Eigen::VectorXd pp = reg::ball_project(spec, p, radius);
      CHECK((pp - p).norm() <= 1e-12);
    }
  }
  CHECK_THROWS_AS(
      reg::ball_project(reg::make_sq_l2(1.0), Eigen::VectorXd::Ones(2), -1.0),
      std::invalid_argument);
}

TEST_CASE("ball projection with zero radius collapses to the center") {
  Eigen::VectorXd w(3);
  w << 1.0, 2.0, 3.0;
  CHECK(reg::ball_project(reg::make_sq_l2(1.0), w, 0.0).norm() <= 1e-9);
  Eigen::VectorXd c(3);
  c << -1.0, 0.5, 2.0;
  const auto biased = reg::make_biased_sq_l2(1.0, c);
  CHECK((reg::ball_project(biased, w, 0.0) - c).norm() <= 1e-9);
}

TEST_CASE("gradient of the quadratic part matches finite differences") {
  Rng rng(3, 0);
  const Eigen::Index d = 4;
  for (const auto& spec : specs(d, rng)) {
    Eigen::VectorXd w = rng.normal_vector(d);
    for (Eigen::Index i = 0; i < d; ++i)
      if (std::abs(w[i]) < 1e-3) w[i] = 0.5;  // stay off the l1 kink
    const Eigen::VectorXd g = reg::reg_grad(spec, w);
    for (Eigen::Index i = 0; i < d; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
      e[i] = 1e-7;
      const double fd =
          (reg::reg_value(spec, w + e) - reg::reg_value(spec, w - e)) / 2e-7;
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}
