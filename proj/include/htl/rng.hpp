#ifndef HTL_RNG_HPP
#define HTL_RNG_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace htl {

// Counter-based splittable generator. A stream is identified by
// (seed, stream_id); every draw is a pure hash of (seed, stream_id, counter),
// so parallel trials reproduce bit-identically regardless of scheduling.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : key_(mix(seed ^ mix(stream_id + 0x9e3779b97f4a7c15ULL))) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via polar method (deterministic, no libm distribution
  // implementation differences)
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = uniform(-1.0, 1.0);
      v = uniform(-1.0, 1.0);
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  int sign() { return (next_u64() & 1) ? 1 : -1; }

  Eigen::VectorXd normal_vector(Eigen::Index d) {
    Eigen::VectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = normal();
    return v;
  }

  // uniform on the surface of the unit sphere
  Eigen::VectorXd unit_vector(Eigen::Index d) {
    Eigen::VectorXd v = normal_vector(d);
    const double n = v.norm();
    return n > 0 ? Eigen::VectorXd(v / n) : unit_vector(d);
  }

  // uniform in the closed unit ball
  Eigen::VectorXd ball_vector(Eigen::Index d) {
    const double r = std::pow(uniform(), 1.0 / static_cast<double>(d));
    return r * unit_vector(d);
  }

  Eigen::VectorXd rademacher_vector(Eigen::Index m) {
    Eigen::VectorXd e(m);
    for (Eigen::Index i = 0; i < m; ++i) e[i] = static_cast<double>(sign());
    return e;
  }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace htl

#endif  // HTL_RNG_HPP
