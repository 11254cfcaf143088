#include "rstk/random.hpp"

#include <cmath>
#include <numbers>

namespace rstk::rng {

double SplitMix64::normal(double mu, double sigma) {
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mu + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rstk::rng
