#pragma once

#include <cmath>
#include <stdexcept>

namespace dofinetti {

/// Hyperparameters of a Beta prior over a Bernoulli mechanism parameter.
struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;

  BetaPrior() = default;
  BetaPrior(double a, double b) : alpha(a), beta(b) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
      throw std::invalid_argument("BetaPrior: alpha and beta must be > 0");
    }
  }

  /// Urn constructions need whole ball counts.
  bool is_integer() const {
    return alpha == std::floor(alpha) && beta == std::floor(beta);
  }
};

}  // namespace dofinetti
