#ifndef ANYMLC_NUMERICS_HPP_
#define ANYMLC_NUMERICS_HPP_

#include <cmath>

#include "anymlc/errors.hpp"

namespace anymlc {

// A probability in [0,1]. Values outside the interval by no more than
// kRoundoffSlack are treated as round-off and clamped; anything further out
// is rejected.
class Probability {
 public:
  static constexpr double kRoundoffSlack = 1e-12;

  explicit Probability(double value) : value_(checked(value)) {}
  double value() const { return value_; }

 private:
  static double checked(double v) {
    if (v >= 0.0 && v <= 1.0) return v;
    if (v > 1.0 && v <= 1.0 + kRoundoffSlack) return 1.0;
    if (v < 0.0 && v >= -kRoundoffSlack) return 0.0;
    throw InvalidInputError("probability out of range: " + std::to_string(v));
  }

  double value_;
};

// A raw pre-activation score. Must be finite.
class Logit {
 public:
  explicit Logit(double value) : value_(value) {
    if (!std::isfinite(value)) {
      throw InvalidInputError("logit must be finite");
    }
  }
  double value() const { return value_; }

 private:
  double value_;
};

namespace detail {

// Unchecked fast paths for batch code whose inputs are validated once.
inline double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double softplus(double z) {
  return (z > 0.0 ? z : 0.0) + std::log1p(std::exp(-std::abs(z)));
}

inline double log_sigmoid(double z) { return -softplus(-z); }

}  // namespace detail

inline Probability stable_sigmoid(Logit z) {
  return Probability(detail::sigmoid(z.value()));
}

inline double softplus(Logit z) { return detail::softplus(z.value()); }

inline double log_sigmoid(Logit z) { return detail::log_sigmoid(z.value()); }

}  // namespace anymlc

#endif  // ANYMLC_NUMERICS_HPP_
