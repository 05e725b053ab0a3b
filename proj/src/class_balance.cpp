#include "anymlc/class_balance.hpp"

#include <cmath>

namespace anymlc {

nlohmann::json BalanceWeights::to_json() const {
  nlohmann::json j;
  j["beta"] = beta;
  j["per_class"] = per_class;
  if (negative.has_value()) {
    j["negative"] = *negative;
  } else {
    j["negative"] = nullptr;
  }
  return j;
}

BalanceWeights BalanceWeights::from_json(const nlohmann::json& j) {
  BalanceWeights w;
  w.beta = j.at("beta").get<double>();
  w.per_class = j.at("per_class").get<std::vector<double>>();
  if (j.contains("negative") && !j.at("negative").is_null()) {
    w.negative = j.at("negative").get<double>();
  }
  return w;
}

ClassCounts count_labels(const BinaryMatrix& labels) {
  if (labels.rows == 0 || labels.cols == 0) {
    throw InvalidInputError("count_labels: empty label matrix");
  }
  ClassCounts counts;
  counts.per_class.assign(labels.cols, 0);
  counts.total_instances = labels.rows;
  for (std::size_t i = 0; i < labels.rows; ++i) {
    bool positive = false;
    const auto row = labels.row(i);
    for (std::size_t j = 0; j < labels.cols; ++j) {
      if (row[j] != 0) {
        ++counts.per_class[j];
        positive = true;
      }
    }
    if (!positive) ++counts.negative;
  }
  return counts;
}

namespace {

// (1-beta) / (1-beta^n); beta^n via exp(n log beta) so large n underflows to
// the exact limit instead of looping a pow.
double effective_number(std::uint64_t n, double beta) {
  if (beta == 0.0) return 1.0;
  const double beta_pow = std::exp(static_cast<double>(n) * std::log(beta));
  return (1.0 - beta) / (1.0 - beta_pow);
}

}  // namespace

BalanceWeights effective_weights(const ClassCounts& counts, double beta,
                                 bool include_negative) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    throw InvalidConfigError("beta must be in [0,1)");
  }
  const std::size_t m = counts.per_class.size();
  if (m == 0) throw InvalidInputError("effective_weights: no classes");
  std::vector<double> effective(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (counts.per_class[j] == 0) {
      throw ZeroCountError("class " + std::to_string(j) +
                           " has zero positive instances; weight undefined");
    }
    effective[j] = effective_number(counts.per_class[j], beta);
  }
  double sum = 0.0;
  for (double e : effective) sum += e;

  BalanceWeights weights;
  weights.beta = beta;
  weights.per_class.resize(m);
  if (include_negative) {
    if (counts.negative == 0) {
      throw ZeroCountError(
          "negative category has zero instances; weight undefined");
    }
    const double neg_effective = effective_number(counts.negative, beta);
    const double denom = sum + neg_effective;
    const double scale = static_cast<double>(m + 1) / denom;
    for (std::size_t j = 0; j < m; ++j) {
      weights.per_class[j] = scale * effective[j];
    }
    weights.negative = scale * neg_effective;
  } else {
    const double scale = static_cast<double>(m) / sum;
    for (std::size_t j = 0; j < m; ++j) {
      weights.per_class[j] = scale * effective[j];
    }
  }
  return weights;
}

}  // namespace anymlc
