#ifndef ANYMLC_CLASS_BALANCE_HPP_
#define ANYMLC_CLASS_BALANCE_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "anymlc/types.hpp"

#include <json.hpp>

namespace anymlc {

// Label counts over a dataset: per-class positives, plus the number of
// negative instances (all-zero rows) counted as their own category.
struct ClassCounts {
  std::vector<std::uint64_t> per_class;
  std::uint64_t negative = 0;
  std::uint64_t total_instances = 0;
};

// Normalized class-balancing weights. Without the negative category the
// per-class weights sum to M; with it, per-class plus negative sum to M+1.
struct BalanceWeights {
  std::vector<double> per_class;
  std::optional<double> negative;
  double beta = 0.0;

  nlohmann::json to_json() const;
  static BalanceWeights from_json(const nlohmann::json& j);
};

ClassCounts count_labels(const BinaryMatrix& labels);

// Effective-number reweighting from label counts. beta in [0,1); every
// counted class must have at least one positive instance.
BalanceWeights effective_weights(const ClassCounts& counts, double beta,
                                 bool include_negative);

}  // namespace anymlc

#endif  // ANYMLC_CLASS_BALANCE_HPP_
