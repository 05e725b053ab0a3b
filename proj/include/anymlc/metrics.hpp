#ifndef ANYMLC_METRICS_HPP_
#define ANYMLC_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anymlc/types.hpp"

#include <json.hpp>

namespace anymlc {

// Predicted per-class probabilities, one row per instance.
struct ScoreBatch {
  Matrix probabilities;

  static ScoreBatch from(Matrix m);

  std::size_t instances() const { return probabilities.rows; }
  std::size_t classes() const { return probabilities.cols; }
};

struct ClassImportanceWeights {
  std::vector<double> weights;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  std::optional<double> average_precision;  // absent when no positives
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  double macro_f1 = 0.0;
  double macro_f2 = 0.0;
  double mean_ap = 0.0;
  double f1_neg = 0.0;
  std::optional<double> f2_ciw;
  double threshold = 0.5;
  double negative_fraction = 0.0;
  std::vector<std::string> class_names;  // may be empty
  std::vector<std::string> warnings;

  double metric(const std::string& name) const;  // by scalar column name
  nlohmann::json to_json(bool include_per_class = true) const;
  static std::string csv_header(std::size_t num_classes, bool per_class_block);
  std::string csv_row(bool per_class_block) const;
};

// Entry = 1 iff probability >= tau (ties count as positive).
BinaryMatrix threshold_predictions(const ScoreBatch& scores, double tau);

struct PrecisionRecallF {
  double precision = 0.0;
  double recall = 0.0;
  double fbeta = 0.0;
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// Per-class precision / recall / F_beta under the zero-denominator
// convention: P, R and F are 0 whenever their denominators are 0.
std::vector<PrecisionRecallF> fbeta_per_class(const BinaryMatrix& preds,
                                              const TargetBatch& targets,
                                              double beta_f);

double f2_ciw(std::span<const double> per_class_f2,
              const ClassImportanceWeights& ciw);

// Non-interpolated AP: mean precision at each positive under a stable
// descending sort. Throws UndefinedMetricError when the column has no
// positives.
double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> targets);

// F1 of the instance-level "is negative" task: an instance is predicted
// negative iff every class probability is below tau.
double f1_negative(const ScoreBatch& scores, const TargetBatch& targets,
                   double tau);

MetricsReport full_report(const ScoreBatch& scores, const TargetBatch& targets,
                          double tau,
                          const ClassImportanceWeights* ciw = nullptr,
                          std::vector<std::string> class_names = {});

}  // namespace anymlc

#endif  // ANYMLC_METRICS_HPP_
