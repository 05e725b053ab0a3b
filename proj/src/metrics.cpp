#include "anymlc/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

#include "anymlc/numerics.hpp"

namespace anymlc {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double fbeta_from(double precision, double recall, double beta_sq) {
  const double denom = beta_sq * precision + recall;
  if (denom == 0.0) return 0.0;
  return (1.0 + beta_sq) * precision * recall / denom;
}

}  // namespace

ScoreBatch ScoreBatch::from(Matrix m) {
  if (m.rows == 0 || m.cols == 0) {
    throw InvalidInputError("score batch must be non-empty");
  }
  for (double& v : m.values) {
    v = Probability(v).value();  // validates and clamps round-off
  }
  return ScoreBatch{std::move(m)};
}

BinaryMatrix threshold_predictions(const ScoreBatch& scores, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw InvalidConfigError("threshold must be in (0,1)");
  }
  BinaryMatrix preds(scores.instances(), scores.classes());
  for (std::size_t k = 0; k < scores.probabilities.values.size(); ++k) {
    preds.values[k] = scores.probabilities.values[k] >= tau ? 1 : 0;
  }
  return preds;
}

std::vector<PrecisionRecallF> fbeta_per_class(const BinaryMatrix& preds,
                                              const TargetBatch& targets,
                                              double beta_f) {
  if (!(beta_f > 0.0)) throw InvalidConfigError("beta_f must be > 0");
  if (preds.rows != targets.values.rows || preds.cols != targets.values.cols) {
    throw InvalidInputError("prediction and target shapes differ");
  }
  const double beta_sq = beta_f * beta_f;
  std::vector<PrecisionRecallF> out(preds.cols);
  for (std::size_t j = 0; j < preds.cols; ++j) {
    auto& c = out[j];
    for (std::size_t i = 0; i < preds.rows; ++i) {
      const bool p = preds.at(i, j) != 0;
      const bool t = targets.values.at(i, j) != 0;
      if (p && t) ++c.tp;
      else if (p && !t) ++c.fp;
      else if (!p && t) ++c.fn;
      else ++c.tn;
    }
    c.precision = (c.tp + c.fp) > 0
                      ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                      : 0.0;
    c.recall = (c.tp + c.fn) > 0
                   ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                   : 0.0;
    c.fbeta = fbeta_from(c.precision, c.recall, beta_sq);
  }
  return out;
}

double f2_ciw(std::span<const double> per_class_f2,
              const ClassImportanceWeights& ciw) {
  if (per_class_f2.size() != ciw.weights.size()) {
    throw InvalidInputError("per-class F2 and importance weight lengths differ");
  }
  double weight_sum = 0.0;
  double weighted = 0.0;
  for (std::size_t j = 0; j < per_class_f2.size(); ++j) {
    if (ciw.weights[j] < 0.0) {
      throw InvalidConfigError("importance weights must be non-negative");
    }
    weighted += ciw.weights[j] * per_class_f2[j];
    weight_sum += ciw.weights[j];
  }
  if (weight_sum == 0.0) {
    throw InvalidConfigError("importance weights are all zero");
  }
  return weighted / weight_sum;
}

double average_precision(std::span<const double> scores,
                         std::span<const std::uint8_t> targets) {
  if (scores.size() != targets.size() || scores.empty()) {
    throw InvalidInputError("average_precision: column sizes differ or empty");
  }
  std::size_t positives = 0;
  for (std::uint8_t t : targets) positives += t != 0 ? 1 : 0;
  if (positives == 0) {
    throw UndefinedMetricError("average precision undefined: no positives");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  double sum_precision = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (targets[order[rank]] != 0) {
      ++hits;
      sum_precision +=
          static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum_precision / static_cast<double>(positives);
}

double f1_negative(const ScoreBatch& scores, const TargetBatch& targets,
                   double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw InvalidConfigError("threshold must be in (0,1)");
  }
  if (scores.instances() != targets.instances() ||
      scores.classes() != targets.classes()) {
    throw InvalidInputError("score and target shapes differ");
  }
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < scores.instances(); ++i) {
    bool predicted_negative = true;
    for (double p : scores.probabilities.row(i)) {
      if (p >= tau) {
        predicted_negative = false;
        break;
      }
    }
    const bool target_negative = !targets.row_positive(i);
    if (predicted_negative && target_negative) ++tp;
    else if (predicted_negative && !target_negative) ++fp;
    else if (!predicted_negative && target_negative) ++fn;
  }
  const double precision =
      (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double recall =
      (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  return fbeta_from(precision, recall, 1.0);
}

MetricsReport full_report(const ScoreBatch& scores, const TargetBatch& targets,
                          double tau, const ClassImportanceWeights* ciw,
                          std::vector<std::string> class_names) {
  if (scores.instances() != targets.instances() ||
      scores.classes() != targets.classes()) {
    throw InvalidInputError("score and target shapes differ");
  }
  if (!class_names.empty() && class_names.size() != scores.classes()) {
    throw InvalidInputError("class name count does not match classes");
  }
  const std::size_t m = scores.classes();
  MetricsReport report;
  report.threshold = tau;
  report.class_names = std::move(class_names);

  const BinaryMatrix preds = threshold_predictions(scores, tau);
  const auto pr1 = fbeta_per_class(preds, targets, 1.0);
  const auto pr2 = fbeta_per_class(preds, targets, 2.0);

  report.per_class.resize(m);
  std::vector<double> column(scores.instances());
  std::vector<std::uint8_t> target_column(scores.instances());
  double f1_sum = 0.0, f2_sum = 0.0, ap_sum = 0.0;
  std::size_t ap_classes = 0;
  for (std::size_t j = 0; j < m; ++j) {
    auto& c = report.per_class[j];
    c.precision = pr1[j].precision;
    c.recall = pr1[j].recall;
    c.f1 = pr1[j].fbeta;
    c.f2 = pr2[j].fbeta;
    c.tp = pr1[j].tp;
    c.fp = pr1[j].fp;
    c.fn = pr1[j].fn;
    c.tn = pr1[j].tn;
    f1_sum += c.f1;
    f2_sum += c.f2;
    for (std::size_t i = 0; i < scores.instances(); ++i) {
      column[i] = scores.probabilities.at(i, j);
      target_column[i] = targets.values.at(i, j);
    }
    try {
      c.average_precision = average_precision(column, target_column);
      ap_sum += *c.average_precision;
      ++ap_classes;
    } catch (const UndefinedMetricError&) {
      const std::string label = report.class_names.empty()
                                    ? "class " + std::to_string(j)
                                    : report.class_names[j];
      report.warnings.push_back(label +
                                ": no positives; excluded from mean AP, "
                                "F-beta counted as 0");
    }
  }
  report.macro_f1 = f1_sum / static_cast<double>(m);
  report.macro_f2 = f2_sum / static_cast<double>(m);
  report.mean_ap = ap_classes > 0 ? ap_sum / static_cast<double>(ap_classes) : 0.0;
  report.f1_neg = f1_negative(scores, targets, tau);

  std::uint64_t negatives = 0;
  for (std::size_t i = 0; i < targets.instances(); ++i) {
    if (!targets.row_positive(i)) ++negatives;
  }
  report.negative_fraction =
      static_cast<double>(negatives) / static_cast<double>(targets.instances());

  if (ciw != nullptr) {
    std::vector<double> f2s(m);
    for (std::size_t j = 0; j < m; ++j) f2s[j] = report.per_class[j].f2;
    report.f2_ciw = f2_ciw(f2s, *ciw);
  }
  return report;
}

double MetricsReport::metric(const std::string& name) const {
  if (name == "macro_f1") return macro_f1;
  if (name == "macro_f2") return macro_f2;
  if (name == "mean_ap" || name == "map") return mean_ap;
  if (name == "f1_neg") return f1_neg;
  if (name == "f2_ciw" && f2_ciw.has_value()) return *f2_ciw;
  throw InvalidInputError("unknown metric: " + name);
}

nlohmann::json MetricsReport::to_json(bool include_per_class) const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["threshold"] = threshold;
  j["macro_f1"] = macro_f1;
  j["macro_f2"] = macro_f2;
  j["mean_ap"] = mean_ap;
  j["f1_neg"] = f1_neg;
  if (f2_ciw.has_value()) j["f2_ciw"] = *f2_ciw;
  j["negative_fraction"] = negative_fraction;
  if (include_per_class) {
    nlohmann::json per = nlohmann::json::array();
    for (std::size_t k = 0; k < per_class.size(); ++k) {
      const auto& c = per_class[k];
      nlohmann::json cj;
      if (!class_names.empty()) cj["name"] = class_names[k];
      cj["precision"] = c.precision;
      cj["recall"] = c.recall;
      cj["f1"] = c.f1;
      cj["f2"] = c.f2;
      if (c.average_precision.has_value()) {
        cj["average_precision"] = *c.average_precision;
      } else {
        cj["average_precision"] = nullptr;
      }
      cj["tp"] = c.tp;
      cj["fp"] = c.fp;
      cj["fn"] = c.fn;
      cj["tn"] = c.tn;
      per.push_back(std::move(cj));
    }
    j["per_class"] = std::move(per);
  }
  if (!warnings.empty()) j["warnings"] = warnings;
  return j;
}

std::string MetricsReport::csv_header(std::size_t num_classes,
                                      bool per_class_block) {
  std::ostringstream os;
  os << "threshold,macro_f1,macro_f2,mean_ap,f1_neg,f2_ciw,negative_fraction";
  if (per_class_block) {
    for (std::size_t j = 0; j < num_classes; ++j) {
      os << ",precision_" << j << ",recall_" << j << ",f1_" << j << ",f2_" << j
         << ",ap_" << j;
    }
  }
  return os.str();
}

std::string MetricsReport::csv_row(bool per_class_block) const {
  std::ostringstream os;
  os << format_double(threshold) << ',' << format_double(macro_f1) << ','
     << format_double(macro_f2) << ',' << format_double(mean_ap) << ','
     << format_double(f1_neg) << ','
     << (f2_ciw.has_value() ? format_double(*f2_ciw) : std::string()) << ','
     << format_double(negative_fraction);
  if (per_class_block) {
    for (const auto& c : per_class) {
      os << ',' << format_double(c.precision) << ',' << format_double(c.recall)
         << ',' << format_double(c.f1) << ',' << format_double(c.f2) << ','
         << (c.average_precision.has_value()
                 ? format_double(*c.average_precision)
                 : std::string());
    }
  }
  return os.str();
}

}  // namespace anymlc
