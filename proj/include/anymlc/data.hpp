#ifndef ANYMLC_DATA_HPP_
#define ANYMLC_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "anymlc/class_balance.hpp"
#include "anymlc/types.hpp"

#include <json.hpp>

namespace anymlc {

// A labeled multi-label dataset: ids, optional group keys (e.g. patient),
// sparse binary labels stored dense, and an optional feature matrix.
struct LabelDataset {
  std::vector<std::string> instance_ids;
  std::vector<std::string> group_keys;  // empty, or one key per instance
  BinaryMatrix labels;                  // N x M
  std::vector<std::string> class_names;
  Matrix features;                      // empty, or N x D

  std::size_t size() const { return labels.rows; }
  std::size_t num_classes() const { return labels.cols; }
  bool has_groups() const { return !group_keys.empty(); }
  bool has_features() const { return !features.empty(); }

  void validate() const;

  friend bool operator==(const LabelDataset&, const LabelDataset&) = default;
};

enum class DataFormat { csv, jsonl };

DataFormat data_format_from_string(const std::string& name);
DataFormat data_format_from_path(const std::filesystem::path& path);

LabelDataset load_dataset(const std::filesystem::path& path, DataFormat format);
// CSV datasets with features also write a `<stem>.features.csv` sidecar.
void save_dataset(const LabelDataset& dataset,
                  const std::filesystem::path& path, DataFormat format);

struct DatasetStats {
  std::uint64_t total = 0;
  std::uint64_t negative = 0;
  double negative_fraction = 0.0;
  std::vector<std::uint64_t> per_class;
  // cardinality_hist[k] = number of instances with exactly k present labels.
  std::vector<std::uint64_t> cardinality_hist;

  nlohmann::json to_json(const std::vector<std::string>& class_names) const;
};

DatasetStats dataset_stats(const LabelDataset& dataset);

inline ClassCounts count_labels(const LabelDataset& dataset) {
  return count_labels(dataset.labels);
}

// Symmetric pairwise presence counts with a zero diagonal. With a grouping
// map (class -> category) counts are per category pair instead.
struct CoocMatrix {
  std::vector<std::string> names;
  std::vector<std::uint64_t> counts;  // row-major square

  std::uint64_t at(std::size_t a, std::size_t b) const {
    return counts[a * names.size() + b];
  }
};

CoocMatrix co_occurrence(
    const LabelDataset& dataset,
    const std::map<std::string, std::string>* grouping = nullptr);

struct FilterReport {
  std::size_t removed_classes = 0;
  std::size_t remaining_classes = 0;
  std::uint64_t negative = 0;
  double negative_fraction = 0.0;

  nlohmann::json to_json() const;
};

// Removes the listed classes' columns; rows are kept, so instances whose
// only present classes were removed become negatives.
LabelDataset filter_classes(const LabelDataset& dataset,
                            const std::vector<std::string>& remove,
                            FilterReport* report = nullptr);

struct SplitSpec {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
  std::uint64_t seed = 0;
  bool group_aware = false;

  void validate() const;
};

struct SplitResult {
  LabelDataset train;
  LabelDataset val;
  LabelDataset test;
};

SplitResult split_dataset(const LabelDataset& dataset, const SplitSpec& spec);

struct SyntheticConfig {
  std::size_t n_instances = 5000;
  std::size_t n_classes = 8;
  std::size_t n_features = 16;
  double negative_fraction = 0.5;
  double label_cardinality_mean = 1.5;
  double class_skew = 1.0;  // power-law exponent over class marginals
  double noise_sigma = 1.0;
  std::uint64_t seed = 7;

  void validate() const;
  nlohmann::json to_json() const;
};

// Prototype-mixture generator. Class prototypes share a positive direction
// and the background prototype sits opposite it, so negatives are separable
// while per-class discrimination is controlled by noise_sigma.
LabelDataset synthesize(const SyntheticConfig& config);

}  // namespace anymlc

#endif  // ANYMLC_DATA_HPP_
