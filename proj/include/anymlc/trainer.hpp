#ifndef ANYMLC_TRAINER_HPP_
#define ANYMLC_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "anymlc/data.hpp"
#include "anymlc/losses.hpp"
#include "anymlc/metrics.hpp"

#include <json.hpp>

namespace anymlc {

enum class Activation { relu, tanh_act };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

struct MLPConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;  // empty = linear model
  std::size_t output_dim = 0;
  Activation activation = Activation::relu;
  std::uint64_t init_seed = 0;
  // Weights initialize uniform in +-sqrt(6/(fan_in+fan_out)); biases zero.

  void validate() const;
};

struct Layer {
  Matrix weights;  // output_dim x input_dim
  std::vector<double> bias;
};

struct Model {
  MLPConfig config;
  std::vector<Layer> layers;

  std::size_t parameter_count() const;
  nlohmann::json to_json() const;
  static Model from_json(const nlohmann::json& j);

  friend bool operator==(const Model&, const Model&);
};

Model init_model(const MLPConfig& config);

Matrix forward(const Model& model, const Matrix& features, int threads = 1);

// Batch loss and its gradient with respect to every model parameter at the
// current weights (no weight decay; that belongs to the optimizer step).
struct ParameterGradients {
  double loss = 0.0;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
};

ParameterGradients loss_gradients(const Model& model, const Matrix& features,
                                  const BinaryMatrix& labels,
                                  const LossConfig& loss_config,
                                  int threads = 1);

enum class ValidationMetric { map, macro_f2 };

ValidationMetric validation_metric_from_string(const std::string& name);
std::string to_string(ValidationMetric m);

struct LrDecayStep {
  std::size_t epoch = 0;
  double factor = 1.0;
};

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::vector<LrDecayStep> lr_decay = {{10, 0.1}, {15, 0.1}};
  LossConfig loss;
  bool class_balance = true;
  double cb_beta = 0.9999;
  ValidationMetric validation_metric = ValidationMetric::map;
  double threshold = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double learning_rate = 0.0;
  MetricsReport validation;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
  Model best_model;

  nlohmann::json to_json() const;
  std::string csv() const;
};

// SGD with momentum and weight decay; gradients flow from the loss module
// through manual backpropagation. Mutates `model` to the final parameters and
// returns the per-epoch log with the best validation checkpoint. on_epoch,
// when set, fires after every epoch (the CLI uses it to flush partial logs).
TrainingLog train(Model& model, const LabelDataset& train_data,
                  const LabelDataset& val_data, const TrainConfig& config,
                  int threads = 1, std::ostream* progress = nullptr,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

MetricsReport evaluate(const Model& model, const LabelDataset& data, double tau,
                       const ClassImportanceWeights* ciw = nullptr,
                       int threads = 1);

struct AblationRow {
  std::optional<double> lambda;  // nullopt = alpha-0 baseline
  std::uint64_t seed = 0;
  double f1 = 0.0;
  double f2 = 0.0;
  double map = 0.0;
  double f1_neg = 0.0;
};

struct AblationMedians {
  std::optional<double> lambda;
  double f1 = 0.0;
  double f2 = 0.0;
  double map = 0.0;
  double f1_neg = 0.0;
};

struct AblationTable {
  std::vector<AblationRow> rows;
  std::vector<AblationMedians> medians;

  std::string rows_csv() const;
  std::string medians_csv() const;
  static AblationTable from_rows_csv(const std::string& text);
};

// Full train+evaluate per (lambda, seed) over the grid plus the alpha = 0
// baseline per seed. Training uses train/val; the reported metrics come from
// the test split.
AblationTable ablate_lambda(const LabelDataset& train_data,
                            const LabelDataset& val_data,
                            const LabelDataset& test_data,
                            const MLPConfig& mlp_config,
                            const TrainConfig& base_config,
                            std::span<const double> lambda_grid,
                            std::size_t n_seeds, int threads = 1,
                            std::ostream* progress = nullptr);

}  // namespace anymlc

#endif  // ANYMLC_TRAINER_HPP_
