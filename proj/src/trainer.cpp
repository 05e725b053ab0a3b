#include "anymlc/trainer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "anymlc/numerics.hpp"
#include "anymlc/parallel.hpp"
#include "anymlc/rng.hpp"

namespace anymlc {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double activation_value(Activation a, double x) {
  if (a == Activation::relu) return x > 0.0 ? x : 0.0;
  return std::tanh(x);
}

// Derivative in terms of the activation output.
double activation_slope(Activation a, double out) {
  if (a == Activation::relu) return out > 0.0 ? 1.0 : 0.0;
  return 1.0 - out * out;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh_act;
  throw InvalidConfigError("unknown activation: " + name);
}

std::string to_string(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

void MLPConfig::validate() const {
  if (input_dim == 0) throw InvalidConfigError("input_dim must be > 0");
  if (output_dim == 0) throw InvalidConfigError("output_dim must be > 0");
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw InvalidConfigError("hidden dims must be > 0");
  }
}

std::size_t Model::parameter_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers) {
    count += layer.weights.values.size() + layer.bias.size();
  }
  return count;
}

bool operator==(const Model& a, const Model& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (a.layers[l].weights != b.layers[l].weights) return false;
    if (a.layers[l].bias != b.layers[l].bias) return false;
  }
  return true;
}

nlohmann::json Model::to_json() const {
  nlohmann::json j;
  j["format_version"] = 1;
  j["input_dim"] = config.input_dim;
  j["hidden_dims"] = config.hidden_dims;
  j["output_dim"] = config.output_dim;
  j["activation"] = to_string(config.activation);
  j["init_seed"] = config.init_seed;
  nlohmann::json layer_array = nlohmann::json::array();
  for (const auto& layer : layers) {
    nlohmann::json lj;
    lj["rows"] = layer.weights.rows;
    lj["cols"] = layer.weights.cols;
    lj["weights"] = layer.weights.values;  // row-major
    lj["bias"] = layer.bias;
    layer_array.push_back(std::move(lj));
  }
  j["layers"] = std::move(layer_array);
  return j;
}

Model Model::from_json(const nlohmann::json& j) {
  if (!j.contains("format_version") || j.at("format_version").get<int>() != 1) {
    throw InvalidInputError("unsupported checkpoint format version");
  }
  Model model;
  model.config.input_dim = j.at("input_dim").get<std::size_t>();
  model.config.hidden_dims =
      j.at("hidden_dims").get<std::vector<std::size_t>>();
  model.config.output_dim = j.at("output_dim").get<std::size_t>();
  model.config.activation =
      activation_from_string(j.at("activation").get<std::string>());
  if (j.contains("init_seed")) {
    model.config.init_seed = j.at("init_seed").get<std::uint64_t>();
  }
  for (const auto& lj : j.at("layers")) {
    Layer layer;
    layer.weights.rows = lj.at("rows").get<std::size_t>();
    layer.weights.cols = lj.at("cols").get<std::size_t>();
    layer.weights.values = lj.at("weights").get<std::vector<double>>();
    layer.bias = lj.at("bias").get<std::vector<double>>();
    if (layer.weights.values.size() != layer.weights.rows * layer.weights.cols ||
        layer.bias.size() != layer.weights.rows) {
      throw InvalidInputError("checkpoint layer shape mismatch");
    }
    model.layers.push_back(std::move(layer));
  }
  // layer dims must chain and agree with the recorded architecture
  std::vector<std::size_t> dims;
  dims.push_back(model.config.input_dim);
  dims.insert(dims.end(), model.config.hidden_dims.begin(),
              model.config.hidden_dims.end());
  dims.push_back(model.config.output_dim);
  if (model.layers.size() + 1 != dims.size()) {
    throw InvalidInputError("checkpoint layer count does not match dims");
  }
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    if (model.layers[l].weights.cols != dims[l] ||
        model.layers[l].weights.rows != dims[l + 1]) {
      throw InvalidInputError("checkpoint layer dims do not chain");
    }
  }
  return model;
}

Model init_model(const MLPConfig& config) {
  config.validate();
  Model model;
  model.config = config;
  std::vector<std::size_t> dims;
  dims.push_back(config.input_dim);
  dims.insert(dims.end(), config.hidden_dims.begin(), config.hidden_dims.end());
  dims.push_back(config.output_dim);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    Layer layer;
    layer.weights = Matrix(dims[l + 1], dims[l]);
    layer.bias.assign(dims[l + 1], 0.0);
    const double limit =
        std::sqrt(6.0 / static_cast<double>(dims[l] + dims[l + 1]));
    Rng rng(sub_seed(config.init_seed, "init-layer", l));
    for (double& w : layer.weights.values) {
      w = rng.uniform(-limit, limit);
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

namespace {

// Per-layer activations for a batch; outputs[l] holds the activations feeding
// layer l, outputs.back() the logits.
struct ForwardCache {
  std::vector<Matrix> activations;  // layers+1 entries; [0] = input features
};

void forward_into(const Model& model, const Matrix& features,
                  ForwardCache& cache, int threads) {
  const std::size_t n = features.rows;
  cache.activations.resize(model.layers.size() + 1);
  cache.activations[0] = features;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    const Matrix& in = cache.activations[l];
    Matrix& out = cache.activations[l + 1];
    out = Matrix(n, layer.weights.rows);
    const bool is_last = l + 1 == model.layers.size();
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const auto in_row = in.row(i);
        auto out_row = out.row(i);
        for (std::size_t r = 0; r < layer.weights.rows; ++r) {
          double acc = layer.bias[r];
          const double* w = layer.weights.values.data() + r * layer.weights.cols;
          for (std::size_t c = 0; c < layer.weights.cols; ++c) {
            acc += w[c] * in_row[c];
          }
          out_row[r] =
              is_last ? acc : activation_value(model.config.activation, acc);
        }
      }
    });
  }
}

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> bias;
};

// Backpropagates d(total)/d(logits) to parameter gradients. Per-instance
// deltas are computed in parallel; accumulation over instances is serial and
// in index order so results do not depend on the thread count.
void backward(const Model& model, const ForwardCache& cache,
              const Matrix& grad_logits, Gradients& grads, int threads) {
  const std::size_t n = grad_logits.rows;
  const std::size_t num_layers = model.layers.size();
  grads.weights.resize(num_layers);
  grads.bias.resize(num_layers);

  Matrix delta = grad_logits;
  for (std::size_t li = num_layers; li-- > 0;) {
    const Layer& layer = model.layers[li];
    const Matrix& input = cache.activations[li];
    Matrix& gw = grads.weights[li];
    gw = Matrix(layer.weights.rows, layer.weights.cols);
    auto& gb = grads.bias[li];
    gb.assign(layer.bias.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto d_row = delta.row(i);
      const auto in_row = input.row(i);
      for (std::size_t r = 0; r < layer.weights.rows; ++r) {
        const double dv = d_row[r];
        if (dv == 0.0) continue;
        double* gw_row = gw.values.data() + r * gw.cols;
        for (std::size_t c = 0; c < gw.cols; ++c) {
          gw_row[c] += dv * in_row[c];
        }
        gb[r] += dv;
      }
    }
    if (li == 0) break;
    Matrix prev_delta(n, layer.weights.cols);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const auto d_row = delta.row(i);
        const auto act_row = cache.activations[li].row(i);
        auto prev_row = prev_delta.row(i);
        for (std::size_t c = 0; c < layer.weights.cols; ++c) {
          double acc = 0.0;
          for (std::size_t r = 0; r < layer.weights.rows; ++r) {
            acc += layer.weights.values[r * layer.weights.cols + c] * d_row[r];
          }
          prev_row[c] =
              acc * activation_slope(model.config.activation, act_row[c]);
        }
      }
    });
    delta = std::move(prev_delta);
  }
}

Matrix gather_rows(const Matrix& src, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), src.cols);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = src.row(rows[k]);
    std::copy(r.begin(), r.end(), out.row(k).begin());
  }
  return out;
}

BinaryMatrix gather_rows(const BinaryMatrix& src,
                         std::span<const std::size_t> rows) {
  BinaryMatrix out(rows.size(), src.cols);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = src.row(rows[k]);
    std::copy(r.begin(), r.end(), out.row(k).begin());
  }
  return out;
}

}  // namespace

Matrix forward(const Model& model, const Matrix& features, int threads) {
  if (model.layers.empty()) throw InvalidConfigError("model has no layers");
  if (features.cols != model.layers.front().weights.cols) {
    throw InvalidInputError("feature width does not match model input_dim");
  }
  ForwardCache cache;
  forward_into(model, features, cache, threads);
  return std::move(cache.activations.back());
}

ParameterGradients loss_gradients(const Model& model, const Matrix& features,
                                  const BinaryMatrix& labels,
                                  const LossConfig& loss_config, int threads) {
  ForwardCache cache;
  forward_into(model, features, cache, threads);
  const LossResult loss =
      evaluate_loss(LogitBatch::from(cache.activations.back()),
                    TargetBatch{labels}, loss_config, threads);
  Gradients grads;
  backward(model, cache, loss.grad_logits, grads, threads);
  ParameterGradients out;
  out.loss = loss.total;
  out.weights = std::move(grads.weights);
  out.bias = std::move(grads.bias);
  return out;
}

ValidationMetric validation_metric_from_string(const std::string& name) {
  if (name == "map") return ValidationMetric::map;
  if (name == "macro_f2") return ValidationMetric::macro_f2;
  throw InvalidConfigError("unknown validation metric: " + name);
}

std::string to_string(ValidationMetric m) {
  return m == ValidationMetric::map ? "map" : "macro_f2";
}

void TrainConfig::validate() const {
  if (epochs == 0) throw InvalidConfigError("epochs must be > 0");
  if (batch_size == 0) throw InvalidConfigError("batch_size must be > 0");
  if (!(learning_rate >= 0.0)) {
    throw InvalidConfigError("learning_rate must be >= 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw InvalidConfigError("momentum must be in [0,1)");
  }
  if (!(weight_decay >= 0.0)) {
    throw InvalidConfigError("weight_decay must be >= 0");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw InvalidConfigError("threshold must be in (0,1)");
  }
  if (class_balance && !(cb_beta >= 0.0 && cb_beta < 1.0)) {
    throw InvalidConfigError("cb_beta must be in [0,1)");
  }
  std::size_t prev = 0;
  bool first = true;
  for (const auto& step : lr_decay) {
    if (!first && step.epoch <= prev) {
      throw InvalidConfigError("lr decay epochs must be strictly increasing");
    }
    if (step.epoch >= epochs) {
      throw InvalidConfigError("lr decay epoch beyond training length");
    }
    prev = step.epoch;
    first = false;
  }
  loss.validate();
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["momentum"] = momentum;
  j["weight_decay"] = weight_decay;
  nlohmann::json decay = nlohmann::json::array();
  for (const auto& step : lr_decay) {
    decay.push_back({{"epoch", step.epoch}, {"factor", step.factor}});
  }
  j["lr_decay"] = std::move(decay);
  j["loss_family"] = to_string(loss.family);
  j["alpha"] = loss.alpha;
  j["lambda"] = loss.lambda;
  j["gamma"] = loss.gamma;
  j["class_balance"] = class_balance;
  j["cb_beta"] = cb_beta;
  j["validation_metric"] = to_string(validation_metric);
  j["threshold"] = threshold;
  j["seed"] = seed;
  return j;
}

nlohmann::json TrainingLog::to_json() const {
  nlohmann::json j;
  j["format_version"] = 1;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : epochs) {
    nlohmann::json ej;
    ej["epoch"] = e.epoch;
    ej["train_loss"] = e.train_loss;
    ej["learning_rate"] = e.learning_rate;
    ej["validation"] = e.validation.to_json(/*include_per_class=*/false);
    rows.push_back(std::move(ej));
  }
  j["epochs"] = std::move(rows);
  j["best_epoch"] = best_epoch;
  j["best_metric"] = best_metric;
  return j;
}

std::string TrainingLog::csv() const {
  std::ostringstream os;
  os << "epoch,train_loss,learning_rate,val_macro_f1,val_macro_f2,val_mean_ap,"
        "val_f1_neg\n";
  for (const auto& e : epochs) {
    os << e.epoch << ',' << format_double(e.train_loss) << ','
       << format_double(e.learning_rate) << ','
       << format_double(e.validation.macro_f1) << ','
       << format_double(e.validation.macro_f2) << ','
       << format_double(e.validation.mean_ap) << ','
       << format_double(e.validation.f1_neg) << '\n';
  }
  return os.str();
}

TrainingLog train(Model& model, const LabelDataset& train_data,
                  const LabelDataset& val_data, const TrainConfig& config,
                  int threads, std::ostream* progress,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  train_data.validate();
  val_data.validate();
  if (!train_data.has_features() || !val_data.has_features()) {
    throw InvalidInputError("training requires datasets with features");
  }
  if (train_data.features.cols != model.layers.front().weights.cols) {
    throw InvalidInputError("feature width does not match model input_dim");
  }
  if (train_data.num_classes() != model.config.output_dim) {
    throw InvalidInputError("class count does not match model output_dim");
  }

  // Balance weights come from the training split only.
  LossConfig loss_config = config.loss;
  BalanceWeights balance;
  if (config.class_balance) {
    const ClassCounts counts = count_labels(train_data.labels);
    balance = effective_weights(counts, config.cb_beta,
                                /*include_negative=*/counts.negative > 0);
    loss_config.balance = &balance;
  } else {
    loss_config.balance = nullptr;
  }

  const std::size_t n = train_data.size();
  std::vector<Matrix> velocity_w;
  std::vector<std::vector<double>> velocity_b;
  for (const auto& layer : model.layers) {
    velocity_w.emplace_back(layer.weights.rows, layer.weights.cols);
    velocity_b.emplace_back(layer.bias.size(), 0.0);
  }

  TrainingLog log;
  double lr = config.learning_rate;
  std::vector<std::size_t> order(n);
  ForwardCache cache;
  Gradients grads;
  bool has_best = false;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& step : config.lr_decay) {
      if (step.epoch == epoch) lr *= step.factor;
    }
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(sub_seed(config.seed, "shuffle", epoch));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const Matrix batch_features = gather_rows(train_data.features, rows);
      const BinaryMatrix batch_labels = gather_rows(train_data.labels, rows);

      forward_into(model, batch_features, cache, threads);
      const Matrix& logits = cache.activations.back();
      if (!logits.all_finite()) {
        double max_abs = 0.0;
        for (double v : logits.values) {
          if (std::isfinite(v)) max_abs = std::max(max_abs, std::abs(v));
        }
        throw DivergedError(epoch, start / config.batch_size, max_abs,
                            "non-finite logits at epoch " +
                                std::to_string(epoch) + ", batch " +
                                std::to_string(start / config.batch_size));
      }
      const LossResult loss = evaluate_loss(
          LogitBatch{logits}, TargetBatch{batch_labels}, loss_config, threads);
      if (!std::isfinite(loss.total)) {
        double max_abs = 0.0;
        for (double v : logits.values) max_abs = std::max(max_abs, std::abs(v));
        throw DivergedError(epoch, start / config.batch_size, max_abs,
                            "non-finite loss at epoch " + std::to_string(epoch) +
                                ", batch " +
                                std::to_string(start / config.batch_size) +
                                ", max |logit| = " + format_double(max_abs));
      }
      loss_sum += loss.total * static_cast<double>(rows.size());

      backward(model, cache, loss.grad_logits, grads, threads);
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        Layer& layer = model.layers[l];
        auto& vw = velocity_w[l];
        for (std::size_t k = 0; k < layer.weights.values.size(); ++k) {
          const double g = grads.weights[l].values[k] +
                           config.weight_decay * layer.weights.values[k];
          vw.values[k] = config.momentum * vw.values[k] + g;
          layer.weights.values[k] -= lr * vw.values[k];
        }
        auto& vb = velocity_b[l];
        for (std::size_t k = 0; k < layer.bias.size(); ++k) {
          const double g =
              grads.bias[l][k] + config.weight_decay * layer.bias[k];
          vb[k] = config.momentum * vb[k] + g;
          layer.bias[k] -= lr * vb[k];
        }
      }
      for (const auto& layer : model.layers) {
        bool finite = layer.weights.all_finite();
        for (double b : layer.bias) finite = finite && std::isfinite(b);
        if (!finite) {
          double max_abs = 0.0;
          for (double v : logits.values) max_abs = std::max(max_abs, std::abs(v));
          throw DivergedError(epoch, start / config.batch_size, max_abs,
                              "non-finite parameters after update at epoch " +
                                  std::to_string(epoch) + ", batch " +
                                  std::to_string(start / config.batch_size) +
                                  ", max |logit| = " + format_double(max_abs));
        }
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(n);
    record.learning_rate = lr;
    record.validation =
        evaluate(model, val_data, config.threshold, nullptr, threads);
    const double metric =
        config.validation_metric == ValidationMetric::map
            ? record.validation.mean_ap
            : record.validation.macro_f2;
    if (!has_best || metric > log.best_metric) {
      has_best = true;
      log.best_metric = metric;
      log.best_epoch = epoch;
      log.best_model = model;
    }
    log.epochs.push_back(std::move(record));
    if (on_epoch) on_epoch(log.epochs.back());
    if (progress != nullptr) {
      const auto& e = log.epochs.back();
      (*progress) << "epoch " << e.epoch << " loss " << e.train_loss << " val_"
                  << to_string(config.validation_metric) << ' ' << metric
                  << '\n';
      progress->flush();
    }
  }
  return log;
}

MetricsReport evaluate(const Model& model, const LabelDataset& data, double tau,
                       const ClassImportanceWeights* ciw, int threads) {
  data.validate();
  if (!data.has_features()) {
    throw InvalidInputError("evaluation requires a dataset with features");
  }
  if (data.num_classes() != model.config.output_dim) {
    throw InvalidInputError("class count does not match model output_dim");
  }
  Matrix logits = forward(model, data.features, threads);
  if (!logits.all_finite()) {
    throw InvalidInputError("model produced non-finite logits");
  }
  Matrix probabilities(logits.rows, logits.cols);
  for (std::size_t k = 0; k < logits.values.size(); ++k) {
    probabilities.values[k] = detail::sigmoid(logits.values[k]);
  }
  return full_report(ScoreBatch::from(std::move(probabilities)),
                     TargetBatch{data.labels}, tau, ciw, data.class_names);
}

namespace {

std::string lambda_label(const std::optional<double>& lambda) {
  return lambda.has_value() ? format_double(*lambda) : std::string("baseline");
}

}  // namespace

std::string AblationTable::rows_csv() const {
  std::ostringstream os;
  os << "lambda,seed,f1,f2,map,f1_neg\n";
  for (const auto& r : rows) {
    os << lambda_label(r.lambda) << ',' << r.seed << ',' << format_double(r.f1)
       << ',' << format_double(r.f2) << ',' << format_double(r.map) << ','
       << format_double(r.f1_neg) << '\n';
  }
  return os.str();
}

std::string AblationTable::medians_csv() const {
  std::ostringstream os;
  os << "lambda,f1,f2,map,f1_neg\n";
  for (const auto& m : medians) {
    os << lambda_label(m.lambda) << ',' << format_double(m.f1) << ','
       << format_double(m.f2) << ',' << format_double(m.map) << ','
       << format_double(m.f1_neg) << '\n';
  }
  return os.str();
}

AblationTable AblationTable::from_rows_csv(const std::string& text) {
  AblationTable table;
  std::istringstream is(text);
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 6) {
      throw ParseError("ablation csv", line_no, "expected 6 fields");
    }
    AblationRow row;
    if (fields[0] != "baseline") row.lambda = std::stod(fields[0]);
    row.seed = std::stoull(fields[1]);
    row.f1 = std::stod(fields[2]);
    row.f2 = std::stod(fields[3]);
    row.map = std::stod(fields[4]);
    row.f1_neg = std::stod(fields[5]);
    table.rows.push_back(row);
  }
  return table;
}

AblationTable ablate_lambda(const LabelDataset& train_data,
                            const LabelDataset& val_data,
                            const LabelDataset& test_data,
                            const MLPConfig& mlp_config,
                            const TrainConfig& base_config,
                            std::span<const double> lambda_grid,
                            std::size_t n_seeds, int threads,
                            std::ostream* progress) {
  if (n_seeds == 0) throw InvalidConfigError("n_seeds must be > 0");
  for (double lambda : lambda_grid) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
      throw InvalidConfigError("lambda grid values must be in [0,1]");
    }
  }
  AblationTable table;

  // One config list: the baseline (alpha = 0, exactly the base family by the
  // reduction identity) followed by the grid.
  std::vector<std::optional<double>> configs;
  configs.emplace_back(std::nullopt);
  for (double lambda : lambda_grid) configs.emplace_back(lambda);

  for (const auto& lambda : configs) {
    std::vector<double> f1s, f2s, maps, f1_negs;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const std::uint64_t run_seed = sub_seed(base_config.seed, "ablate", s);
      TrainConfig run_config = base_config;
      run_config.seed = run_seed;
      if (lambda.has_value()) {
        run_config.loss.lambda = *lambda;
      } else {
        run_config.loss.alpha = 0.0;
      }
      MLPConfig run_mlp = mlp_config;
      run_mlp.init_seed = sub_seed(run_seed, "init");
      Model model = init_model(run_mlp);
      const TrainingLog log =
          train(model, train_data, val_data, run_config, threads);
      const MetricsReport report = evaluate(log.best_model, test_data,
                                            run_config.threshold, nullptr,
                                            threads);
      AblationRow row;
      row.lambda = lambda;
      row.seed = s;
      row.f1 = report.macro_f1;
      row.f2 = report.macro_f2;
      row.map = report.mean_ap;
      row.f1_neg = report.f1_neg;
      table.rows.push_back(row);
      f1s.push_back(row.f1);
      f2s.push_back(row.f2);
      maps.push_back(row.map);
      f1_negs.push_back(row.f1_neg);
      if (progress != nullptr) {
        (*progress) << "lambda " << lambda_label(lambda) << " seed " << s
                    << " f2 " << row.f2 << '\n';
        progress->flush();
      }
    }
    AblationMedians med;
    med.lambda = lambda;
    med.f1 = median(f1s);
    med.f2 = median(f2s);
    med.map = median(maps);
    med.f1_neg = median(f1_negs);
    table.medians.push_back(med);
  }
  return table;
}

}  // namespace anymlc
