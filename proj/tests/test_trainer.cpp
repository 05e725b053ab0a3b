#include <cmath>

#include <doctest.h>

#include "anymlc/rng.hpp"
#include "anymlc/trainer.hpp"
#include "reference.hpp"

using namespace anymlc;

namespace {

LabelDataset tiny_dataset(std::uint64_t seed, std::size_t n = 120,
                          std::size_t classes = 3, std::size_t features = 4,
                          double negative_fraction = 0.4) {
  SyntheticConfig config;
  config.n_instances = n;
  config.n_classes = classes;
  config.n_features = features;
  config.negative_fraction = negative_fraction;
  config.seed = seed;
  return synthesize(config);
}

std::vector<double*> parameter_view(Model& model) {
  std::vector<double*> params;
  for (auto& layer : model.layers) {
    for (auto& w : layer.weights.values) params.push_back(&w);
    for (auto& b : layer.bias) params.push_back(&b);
  }
  return params;
}

double batch_loss_at(const Model& model, const Matrix& x,
                     const BinaryMatrix& y, const LossConfig& lc) {
  const Matrix logits = forward(model, x);
  return evaluate_loss(LogitBatch::from(logits), TargetBatch{y}, lc).total;
}

}  // namespace

TEST_CASE("init_model") {
  MLPConfig config;
  config.input_dim = 8;
  config.hidden_dims = {16};
  config.output_dim = 4;
  config.init_seed = 5;
  const Model a = init_model(config);
  const Model b = init_model(config);
  CHECK(a == b);
  CHECK(a.parameter_count() == 8 * 16 + 16 + 16 * 4 + 4);  // 212

  MLPConfig linear;
  linear.input_dim = 3;
  linear.output_dim = 2;
  const Model lin = init_model(linear);
  CHECK(lin.layers.size() == 1);
  CHECK(lin.layers[0].weights.rows == 2);
  CHECK(lin.layers[0].weights.cols == 3);
  for (double bias : lin.layers[0].bias) CHECK(bias == 0.0);

  MLPConfig bad;
  bad.input_dim = 0;
  bad.output_dim = 2;
  CHECK_THROWS_AS(init_model(bad), InvalidConfigError);
}

TEST_CASE("forward") {
  MLPConfig config;
  config.input_dim = 2;
  config.output_dim = 2;
  Model model = init_model(config);
  for (auto& w : model.layers[0].weights.values) w = 0.0;
  Matrix x(3, 2);
  x.values = {1.0, 2.0, -1.0, 0.5, 0.0, 0.0};
  const Matrix zero_logits = forward(model, x);
  for (double v : zero_logits.values) CHECK(v == 0.0);

  model.layers[0].weights.values = {1.0, 2.0, -3.0, 0.5};
  model.layers[0].bias = {0.25, -0.5};
  const Matrix logits = forward(model, x);
  CHECK(logits.at(0, 0) == doctest::Approx(1.0 + 4.0 + 0.25));
  CHECK(logits.at(0, 1) == doctest::Approx(-3.0 + 1.0 - 0.5));
  for (double v : logits.values) CHECK(std::isfinite(v));

  Matrix wrong(1, 3);
  CHECK_THROWS_AS(forward(model, wrong), InvalidInputError);
}

TEST_CASE("full-network gradients match finite differences per family") {
  const LabelDataset data = tiny_dataset(17, 24, 3, 4, 0.35);
  MLPConfig mlp;
  mlp.input_dim = 4;
  mlp.hidden_dims = {5};
  mlp.output_dim = 3;
  mlp.init_seed = 101;

  struct Case {
    LossFamily family;
    double alpha, lambda, gamma;
    bool balance;
  };
  const Case cases[] = {
      {LossFamily::bce, 0.0, 0.0, 0.0, false},
      {LossFamily::focal, 0.0, 0.0, 2.0, false},
      {LossFamily::any_bce, 1.0, 0.02, 0.0, false},
      {LossFamily::any_focal, 1.0, 0.02, 2.0, false},
      {LossFamily::any_bce, 1.0, 0.02, 0.0, true},
  };
  for (const auto& c : cases) {
    CAPTURE(static_cast<int>(c.family));
    Model model = init_model(mlp);
    LossConfig lc;
    lc.family = c.family;
    lc.alpha = c.alpha;
    lc.lambda = c.lambda;
    lc.gamma = c.gamma;
    BalanceWeights weights;
    if (c.balance) {
      weights = effective_weights(count_labels(data.labels), 0.9, true);
      lc.balance = &weights;
    }
    const auto analytic =
        loss_gradients(model, data.features, data.labels, lc);
    // flatten in parameter_view order: per layer weights then bias
    std::vector<double> flat;
    for (std::size_t l = 0; l < analytic.weights.size(); ++l) {
      flat.insert(flat.end(), analytic.weights[l].values.begin(),
                  analytic.weights[l].values.end());
      flat.insert(flat.end(), analytic.bias[l].begin(), analytic.bias[l].end());
    }
    auto params = parameter_view(model);
    REQUIRE(params.size() == flat.size());
    const double h = 1e-5;
    for (std::size_t k = 0; k < params.size(); ++k) {
      const double saved = *params[k];
      *params[k] = saved + h;
      const double hi = batch_loss_at(model, data.features, data.labels, lc);
      *params[k] = saved - h;
      const double lo = batch_loss_at(model, data.features, data.labels, lc);
      *params[k] = saved;
      const double fd = (hi - lo) / (2.0 * h);
      CHECK(oracle::grad_close(flat[k], fd, 1e-5, 1e-8));
    }
  }
}

TEST_CASE("momentum 0 and weight decay 0 reduce to plain SGD") {
  const LabelDataset data = tiny_dataset(23, 60, 2, 3, 0.3);
  MLPConfig mlp;
  mlp.input_dim = 3;
  mlp.output_dim = 2;
  mlp.init_seed = 7;

  TrainConfig config;
  config.epochs = 3;
  config.batch_size = data.size();  // single batch per epoch
  config.learning_rate = 0.1;
  config.momentum = 0.0;
  config.weight_decay = 0.0;
  config.lr_decay = {};
  config.loss.family = LossFamily::bce;
  config.class_balance = false;
  config.seed = 11;

  Model trained = init_model(mlp);
  train(trained, data, data, config);

  // Hand-rolled reference: theta_{t+1} = theta_t - lr * g(theta_t).
  Model reference = init_model(mlp);
  LossConfig lc;
  lc.family = LossFamily::bce;
  for (int step = 0; step < 3; ++step) {
    const auto g = loss_gradients(reference, data.features, data.labels, lc);
    for (std::size_t l = 0; l < reference.layers.size(); ++l) {
      for (std::size_t k = 0; k < reference.layers[l].weights.values.size();
           ++k) {
        reference.layers[l].weights.values[k] -= 0.1 * g.weights[l].values[k];
      }
      for (std::size_t k = 0; k < reference.layers[l].bias.size(); ++k) {
        reference.layers[l].bias[k] -= 0.1 * g.bias[l][k];
      }
    }
  }
  for (std::size_t l = 0; l < trained.layers.size(); ++l) {
    for (std::size_t k = 0; k < trained.layers[l].weights.values.size(); ++k) {
      CHECK(trained.layers[l].weights.values[k] ==
            doctest::Approx(reference.layers[l].weights.values[k])
                .epsilon(1e-10));
    }
  }
}

TEST_CASE("learning rate zero leaves parameters unchanged") {
  const LabelDataset data = tiny_dataset(29, 40, 2, 3, 0.4);
  MLPConfig mlp;
  mlp.input_dim = 3;
  mlp.output_dim = 2;
  mlp.init_seed = 3;
  TrainConfig config;
  config.epochs = 2;
  config.learning_rate = 0.0;
  config.lr_decay = {};
  config.loss.family = LossFamily::any_bce;
  config.class_balance = false;
  Model model = init_model(mlp);
  const Model before = model;
  train(model, data, data, config);
  CHECK(model == before);
}

TEST_CASE("single instance overfits under any_bce") {
  LabelDataset data;
  data.instance_ids = {"only"};
  data.class_names = {"a", "b"};
  data.labels = BinaryMatrix(1, 2);
  data.labels.values = {1, 0};
  data.features = Matrix(1, 3);
  data.features.values = {0.5, -1.0, 2.0};

  MLPConfig mlp;
  mlp.input_dim = 3;
  mlp.output_dim = 2;
  mlp.init_seed = 1;
  TrainConfig config;
  config.epochs = 200;
  config.batch_size = 1;
  config.learning_rate = 0.5;
  config.momentum = 0.0;
  config.lr_decay = {};
  config.loss.family = LossFamily::any_bce;
  config.loss.alpha = 1.0;
  config.loss.lambda = 0.02;
  config.class_balance = false;
  Model model = init_model(mlp);
  const auto log = train(model, data, data, config);
  CHECK(log.epochs.back().train_loss < 0.01);
  for (std::size_t e = 6; e < log.epochs.size(); ++e) {
    CHECK(log.epochs[e].train_loss <= log.epochs[e - 1].train_loss);
  }
  // evaluating the overfit run on its own data is near-perfect; the absent
  // class contributes F1 = 0 by the zero-denominator convention
  const auto report = evaluate(model, data, 0.5);
  CHECK(report.per_class[0].f1 == 1.0);
  CHECK(report.per_class[0].recall == 1.0);
  CHECK(report.mean_ap == 1.0);
  CHECK(report.macro_f1 == 0.5);
}

TEST_CASE("training is deterministic across runs and thread counts") {
  const LabelDataset train_data = tiny_dataset(31, 150, 3, 4, 0.4);
  const LabelDataset val_data = tiny_dataset(32, 60, 3, 4, 0.4);
  MLPConfig mlp;
  mlp.input_dim = 4;
  mlp.hidden_dims = {6};
  mlp.output_dim = 3;
  mlp.init_seed = 77;
  TrainConfig config;
  config.epochs = 4;
  config.batch_size = 32;
  config.loss.family = LossFamily::any_focal;
  config.lr_decay = {{2, 0.1}};
  config.seed = 13;

  Model m1 = init_model(mlp);
  const auto log1 = train(m1, train_data, val_data, config, /*threads=*/1);
  Model m2 = init_model(mlp);
  const auto log2 = train(m2, train_data, val_data, config, /*threads=*/1);
  Model m4 = init_model(mlp);
  const auto log4 = train(m4, train_data, val_data, config, /*threads=*/4);

  CHECK(m1 == m2);
  CHECK(m1 == m4);
  CHECK(log1.to_json().dump() == log2.to_json().dump());
  CHECK(log1.to_json().dump() == log4.to_json().dump());
  CHECK(log1.best_model == log4.best_model);
  CHECK(log1.best_epoch == log4.best_epoch);
}

TEST_CASE("nan loss aborts with diagnostics") {
  const LabelDataset data = tiny_dataset(41, 80, 2, 3, 0.3);
  MLPConfig mlp;
  mlp.input_dim = 3;
  mlp.output_dim = 2;
  mlp.init_seed = 5;
  TrainConfig config;
  config.epochs = 30;
  config.learning_rate = 1e18;  // guaranteed blow-up
  config.lr_decay = {};
  config.loss.family = LossFamily::bce;
  config.class_balance = false;
  Model model = init_model(mlp);
  CHECK_THROWS_AS(train(model, data, data, config), DivergedError);
}

TEST_CASE("evaluate") {
  const LabelDataset data = tiny_dataset(51, 100, 3, 4, 0.5);
  MLPConfig mlp;
  mlp.input_dim = 4;
  mlp.output_dim = 3;
  mlp.init_seed = 9;
  Model model = init_model(mlp);

  SUBCASE("huge negative biases predict all-negative") {
    for (auto& b : model.layers[0].bias) b = -100.0;
    for (auto& w : model.layers[0].weights.values) w = 0.0;
    const auto report = evaluate(model, data, 0.5);
    const double neg_fraction = report.negative_fraction;
    // the trivially-negative predictor: precision = negative fraction,
    // recall = 1
    const double expected_f1 =
        2.0 * neg_fraction / (neg_fraction + 1.0);
    CHECK(report.f1_neg == doctest::Approx(expected_f1).epsilon(1e-12));
    CHECK(report.macro_f1 == 0.0);
  }

  SUBCASE("evaluate twice gives identical reports") {
    const auto a = evaluate(model, data, 0.5);
    const auto b = evaluate(model, data, 0.5);
    CHECK(a.to_json().dump() == b.to_json().dump());
  }

  SUBCASE("report agrees with the brute-force reference on exported scores") {
    const Matrix logits = forward(model, data.features);
    Matrix probabilities(logits.rows, logits.cols);
    for (std::size_t k = 0; k < logits.values.size(); ++k) {
      probabilities.values[k] = 1.0 / (1.0 + std::exp(-logits.values[k]));
    }
    const auto report = evaluate(model, data, 0.5);
    const auto brute = oracle::brute_report(probabilities, data.labels, 0.5);
    CHECK(report.macro_f1 == brute.macro_f1);
    CHECK(report.macro_f2 == brute.macro_f2);
    CHECK(report.f1_neg == brute.f1_neg);
    CHECK(std::abs(report.mean_ap - brute.mean_ap) <= 1e-12);
  }
}

TEST_CASE("checkpoint json round trip") {
  MLPConfig mlp;
  mlp.input_dim = 4;
  mlp.hidden_dims = {5};
  mlp.output_dim = 3;
  mlp.init_seed = 2024;
  const Model model = init_model(mlp);
  const auto j = model.to_json();
  const Model loaded = Model::from_json(j);
  CHECK(loaded == model);
  CHECK(loaded.config.hidden_dims == model.config.hidden_dims);

  nlohmann::json bad = j;
  bad["format_version"] = 99;
  CHECK_THROWS_AS(Model::from_json(bad), InvalidInputError);

  nlohmann::json broken_chain = j;
  broken_chain["layers"][1]["cols"] = 4;  // does not match hidden dim 5
  broken_chain["layers"][1]["weights"] = std::vector<double>(12, 0.0);
  CHECK_THROWS_AS(Model::from_json(broken_chain), InvalidInputError);
}

TEST_CASE("ablate_lambda") {
  const LabelDataset full = tiny_dataset(61, 240, 3, 4, 0.45);
  SplitSpec spec;
  spec.seed = 5;
  const auto split = split_dataset(full, spec);

  MLPConfig mlp;
  mlp.input_dim = 4;
  mlp.output_dim = 3;
  TrainConfig base;
  base.epochs = 3;
  base.batch_size = 32;
  base.loss.family = LossFamily::any_bce;
  base.loss.alpha = 0.0;  // baseline and lambda rows must then coincide
  base.lr_decay = {};
  base.seed = 3;

  SUBCASE("alpha 0 base makes lambda rows equal the baseline") {
    const double grid[] = {0.0};
    const auto table = ablate_lambda(split.train, split.val, split.test, mlp,
                                     base, grid, 2);
    REQUIRE(table.rows.size() == 4);  // (baseline + one lambda) x 2 seeds
    for (std::size_t s = 0; s < 2; ++s) {
      const auto& baseline = table.rows[s];
      const auto& lambda_row = table.rows[2 + s];
      CHECK_FALSE(baseline.lambda.has_value());
      CHECK(lambda_row.lambda.has_value());
      CHECK(baseline.f1 == lambda_row.f1);
      CHECK(baseline.f2 == lambda_row.f2);
      CHECK(baseline.map == lambda_row.map);
      CHECK(baseline.f1_neg == lambda_row.f1_neg);
    }
  }

  SUBCASE("replicated grid values give identical rows; csv round trips") {
    TrainConfig with_any = base;
    with_any.loss.alpha = 1.0;
    const double grid[] = {0.02, 0.02};
    const auto table = ablate_lambda(split.train, split.val, split.test, mlp,
                                     with_any, grid, 1);
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[1].f2 == table.rows[2].f2);
    CHECK(table.rows[1].map == table.rows[2].map);

    const auto csv = table.rows_csv();
    const auto parsed = AblationTable::from_rows_csv(csv);
    REQUIRE(parsed.rows.size() == table.rows.size());
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
      CHECK(parsed.rows[k].lambda.has_value() ==
            table.rows[k].lambda.has_value());
      CHECK(parsed.rows[k].seed == table.rows[k].seed);
      CHECK(parsed.rows[k].f1 == table.rows[k].f1);
      CHECK(parsed.rows[k].f2 == table.rows[k].f2);
      CHECK(parsed.rows[k].map == table.rows[k].map);
      CHECK(parsed.rows[k].f1_neg == table.rows[k].f1_neg);
    }
    CHECK(table.medians.size() == 3);  // baseline + each grid entry
  }
}
