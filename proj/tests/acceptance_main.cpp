// Acceptance suite: one pass/fail line per criterion, exit 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "anymlc/class_balance.hpp"
#include "anymlc/data.hpp"
#include "anymlc/losses.hpp"
#include "anymlc/manifest.hpp"
#include "anymlc/metrics.hpp"
#include "anymlc/numerics.hpp"
#include "anymlc/rng.hpp"
#include "anymlc/trainer.hpp"
#include "reference.hpp"

using namespace anymlc;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail = "") {
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << ": " << name;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << std::endl;
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

struct RandomBatch {
  LogitBatch logits;
  TargetBatch targets;
};

RandomBatch random_batch(Rng& rng, std::size_t max_n, std::size_t max_m,
                         double z_range) {
  const std::size_t n = 1 + rng.uniform_index(max_n);
  const std::size_t m = 1 + rng.uniform_index(max_m);
  Matrix z(n, m);
  BinaryMatrix y(n, m);
  for (std::size_t k = 0; k < z.values.size(); ++k) {
    z.values[k] = rng.uniform(-z_range, z_range);
    y.values[k] = rng.uniform() < 0.35 ? 1 : 0;
  }
  return {LogitBatch::from(std::move(z)), TargetBatch::from(std::move(y))};
}

BalanceWeights random_weights(Rng& rng, std::size_t m) {
  ClassCounts counts;
  counts.per_class.resize(m);
  for (auto& c : counts.per_class) c = 1 + rng.uniform_index(1000);
  counts.negative = 1 + rng.uniform_index(1000);
  return effective_weights(counts, rng.uniform(0.0, 0.9999), true);
}

// ---------------------------------------------------------------- shared CLI

fs::path work_dir() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / "anymlc-acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

int run_cli(const std::string& args) {
  const std::string command = std::string(ANYMLC_CLI_BIN) + " " + args + " >" +
                              (work_dir() / "cli_out.txt").string() + " 2>" +
                              (work_dir() / "cli_err.txt").string();
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ------------------------------------------------------------- criterion 1

bool criterion_gradients(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(0xACC1);
  struct Config {
    LossFamily family;
    double alpha, lambda, gamma;
  };
  const Config configs[] = {
      {LossFamily::bce, 0.0, 0.0, 0.0},
      {LossFamily::focal, 0.0, 0.0, 2.0},
      {LossFamily::any_bce, 1.0, 0.02, 0.0},
      {LossFamily::any_focal, 1.0, 0.02, 2.0},
  };
  bool ok = true;
  double worst_rel = 0.0;
  for (const auto& cfg : configs) {
    for (int use_balance = 0; use_balance < 2 && ok; ++use_balance) {
      for (int draw = 0; draw < 1000 && ok; ++draw) {
        auto [z, y] = random_batch(rng, 8, 16, 6.0);
        LossConfig lc;
        lc.family = cfg.family;
        lc.alpha = cfg.alpha;
        lc.lambda = rng.uniform();
        lc.gamma = cfg.gamma;
        BalanceWeights weights;
        oracle::BalanceRef balance_ref;
        const oracle::BalanceRef* balance_ptr = nullptr;
        if (use_balance) {
          weights = random_weights(rng, y.classes());
          lc.balance = &weights;
          balance_ref = oracle::to_balance_ref(weights);
          balance_ptr = &balance_ref;
        }
        const auto result = evaluate_loss(z, y, lc);
        const auto fd = oracle::fd_grad_logits(z.values, y.values, lc.alpha,
                                               lc.lambda, lc.gamma, balance_ptr);
        for (std::size_t k = 0; k < fd.values.size(); ++k) {
          const double a = result.grad_logits.values[k];
          const double f = fd.values[k];
          if (!oracle::grad_close(a, f, 1e-6, 1e-9)) {
            ok = false;
            break;
          }
          const double mag = std::max(std::abs(a), std::abs(f));
          if (mag >= 1e-3) worst_rel = std::max(worst_rel, std::abs(a - f) / mag);
        }
      }
    }
  }

  // End-to-end MLP parameter gradients vs finite differences.
  if (ok) {
    SyntheticConfig sc;
    sc.n_instances = 40;
    sc.n_classes = 3;
    sc.n_features = 4;
    sc.negative_fraction = 0.35;
    sc.seed = 77;
    const auto data = synthesize(sc);
    MLPConfig mlp;
    mlp.input_dim = 4;
    mlp.hidden_dims = {5};
    mlp.output_dim = 3;
    for (const auto& cfg : configs) {
      mlp.init_seed = 1000 + static_cast<std::uint64_t>(cfg.gamma * 10) +
                      static_cast<std::uint64_t>(cfg.alpha);
      Model model = init_model(mlp);
      LossConfig lc;
      lc.family = cfg.family;
      lc.alpha = cfg.alpha;
      lc.lambda = cfg.lambda;
      lc.gamma = cfg.gamma;
      const auto analytic = loss_gradients(model, data.features, data.labels, lc);
      std::vector<double> flat;
      for (std::size_t l = 0; l < analytic.weights.size(); ++l) {
        flat.insert(flat.end(), analytic.weights[l].values.begin(),
                    analytic.weights[l].values.end());
        flat.insert(flat.end(), analytic.bias[l].begin(),
                    analytic.bias[l].end());
      }
      std::vector<double*> params;
      for (auto& layer : model.layers) {
        for (auto& w : layer.weights.values) params.push_back(&w);
        for (auto& b : layer.bias) params.push_back(&b);
      }
      const double h = 1e-5;
      for (std::size_t k = 0; k < params.size() && ok; ++k) {
        const double saved = *params[k];
        *params[k] = saved + h;
        const double hi =
            evaluate_loss(LogitBatch::from(forward(model, data.features)),
                          TargetBatch{data.labels}, lc)
                .total;
        *params[k] = saved - h;
        const double lo =
            evaluate_loss(LogitBatch::from(forward(model, data.features)),
                          TargetBatch{data.labels}, lc)
                .total;
        *params[k] = saved;
        const double fd = (hi - lo) / (2.0 * h);
        if (!oracle::grad_close(flat[k], fd, 1e-5, 1e-8)) ok = false;
      }
    }
  }

  const double elapsed = seconds_since(start);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "worst rel err %.2e, %.1f s", worst_rel,
                elapsed);
  detail = buf;
  return ok && elapsed < 60.0;
}

// ------------------------------------------------------------- criterion 2

bool criterion_identity(std::string& detail) {
  Rng rng(0xACC2);
  double worst = 0.0;
  for (int iter = 0; iter < 10000; ++iter) {
    const std::size_t m = 1 + rng.uniform_index(12);
    std::vector<double> z(m);
    std::vector<std::uint8_t> y(m);
    for (std::size_t j = 0; j < m; ++j) {
      z[j] = rng.uniform(-30.0, 30.0);
      y[j] = rng.uniform() < 0.4 ? 1 : 0;
    }
    const double lambda = rng.uniform();
    const double via_logit = detail::sigmoid(any_class_logit(z, y, lambda));
    const double direct = static_cast<double>(
        oracle::any_probability_ld(z, y, static_cast<long double>(lambda)));
    worst = std::max(worst, std::abs(via_logit - direct));
  }
  bool finite_ok = true;
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t m = 1 + rng.uniform_index(12);
    std::vector<double> z(m);
    std::vector<std::uint8_t> y(m);
    for (std::size_t j = 0; j < m; ++j) {
      z[j] = rng.uniform() < 0.5 ? 500.0 : -500.0;
      y[j] = rng.uniform() < 0.4 ? 1 : 0;
    }
    const double p = detail::sigmoid(any_class_logit(z, y, rng.uniform()));
    if (!std::isfinite(p)) finite_ok = false;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max |diff| %.2e", worst);
  detail = buf;
  return worst < 1e-12 && finite_ok;
}

// ------------------------------------------------------------- criterion 3

bool criterion_lambda_independence(std::string&) {
  Rng rng(0xACC3);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t n = 1 + rng.uniform_index(6);
    const std::size_t m = 1 + rng.uniform_index(12);
    Matrix z(n, m);
    for (double& v : z.values) v = rng.uniform(-8.0, 8.0);
    const auto logits = LogitBatch::from(std::move(z));
    const auto targets =
        TargetBatch::from(BinaryMatrix(n, m));  // all-zero rows
    const auto ref_b = any_bce_loss(logits, targets, 1.0, 0.0);
    const auto ref_f = any_focal_loss(logits, targets, 1.0, 0.0, 2.0);
    for (double lambda : {0.02, 0.5, 1.0}) {
      const auto b = any_bce_loss(logits, targets, 1.0, lambda);
      const auto f = any_focal_loss(logits, targets, 1.0, lambda, 2.0);
      if (b.total != ref_b.total || b.per_instance != ref_b.per_instance ||
          b.grad_logits.values != ref_b.grad_logits.values) {
        return false;
      }
      if (f.total != ref_f.total || f.per_instance != ref_f.per_instance ||
          f.grad_logits.values != ref_f.grad_logits.values) {
        return false;
      }
    }
  }
  return true;
}

// ------------------------------------------------------------- criterion 4

bool criterion_reductions(std::string&) {
  Rng rng(0xACC4);
  for (int iter = 0; iter < 100; ++iter) {
    auto [z, y] = random_batch(rng, 6, 10, 6.0);
    const double lambda = rng.uniform();
    const double gamma = rng.uniform(0.0, 4.0);

    const auto bce = bce_loss(z, y);
    const auto any0 = any_bce_loss(z, y, 0.0, lambda);
    if (any0.total != bce.total ||
        any0.grad_logits.values != bce.grad_logits.values) {
      return false;
    }
    const auto focal = focal_loss(z, y, gamma);
    const auto anyf0 = any_focal_loss(z, y, 0.0, lambda, gamma);
    if (anyf0.total != focal.total ||
        anyf0.grad_logits.values != focal.grad_logits.values) {
      return false;
    }
    const auto focal0 = focal_loss(z, y, 0.0);
    if (focal0.total != bce.total ||
        focal0.grad_logits.values != bce.grad_logits.values) {
      return false;
    }
    const auto anyb = any_bce_loss(z, y, 0.7, lambda);
    const auto anyf_g0 = any_focal_loss(z, y, 0.7, lambda, 0.0);
    if (anyf_g0.total != anyb.total ||
        anyf_g0.grad_logits.values != anyb.grad_logits.values) {
      return false;
    }

    // beta = 0 yields exactly unit weights
    ClassCounts counts;
    counts.per_class.resize(y.classes());
    for (auto& c : counts.per_class) c = 1 + rng.uniform_index(5000);
    counts.negative = 1 + rng.uniform_index(5000);
    const auto unit = effective_weights(counts, 0.0, true);
    for (double w : unit.per_class) {
      if (w != 1.0) return false;
    }
    if (*unit.negative != 1.0) return false;
  }

  // uniform weights leave losses unchanged (single-label and negative rows,
  // where the cumulative weight is exactly 1)
  for (int iter = 0; iter < 50; ++iter) {
    const std::size_t n = 1 + rng.uniform_index(6);
    const std::size_t m = 1 + rng.uniform_index(8);
    Matrix z(n, m);
    BinaryMatrix y(n, m);
    for (double& v : z.values) v = rng.uniform(-6.0, 6.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.uniform() < 0.6) y.at(i, rng.uniform_index(m)) = 1;
    }
    const auto logits = LogitBatch::from(std::move(z));
    const auto targets = TargetBatch::from(std::move(y));
    BalanceWeights uniform;
    uniform.per_class.assign(m, 1.0);
    uniform.negative = 1.0;
    const auto base = any_focal_loss(logits, targets, 1.0, 0.02, 2.0);
    const auto scaled = apply_class_balance(base, targets, uniform);
    if (scaled.total != base.total ||
        scaled.grad_logits.values != base.grad_logits.values) {
      return false;
    }
  }
  return true;
}

// ------------------------------------------------------------- criterion 5

bool criterion_negative_gradient(std::string& detail) {
  Rng rng(0xACC5);
  double worst = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = 1 + rng.uniform_index(4);
    const std::size_t m = 1 + rng.uniform_index(12);
    Matrix z(n, m);
    for (double& v : z.values) v = rng.uniform(-6.0, 6.0);
    const double alpha = 0.1 + 0.9 * rng.uniform();
    const auto logits = LogitBatch::from(std::move(z));
    const auto targets = TargetBatch::from(BinaryMatrix(n, m));

    const auto with_any = any_bce_loss(logits, targets, alpha, 0.0);
    const auto base = bce_loss(logits, targets);
    const auto fd_any = oracle::fd_grad_logits(logits.values, targets.values,
                                               alpha, 0.0, 0.0);
    const auto fd_base = oracle::fd_grad_logits(logits.values, targets.values,
                                                0.0, 0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double mean = 0.0;
      for (double v : logits.values.row(i)) mean += v;
      mean /= static_cast<double>(m);
      const double expected =
          alpha * detail::sigmoid(mean) / static_cast<double>(m) /
          static_cast<double>(n);
      for (std::size_t j = 0; j < m; ++j) {
        const double analytic_contribution =
            with_any.grad_logits.at(i, j) - base.grad_logits.at(i, j);
        const double fd_contribution =
            fd_any.at(i, j) - fd_base.at(i, j);
        worst = std::max(worst, std::abs(analytic_contribution - expected));
        worst = std::max(worst, std::abs(fd_contribution - expected));
      }
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max |diff| %.2e", worst);
  detail = buf;
  return worst < 1e-9;
}

// ------------------------------------------------------------- criterion 6

bool criterion_metrics_oracle(std::string&) {
  Rng rng(0xACC6);
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t n = 1 + rng.uniform_index(50);
    const std::size_t m = 1 + rng.uniform_index(8);
    Matrix p(n, m);
    BinaryMatrix y(n, m);
    for (std::size_t k = 0; k < p.values.size(); ++k) {
      p.values[k] = static_cast<double>(rng.uniform_index(21)) / 20.0;
      y.values[k] = rng.uniform() < 0.3 ? 1 : 0;
    }
    std::vector<double> ciw(m);
    for (auto& w : ciw) w = 0.25 + rng.uniform();
    const auto scores = ScoreBatch::from(std::move(p));
    const auto targets = TargetBatch::from(std::move(y));
    ClassImportanceWeights importance{ciw};
    const auto report = full_report(scores, targets, 0.5, &importance);
    const auto brute = oracle::brute_report(scores.probabilities,
                                            targets.values, 0.5, &ciw);
    if (report.macro_f1 != brute.macro_f1) return false;
    if (report.macro_f2 != brute.macro_f2) return false;
    if (report.f1_neg != brute.f1_neg) return false;
    if (*report.f2_ciw != *brute.f2_ciw) return false;
    if (std::abs(report.mean_ap - brute.mean_ap) > 1e-12) return false;
    for (std::size_t j = 0; j < m; ++j) {
      if (report.per_class[j].f1 != brute.per_class[j].f1) return false;
      if (report.per_class[j].f2 != brute.per_class[j].f2) return false;
      if (report.per_class[j].average_precision.has_value() !=
          brute.per_class[j].has_ap) {
        return false;
      }
      if (brute.per_class[j].has_ap &&
          std::abs(*report.per_class[j].average_precision -
                   brute.per_class[j].ap) > 1e-12) {
        return false;
      }
    }
  }
  return true;
}

// ------------------------------------------------------------- criterion 7

bool criterion_balance_normalization(std::string&) {
  Rng rng(0xACC7);
  for (int iter = 0; iter < 500; ++iter) {
    const std::size_t m = 1 + rng.uniform_index(30);
    ClassCounts counts;
    counts.per_class.resize(m);
    for (auto& c : counts.per_class) c = 1 + rng.uniform_index(1000000);
    counts.negative = 1 + rng.uniform_index(1000000);
    const double beta = rng.uniform(0.0, 0.99999);
    const auto w = effective_weights(counts, beta, false);
    double sum = 0.0;
    for (double v : w.per_class) sum += v;
    if (std::abs(sum - static_cast<double>(m)) > 1e-9) return false;
    const auto wn = effective_weights(counts, beta, true);
    sum = *wn.negative;
    for (double v : wn.per_class) sum += v;
    if (std::abs(sum - static_cast<double>(m + 1)) > 1e-9) return false;
  }
  // the configured default matches the protocol value
  return TrainConfig{}.cb_beta == 0.9999;
}

// ---------------------------------------------------------- criteria 8 & 9

struct ExperimentData {
  LabelDataset train, val, test;
};

ExperimentData experiment_data() {
  SyntheticConfig config;
  config.n_instances = 10000;
  config.n_classes = 8;
  config.n_features = 16;
  config.negative_fraction = 0.5;
  config.class_skew = 1.0;
  config.seed = 20240807;
  const auto full = synthesize(config);
  SplitSpec spec;
  spec.seed = 1;
  auto split = split_dataset(full, spec);
  return {std::move(split.train), std::move(split.val), std::move(split.test)};
}

TrainConfig default_train_config(LossFamily family, std::uint64_t seed) {
  TrainConfig config;  // desk-scale defaults: 20 epochs, batch 64, lr 0.05,
                       // momentum 0.9, decay x0.1 at epochs 10 and 15
  config.loss.family = family;
  config.loss.alpha = 1.0;
  config.loss.lambda = 0.02;
  config.loss.gamma = 2.0;
  config.seed = seed;
  return config;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool criterion_directional(const ExperimentData& data, std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  MLPConfig mlp;
  mlp.input_dim = data.train.features.cols;
  mlp.output_dim = data.train.num_classes();

  std::map<std::string, std::vector<double>> f2s, f1_negs;
  for (const LossFamily family :
       {LossFamily::bce, LossFamily::any_bce, LossFamily::focal,
        LossFamily::any_focal}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const std::uint64_t run_seed = sub_seed(900, "experiment", s);
      TrainConfig config = default_train_config(family, run_seed);
      MLPConfig run_mlp = mlp;
      run_mlp.init_seed = sub_seed(run_seed, "init");
      Model model = init_model(run_mlp);
      const auto log = train(model, data.train, data.val, config);
      const auto report =
          evaluate(log.best_model, data.test, config.threshold);
      f2s[to_string(family)].push_back(report.macro_f2);
      f1_negs[to_string(family)].push_back(report.f1_neg);
    }
  }
  const double f2_bce = median_of(f2s["bce"]);
  const double f2_any_bce = median_of(f2s["any_bce"]);
  const double f2_focal = median_of(f2s["focal"]);
  const double f2_any_focal = median_of(f2s["any_focal"]);
  const double neg_bce = median_of(f1_negs["bce"]);
  const double neg_any_bce = median_of(f1_negs["any_bce"]);
  const double neg_focal = median_of(f1_negs["focal"]);
  const double neg_any_focal = median_of(f1_negs["any_focal"]);
  const double elapsed = seconds_since(start);

  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "F2 bce %.4f->%.4f, focal %.4f->%.4f; F1-Neg bce %.4f->%.4f, "
                "focal %.4f->%.4f; %.0f s",
                f2_bce, f2_any_bce, f2_focal, f2_any_focal, neg_bce,
                neg_any_bce, neg_focal, neg_any_focal, elapsed);
  detail = buf;
  return f2_any_bce >= f2_bce && f2_any_focal >= f2_focal &&
         (neg_bce - neg_any_bce) <= 0.02 && (neg_focal - neg_any_focal) <= 0.02 &&
         elapsed < 600.0;
}

bool criterion_ablation_shape(const ExperimentData& data, std::string& detail) {
  MLPConfig mlp;
  mlp.input_dim = data.train.features.cols;
  mlp.output_dim = data.train.num_classes();
  const TrainConfig base = default_train_config(LossFamily::any_bce, 901);
  const std::vector<double> grid{0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  const auto table =
      ablate_lambda(data.train, data.val, data.test, mlp, base, grid, 5);

  double f2_at_one = 0.0;
  double best_small = 0.0;
  for (const auto& med : table.medians) {
    if (!med.lambda.has_value()) continue;
    if (*med.lambda == 1.0) f2_at_one = med.f2;
    if (*med.lambda == 0.01 || *med.lambda == 0.02 || *med.lambda == 0.05) {
      best_small = std::max(best_small, med.f2);
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "median F2 at lambda=1: %.4f, best small: %.4f",
                f2_at_one, best_small);
  detail = buf;
  return f2_at_one <= best_small;
}

// ------------------------------------------------------------ criterion 10

long double surface_closed_form(SurfaceCase c, int y1, int y2, long double p1,
                                long double p2, long double lambda) {
  const long double pt1 = y1 != 0 ? p1 : 1.0L - p1;
  const long double pt2 = y2 != 0 ? p2 : 1.0L - p2;
  const int ya = (y1 != 0 || y2 != 0) ? 1 : 0;
  long double w1 = 1.0L, w2 = 1.0L;
  if (ya != 0) {
    w1 = y1 != 0 ? 1.0L : lambda;
    w2 = y2 != 0 ? 1.0L : lambda;
  }
  const long double sw = w1 + w2;
  const long double g1 =
      std::exp((w1 * std::log(p1) + w2 * std::log(p2)) / sw);
  const long double g0 =
      std::exp((w1 * std::log(1.0L - p1) + w2 * std::log(1.0L - p2)) / sw);
  const long double pa = g1 / (g1 + g0);
  const long double pa_t = ya != 0 ? pa : 1.0L - pa;
  switch (c) {
    case SurfaceCase::bce: return pt1 * pt2;
    case SurfaceCase::any_class: return pa_t;
    case SurfaceCase::redesigned: return pt1 * pt2 * pa_t;
  }
  return 0.0L;
}

bool criterion_surface(std::string& detail) {
  const struct Panel {
    const char* case_name;
    SurfaceCase surface_case;
    int y1, y2;
  } panels[] = {
      {"bce", SurfaceCase::bce, 1, 1},
      {"any", SurfaceCase::any_class, 1, 1},
      {"redesigned", SurfaceCase::redesigned, 1, 1},
      {"bce", SurfaceCase::bce, 0, 1},
      {"any", SurfaceCase::any_class, 0, 1},
      {"redesigned", SurfaceCase::redesigned, 0, 1},
  };
  double worst = 0.0;
  bool midpoint_checked = false;
  for (const auto& panel : panels) {
    const fs::path out = work_dir() / (std::string("surface_") +
                                       panel.case_name + "_" +
                                       std::to_string(panel.y1) +
                                       std::to_string(panel.y2) + ".csv");
    const std::string args = std::string("surface --case ") + panel.case_name +
                             " --targets " + std::to_string(panel.y1) + "," +
                             std::to_string(panel.y2) +
                             " --lambda 0.05 --resolution 101 --out " +
                             out.string();
    if (run_cli(args) != 0) return false;
    std::ifstream in(out);
    std::string line;
    std::getline(in, line);
    if (line != "p1,p2,value") return false;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      const double p1 = std::stod(line.substr(0, c1));
      const double p2 = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
      const double value = std::stod(line.substr(c2 + 1));
      const double expected = static_cast<double>(surface_closed_form(
          panel.surface_case, panel.y1, panel.y2, p1, p2, 0.05L));
      worst = std::max(worst, std::abs(value - expected));
      if (panel.surface_case == SurfaceCase::any_class && panel.y1 == 1 &&
          panel.y2 == 1 && std::abs(p1 - 0.5) < 1e-9 &&
          std::abs(p2 - 0.5) < 1e-9) {
        midpoint_checked = true;
        worst = std::max(worst, std::abs(value - 0.5));
      }
    }
    if (rows != 101 * 101) return false;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max |diff| %.2e", worst);
  detail = buf;
  return worst <= 1e-12 && midpoint_checked;
}

// ------------------------------------------------------------ criterion 11

nlohmann::json output_digests(const fs::path& manifest_path) {
  return RunManifest::read(manifest_path).config.at("output_digests");
}

std::string rerun_args(const fs::path& manifest_path) {
  const auto manifest = RunManifest::read(manifest_path);
  std::string args;
  for (std::size_t i = 1; i < manifest.argv.size(); ++i) {
    args += manifest.argv[i] + " ";
  }
  return args;
}

bool criterion_reproducibility(std::string& detail) {
  const fs::path dir = work_dir() / "repro";
  fs::create_directories(dir);
  const fs::path data = dir / "data.csv";

  const std::string gen_args =
      "gen-data --instances 600 --classes 4 --features 6 "
      "--negative-fraction 0.5 --seed 21 --out " + data.string();
  if (run_cli(gen_args) != 0) return false;
  const auto gen_digests = output_digests(data.string() + ".manifest.json");
  if (run_cli(rerun_args(data.string() + ".manifest.json")) != 0) return false;
  if (output_digests(data.string() + ".manifest.json") != gen_digests) {
    detail = "gen-data rerun diverged";
    return false;
  }

  if (run_cli("split --data " + data.string() +
              " --fractions 0.7 0.15 0.15 --seed 3 --out " +
              (dir / "part").string()) != 0) {
    return false;
  }

  const std::string train_common =
      "train --train-data " + (dir / "part.train.csv").string() +
      " --val-data " + (dir / "part.val.csv").string() +
      " --epochs 3 --batch-size 32 --lr-decay 2:0.1 --seed 5 ";
  if (run_cli(train_common + "--threads 1 --out " + (dir / "t1").string()) != 0) {
    return false;
  }
  const auto t1 = output_digests(dir / "t1" / "manifest.json");
  if (run_cli(rerun_args(dir / "t1" / "manifest.json")) != 0) return false;
  if (output_digests(dir / "t1" / "manifest.json") != t1) {
    detail = "train rerun diverged";
    return false;
  }
  if (run_cli(train_common + "--threads 4 --out " + (dir / "t4").string()) != 0) {
    return false;
  }
  const auto t4 = output_digests(dir / "t4" / "manifest.json");
  // same file names under different directories; compare digest lists
  std::vector<std::string> v1, v4;
  for (const auto& [k, v] : t1.items()) v1.push_back(v.get<std::string>());
  for (const auto& [k, v] : t4.items()) v4.push_back(v.get<std::string>());
  std::sort(v1.begin(), v1.end());
  std::sort(v4.begin(), v4.end());
  if (v1 != v4) {
    detail = "threads 1 vs 4 diverged";
    return false;
  }

  const std::string eval_common =
      "eval --model " + (dir / "t1" / "checkpoint.json").string() +
      " --data " + (dir / "part.test.csv").string() + " ";
  if (run_cli(eval_common + "--threads 1 --out " + (dir / "e1").string()) != 0) {
    return false;
  }
  const auto e1 = output_digests(dir / "e1" / "manifest.json");
  if (run_cli(rerun_args(dir / "e1" / "manifest.json")) != 0) return false;
  if (output_digests(dir / "e1" / "manifest.json") != e1) {
    detail = "eval rerun diverged";
    return false;
  }
  if (run_cli(eval_common + "--threads 4 --out " + (dir / "e4").string()) != 0) {
    return false;
  }
  const auto e4 = output_digests(dir / "e4" / "manifest.json");
  std::vector<std::string> w1, w4;
  for (const auto& [k, v] : e1.items()) w1.push_back(v.get<std::string>());
  for (const auto& [k, v] : e4.items()) w4.push_back(v.get<std::string>());
  std::sort(w1.begin(), w1.end());
  std::sort(w4.begin(), w4.end());
  if (w1 != w4) {
    detail = "eval threads 1 vs 4 diverged";
    return false;
  }

  const fs::path surface_out = dir / "surface.csv";
  const std::string surface_args =
      "surface --case redesigned --targets 0,1 --lambda 0.05 --resolution 51 "
      "--out " + surface_out.string();
  if (run_cli(surface_args) != 0) return false;
  const auto s1 = output_digests(surface_out.string() + ".manifest.json");
  if (run_cli(rerun_args(surface_out.string() + ".manifest.json")) != 0) {
    return false;
  }
  if (output_digests(surface_out.string() + ".manifest.json") != s1) {
    detail = "surface rerun diverged";
    return false;
  }
  return true;
}

}  // namespace

int main() {
  std::string detail;

  detail.clear();
  report(1, "analytic gradients match finite differences",
         criterion_gradients(detail), detail);

  detail.clear();
  report(2, "logit identity for the any-class probability",
         criterion_identity(detail), detail);

  detail.clear();
  report(3, "lambda independence on negative instances",
         criterion_lambda_independence(detail), detail);

  detail.clear();
  report(4, "reduction identities hold exactly", criterion_reductions(detail),
         detail);

  detail.clear();
  report(5, "negative-instance any-term gradient is alpha*p_a/M",
         criterion_negative_gradient(detail), detail);

  detail.clear();
  report(6, "metrics match the brute-force reference",
         criterion_metrics_oracle(detail), detail);

  detail.clear();
  report(7, "class-balance weights normalize to M (or M+1)",
         criterion_balance_normalization(detail), detail);

  const auto data = experiment_data();

  detail.clear();
  report(8, "redesigned losses improve median macro-F2 at bounded F1-Neg cost",
         criterion_directional(data, detail), detail);

  detail.clear();
  report(9, "median F2 declines by lambda = 1",
         criterion_ablation_shape(data, detail), detail);

  detail.clear();
  report(10, "surface grids reproduce closed-form values",
         criterion_surface(detail), detail);

  detail.clear();
  report(11, "reruns are byte-identical at 1 and 4 threads",
         criterion_reproducibility(detail), detail);

  if (failures > 0) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
