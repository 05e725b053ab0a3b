#include "anymlc/losses.hpp"

#include <cmath>

#include "anymlc/numerics.hpp"
#include "anymlc/parallel.hpp"

namespace anymlc {

std::string to_string(LossFamily family) {
  switch (family) {
    case LossFamily::bce: return "bce";
    case LossFamily::focal: return "focal";
    case LossFamily::any_bce: return "any_bce";
    case LossFamily::any_focal: return "any_focal";
  }
  return "bce";
}

LossFamily loss_family_from_string(const std::string& name) {
  if (name == "bce") return LossFamily::bce;
  if (name == "focal") return LossFamily::focal;
  if (name == "any_bce") return LossFamily::any_bce;
  if (name == "any_focal") return LossFamily::any_focal;
  throw InvalidConfigError("unknown loss family: " + name);
}

bool is_any_family(LossFamily family) {
  return family == LossFamily::any_bce || family == LossFamily::any_focal;
}

bool is_focal_family(LossFamily family) {
  return family == LossFamily::focal || family == LossFamily::any_focal;
}

void LossConfig::validate() const {
  if (is_any_family(family)) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
      throw InvalidConfigError("alpha must be in [0,1]");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
      throw InvalidConfigError("lambda must be in [0,1]");
    }
  }
  if (is_focal_family(family) && !(gamma >= 0.0)) {
    throw InvalidConfigError("gamma must be >= 0");
  }
}

std::vector<std::uint8_t> any_class_target(const TargetBatch& targets) {
  std::vector<std::uint8_t> out(targets.instances(), 0);
  for (std::size_t i = 0; i < targets.instances(); ++i) {
    out[i] = targets.row_positive(i) ? 1 : 0;
  }
  return out;
}

double any_class_logit(std::span<const double> logits,
                       std::span<const std::uint8_t> targets, double lambda) {
  if (logits.size() != targets.size() || logits.empty()) {
    throw InvalidInputError("any_class_logit: row sizes differ or empty");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidConfigError("lambda must be in [0,1]");
  }
  bool positive = false;
  for (std::uint8_t y : targets) {
    if (y != 0) positive = true;
  }
  if (!positive) {
    // Negative row: weights cancel, leaving the plain mean.
    double sum = 0.0;
    for (double z : logits) sum += z;
    return sum / static_cast<double>(logits.size());
  }
  double weighted = 0.0;
  double weight_sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    const double w = targets[j] != 0 ? 1.0 : lambda;
    weighted += w * logits[j];
    weight_sum += w;
  }
  if (!(weight_sum > 0.0)) {
    throw InvalidConfigError("any_class_logit: degenerate zero weight sum");
  }
  return weighted / weight_sum;
}

namespace {

using detail::sigmoid;
using detail::softplus;

// Loss and d(loss)/ds of one term in signed-logit form, s = (2y-1) z, so that
// p_t = sigmoid(s). gamma == 0 takes the plain BCE branch; the focal branch
// reduces to it analytically but not bit-for-bit.
inline void term_and_slope(double s, double gamma, double& loss,
                           double& dloss_ds) {
  const double nlp = softplus(-s);  // -log p_t
  if (gamma == 0.0) {
    loss = nlp;
    dloss_ds = -sigmoid(-s);  // p_t - 1
    return;
  }
  const double pt = sigmoid(s);
  const double q = sigmoid(-s);  // 1 - p_t
  const double f = std::pow(q, gamma);
  loss = f * nlp;
  dloss_ds = -f * (gamma * pt * nlp + q);
}

// Loss value and gradient row for one instance; grad is unscaled by the batch
// size. Summation over classes is strictly left-to-right.
void instance_loss(std::span<const double> z, std::span<const std::uint8_t> y,
                   double alpha, double lambda, double gamma, double& loss_out,
                   std::span<double> grad_out) {
  const std::size_t m = z.size();
  double loss = 0.0;
  bool positive = false;
  for (std::size_t j = 0; j < m; ++j) {
    const double sign = y[j] != 0 ? 1.0 : -1.0;
    if (y[j] != 0) positive = true;
    double term, slope;
    term_and_slope(sign * z[j], gamma, term, slope);
    loss += term;
    grad_out[j] = sign * slope;
  }
  if (alpha > 0.0) {
    // Any-class presence term on the synthesized score z*.
    double zstar;
    double weight_sum;
    if (positive) {
      double weighted = 0.0;
      weight_sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double w = y[j] != 0 ? 1.0 : lambda;
        weighted += w * z[j];
        weight_sum += w;
      }
      zstar = weighted / weight_sum;
    } else {
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) sum += z[j];
      weight_sum = static_cast<double>(m);
      zstar = sum / weight_sum;
    }
    const double sign = positive ? 1.0 : -1.0;
    double any_term, any_slope;
    term_and_slope(sign * zstar, gamma, any_term, any_slope);
    loss += alpha * any_term;
    const double dany_dzstar = alpha * sign * any_slope;
    for (std::size_t j = 0; j < m; ++j) {
      const double w = positive ? (y[j] != 0 ? 1.0 : lambda) : 1.0;
      grad_out[j] += dany_dzstar * (w / weight_sum);
    }
  }
  loss_out = loss;
}

LossResult batch_loss(const LogitBatch& logits, const TargetBatch& targets,
                      double alpha, double lambda, double gamma, int threads) {
  require_same_shape(logits, targets);
  const std::size_t n = logits.instances();
  LossResult result;
  result.per_instance.resize(n);
  result.grad_logits = Matrix(n, logits.classes());
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      instance_loss(logits.values.row(i), targets.values.row(i), alpha, lambda,
                    gamma, result.per_instance[i], result.grad_logits.row(i));
    }
  });
  double sum = 0.0;
  for (double v : result.per_instance) sum += v;
  result.total = sum / static_cast<double>(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& g : result.grad_logits.values) g *= inv_n;
  return result;
}

}  // namespace

LossResult bce_loss(const LogitBatch& logits, const TargetBatch& targets,
                    int threads) {
  return batch_loss(logits, targets, 0.0, 0.0, 0.0, threads);
}

LossResult focal_loss(const LogitBatch& logits, const TargetBatch& targets,
                      double gamma, int threads) {
  if (!(gamma >= 0.0)) throw InvalidConfigError("gamma must be >= 0");
  return batch_loss(logits, targets, 0.0, 0.0, gamma, threads);
}

LossResult any_bce_loss(const LogitBatch& logits, const TargetBatch& targets,
                        double alpha, double lambda, int threads) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidConfigError("alpha must be in [0,1]");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidConfigError("lambda must be in [0,1]");
  }
  return batch_loss(logits, targets, alpha, lambda, 0.0, threads);
}

LossResult any_focal_loss(const LogitBatch& logits, const TargetBatch& targets,
                          double alpha, double lambda, double gamma,
                          int threads) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidConfigError("alpha must be in [0,1]");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidConfigError("lambda must be in [0,1]");
  }
  if (!(gamma >= 0.0)) throw InvalidConfigError("gamma must be >= 0");
  return batch_loss(logits, targets, alpha, lambda, gamma, threads);
}

LossResult apply_class_balance(LossResult result, const TargetBatch& targets,
                               const BalanceWeights& weights) {
  const std::size_t n = targets.instances();
  const std::size_t m = targets.classes();
  if (weights.per_class.size() != m) {
    throw InvalidConfigError("balance weights cover a different class set");
  }
  if (result.per_instance.size() != n || result.grad_logits.rows != n) {
    throw InvalidInputError("loss result does not match target batch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double scale;
    if (targets.row_positive(i)) {
      scale = 0.0;
      const auto row = targets.values.row(i);
      for (std::size_t j = 0; j < m; ++j) {
        if (row[j] != 0) scale += weights.per_class[j];
      }
    } else {
      if (!weights.negative.has_value()) {
        throw InvalidConfigError(
            "negative instance encountered but no negative-category weight "
            "is configured");
      }
      scale = *weights.negative;
    }
    result.per_instance[i] *= scale;
    for (double& g : result.grad_logits.row(i)) g *= scale;
  }
  double sum = 0.0;
  for (double v : result.per_instance) sum += v;
  result.total = sum / static_cast<double>(n);
  return result;
}

LossResult evaluate_loss(const LogitBatch& logits, const TargetBatch& targets,
                         const LossConfig& config, int threads) {
  config.validate();
  LossResult result;
  switch (config.family) {
    case LossFamily::bce:
      result = bce_loss(logits, targets, threads);
      break;
    case LossFamily::focal:
      result = focal_loss(logits, targets, config.gamma, threads);
      break;
    case LossFamily::any_bce:
      result = any_bce_loss(logits, targets, config.alpha, config.lambda, threads);
      break;
    case LossFamily::any_focal:
      result = any_focal_loss(logits, targets, config.alpha, config.lambda,
                              config.gamma, threads);
      break;
  }
  if (config.balance != nullptr) {
    result = apply_class_balance(std::move(result), targets, *config.balance);
  }
  return result;
}

SurfaceCase surface_case_from_string(const std::string& name) {
  if (name == "bce") return SurfaceCase::bce;
  if (name == "any") return SurfaceCase::any_class;
  if (name == "redesigned") return SurfaceCase::redesigned;
  throw InvalidInputError("unknown surface case: " + name);
}

std::string to_string(SurfaceCase c) {
  switch (c) {
    case SurfaceCase::bce: return "bce";
    case SurfaceCase::any_class: return "any";
    case SurfaceCase::redesigned: return "redesigned";
  }
  return "bce";
}

namespace {

// Probability-space two-class any-class probability; safe on (eps, 1-eps).
double any_probability_2(double p1, double p2, int y1, int y2, double lambda) {
  double w1 = 1.0, w2 = 1.0;
  if (y1 != 0 || y2 != 0) {
    w1 = y1 != 0 ? 1.0 : lambda;
    w2 = y2 != 0 ? 1.0 : lambda;
  }
  const double sw = w1 + w2;
  const double g1 = std::exp((w1 * std::log(p1) + w2 * std::log(p2)) / sw);
  const double g0 =
      std::exp((w1 * std::log(1.0 - p1) + w2 * std::log(1.0 - p2)) / sw);
  return g1 / (g1 + g0);
}

}  // namespace

SurfaceGrid likelihood_surface_grid(SurfaceCase surface_case, int y1, int y2,
                                    double lambda, int resolution) {
  if ((y1 != 0 && y1 != 1) || (y2 != 0 && y2 != 1)) {
    throw InvalidInputError("surface targets must be 0 or 1");
  }
  if (resolution < 2) {
    throw InvalidInputError("surface resolution must be >= 2");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw InvalidConfigError("lambda must be in [0,1]");
  }
  constexpr double kEps = 1e-6;
  const int ya = (y1 != 0 || y2 != 0) ? 1 : 0;
  SurfaceGrid grid{surface_case, y1, y2, lambda, resolution, {}};
  grid.points.reserve(static_cast<std::size_t>(resolution) * resolution);
  const double step = (1.0 - 2.0 * kEps) / static_cast<double>(resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    const double p1 = kEps + step * i;
    for (int j = 0; j < resolution; ++j) {
      const double p2 = kEps + step * j;
      const double pt1 = y1 != 0 ? p1 : 1.0 - p1;
      const double pt2 = y2 != 0 ? p2 : 1.0 - p2;
      double value = 0.0;
      switch (surface_case) {
        case SurfaceCase::bce:
          value = pt1 * pt2;
          break;
        case SurfaceCase::any_class: {
          const double pa = any_probability_2(p1, p2, y1, y2, lambda);
          value = ya != 0 ? pa : 1.0 - pa;
          break;
        }
        case SurfaceCase::redesigned: {
          const double pa = any_probability_2(p1, p2, y1, y2, lambda);
          value = pt1 * pt2 * (ya != 0 ? pa : 1.0 - pa);
          break;
        }
      }
      grid.points.push_back({p1, p2, value});
    }
  }
  return grid;
}

}  // namespace anymlc
