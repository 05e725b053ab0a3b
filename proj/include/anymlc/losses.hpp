#ifndef ANYMLC_LOSSES_HPP_
#define ANYMLC_LOSSES_HPP_

#include <span>
#include <string>
#include <vector>

#include "anymlc/class_balance.hpp"
#include "anymlc/types.hpp"

namespace anymlc {

enum class LossFamily { bce, focal, any_bce, any_focal };

std::string to_string(LossFamily family);
LossFamily loss_family_from_string(const std::string& name);

bool is_any_family(LossFamily family);
bool is_focal_family(LossFamily family);

// Hyperparameters for one loss evaluation. alpha and lambda apply only to the
// any_* families; gamma only to the focal families. balance, when set, scales
// each instance by its cumulative class-balancing weight.
struct LossConfig {
  LossFamily family = LossFamily::bce;
  double alpha = 1.0;
  double lambda = 0.02;
  double gamma = 2.0;
  const BalanceWeights* balance = nullptr;

  void validate() const;
};

// Batch loss and its gradient. grad_logits[i][j] is the derivative of `total`
// (the batch mean) with respect to logit (i, j); per-instance gradients are
// grad rows times the instance count.
struct LossResult {
  double total = 0.0;
  std::vector<double> per_instance;
  Matrix grad_logits;
};

// y_a per instance: 1 iff the row has at least one present class.
std::vector<std::uint8_t> any_class_target(const TargetBatch& targets);

// Weighted mean of raw scores with weight 1 for present classes and lambda
// for absent ones; sigmoid of the result equals the normalized weighted
// geometric mean of the class probabilities. Negative rows use the unweighted
// mean, which is the exact lambda-independent reduction for that case.
double any_class_logit(std::span<const double> logits,
                       std::span<const std::uint8_t> targets, double lambda);

LossResult bce_loss(const LogitBatch& logits, const TargetBatch& targets,
                    int threads = 1);
LossResult focal_loss(const LogitBatch& logits, const TargetBatch& targets,
                      double gamma, int threads = 1);
LossResult any_bce_loss(const LogitBatch& logits, const TargetBatch& targets,
                        double alpha, double lambda, int threads = 1);
LossResult any_focal_loss(const LogitBatch& logits, const TargetBatch& targets,
                          double alpha, double lambda, double gamma,
                          int threads = 1);

// Scales each instance's loss and gradient row by the sum of its present
// classes' weights (or by the negative-category weight for all-zero rows) and
// re-averages the total.
LossResult apply_class_balance(LossResult result, const TargetBatch& targets,
                               const BalanceWeights& weights);

// Dispatch on family plus optional class balancing.
LossResult evaluate_loss(const LogitBatch& logits, const TargetBatch& targets,
                         const LossConfig& config, int threads = 1);

enum class SurfaceCase { bce, any_class, redesigned };

SurfaceCase surface_case_from_string(const std::string& name);
std::string to_string(SurfaceCase c);

struct SurfacePoint {
  double p1 = 0.0;
  double p2 = 0.0;
  double value = 0.0;
};

// exp(-loss) over a uniform two-class probability grid on (eps, 1-eps)^2,
// eps = 1e-6. Row order: p1 outer, p2 inner.
struct SurfaceGrid {
  SurfaceCase surface_case = SurfaceCase::bce;
  int y1 = 0;
  int y2 = 0;
  double lambda = 0.0;
  int resolution = 0;
  std::vector<SurfacePoint> points;
};

SurfaceGrid likelihood_surface_grid(SurfaceCase surface_case, int y1, int y2,
                                    double lambda, int resolution);

}  // namespace anymlc

#endif  // ANYMLC_LOSSES_HPP_
