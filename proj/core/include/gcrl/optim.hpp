#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "gcrl/autograd.hpp"

namespace gcrl {

using autograd::Matrix;

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// First-order update on a fixed list of parameter arrays. Adam keeps its
/// moment estimates per array, so the array list must not change shape.
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, const std::vector<const Matrix*>& params);

  /// params[i] -= update(grads[i]); descends the loss.
  void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads);

  std::size_t steps() const { return t_; }
  const OptimizerConfig& config() const { return config_; }

 private:
  OptimizerConfig config_;
  std::vector<Matrix> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace gcrl
