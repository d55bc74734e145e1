#include "gcrl/optim.hpp"

#include <cmath>
#include <string>

#include "gcrl/errors.hpp"

namespace gcrl {

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_kind_from_string(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw DomainError("unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw DomainError("learning rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw DomainError("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw DomainError("Adam epsilon must be positive");
}

Optimizer::Optimizer(OptimizerConfig config, const std::vector<const Matrix*>& params) : config_(config) {
  config_.validate();
  if (config_.kind == OptimizerKind::adam) {
    for (const Matrix* p : params) {
      m_.push_back(Matrix::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  } else {
    m_.resize(params.size());
  }
}

void Optimizer::step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads) {
  if (params.size() != grads.size() || params.size() != m_.size()) {
    throw DimensionError("optimizer: parameter/gradient array counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i]->rows() || params[i]->cols() != grads[i]->cols()) {
      throw DimensionError("optimizer: gradient " + std::to_string(i) + " does not match its parameter");
    }
  }
  ++t_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) *params[i] -= lr * *grads[i];
    return;
  }
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (m_[i].rows() != params[i]->rows() || m_[i].cols() != params[i]->cols()) {
      throw DimensionError("optimizer: parameter " + std::to_string(i) + " changed shape");
    }
    const auto g = grads[i]->array();
    m_[i].array() = b1 * m_[i].array() + (1.0 - b1) * g;
    v_[i].array() = b2 * v_[i].array() + (1.0 - b2) * g.square();
    params[i]->array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.epsilon);
  }
}

}  // namespace gcrl
