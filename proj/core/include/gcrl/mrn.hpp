#pragma once

// Metric residual network critic and a tanh-squashed actor.
//
//   Q(s, a, g) = -( ||mu1(h_sa) - mu1(h_sg)|| + max_i (mu2(h_sa) - mu2(h_sg))_i^+ )
//
// with h_sa = encoder_sa([s a]) and h_sg = encoder_sg([s g]). Every MLP uses
// rectified hidden layers and a linear output layer. Optionally the output is
// clipped from below, max(Q, lower), per sample.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gcrl/autograd.hpp"
#include "gcrl/model.hpp"

namespace gcrl {

using autograd::Matrix;

struct Layer {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out
};

struct Mlp {
  std::vector<Layer> layers;

  /// sizes = {in, hidden..., out}; weights and biases ~ U(-1/sqrt(in), 1/sqrt(in)).
  static Mlp create(const std::vector<int>& sizes, Rng& rng);
  Mlp zeros_like() const;
  int input_dim() const;
  int output_dim() const;
  std::size_t parameter_count() const;
  std::vector<Matrix*> arrays();
  std::vector<const Matrix*> arrays() const;
};

/// Plain evaluation, one sample per row.
Matrix mlp_forward(const Mlp& net, const Matrix& x);
/// True for rows where some hidden pre-activation lies within margin of 0.
std::vector<bool> mlp_near_kink(const Mlp& net, const Matrix& x, double margin);
/// Records the network on a tape. grad may be null (parameters then act as
/// constants but still pass gradient to x).
autograd::Var mlp_graph(autograd::Tape& tape, const Mlp& net, Mlp* grad, autograd::Var x);

struct MrnShape {
  int obs_dim = 2;
  int action_dim = 2;
  int goal_dim = 2;
  std::vector<int> encoder_hidden{256, 256};
  int latent_dim = 16;
  std::vector<int> head_hidden{256};
  int sym_dim = 16;
  int asym_dim = 16;

  void validate() const;
  friend bool operator==(const MrnShape&, const MrnShape&) = default;
};

struct MrnParams {
  MrnShape shape;
  std::uint64_t seed = 0;
  Mlp encoder_sa;  // [s a] -> latent
  Mlp encoder_sg;  // [s g] -> latent
  Mlp head_sym;    // latent -> sym_dim   (mu1)
  Mlp head_asym;   // latent -> asym_dim  (mu2)

  static MrnParams create(const MrnShape& shape, std::uint64_t seed);
  MrnParams zeros_like() const;
  std::size_t parameter_count() const;
  /// Declaration order: encoder_sa, encoder_sg, head_sym, head_asym; within
  /// each, layer by layer, weight then bias.
  std::vector<Matrix*> arrays();
  std::vector<const Matrix*> arrays() const;
  std::vector<std::string> array_names() const;
  bool all_finite() const;
};

struct ActorShape {
  int obs_dim = 2;
  int goal_dim = 2;
  int action_dim = 2;
  std::vector<int> hidden{256, 256};
  double action_bound = 1.0;

  void validate() const;
  friend bool operator==(const ActorShape&, const ActorShape&) = default;
};

struct ActorParams {
  ActorShape shape;
  std::uint64_t seed = 0;
  Mlp net;  // [s g] -> pre-squash action

  static ActorParams create(const ActorShape& shape, std::uint64_t seed);
  ActorParams zeros_like() const;
  std::size_t parameter_count() const;
  std::vector<Matrix*> arrays();
  std::vector<const Matrix*> arrays() const;
  std::vector<std::string> array_names() const;
  bool all_finite() const;
};

// Distances on head outputs.
double sym_distance(std::span<const double> u, std::span<const double> v);
double asym_distance(std::span<const double> u, std::span<const double> v);
/// Distances on latents: the heads are applied first.
double d_sym(const Eigen::VectorXd& hx, const Eigen::VectorXd& hy, const MrnParams& params);
double d_asym(const Eigen::VectorXd& hx, const Eigen::VectorXd& hy, const MrnParams& params);

struct MrnLatents {
  Matrix h_sa;
  Matrix h_sg;
};
MrnLatents mrn_encode(const MrnParams& params, const Matrix& obs, const Matrix& action, const Matrix& goal);

/// Per-sample lower clip. An empty `lower` disables clipping.
struct CriticClip {
  Eigen::VectorXd lower;
  autograd::ClipGradient gradient = autograd::ClipGradient::hard;

  bool enabled() const { return lower.size() > 0; }
};

/// Q for a batch (B rows each in obs, action, goal).
Eigen::VectorXd critic_forward(const MrnParams& params, const Matrix& obs, const Matrix& action, const Matrix& goal,
                               const CriticClip& clip = {});
double critic_forward(const MrnParams& params, const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
                      const Eigen::VectorXd& goal);

autograd::Var critic_graph(autograd::Tape& tape, const MrnParams& params, MrnParams* grad, autograd::Var obs,
                           autograd::Var action, autograd::Var goal, const CriticClip& clip = {});

struct CriticBatch {
  Matrix obs;
  Matrix action;
  Matrix goal;
  Eigen::VectorXd target;
  CriticClip clip;

  Eigen::Index size() const { return obs.rows(); }
  void validate(const MrnShape& shape) const;
};

struct CriticGradient {
  double loss = 0.0;
  MrnParams grad;
};

/// loss = mean_b (target_b - Q_b)^2 and its gradient. Throws
/// std::invalid_argument on an empty batch.
CriticGradient critic_grad(const MrnParams& params, const CriticBatch& batch);
double critic_loss(const MrnParams& params, const CriticBatch& batch);

/// dQ/da for each row (unclipped Q).
Matrix critic_action_gradient(const MrnParams& params, const Matrix& obs, const Matrix& action, const Matrix& goal);

Matrix actor_forward(const ActorParams& params, const Matrix& obs, const Matrix& goal);
Eigen::VectorXd actor_forward(const ActorParams& params, const Eigen::VectorXd& obs, const Eigen::VectorXd& goal);
autograd::Var actor_graph(autograd::Tape& tape, const ActorParams& params, ActorParams* grad, autograd::Var obs,
                          autograd::Var goal);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t parameters_checked = 0;
  std::size_t samples_used = 0;
  std::size_t samples_skipped = 0;
  /// Every sample sat at a kink; nothing was compared.
  bool skipped = false;
  std::string worst_array;
};

struct GradCheckOptions {
  double step = 1e-5;
  /// Samples with a d_asym tie, a zero positive part, a rectifier input, or
  /// an active clip within this margin are dropped.
  double kink_margin = 1e-4;
  /// Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
  double relative_floor = 1e-4;
};

/// Analytic critic_grad against central differences on every parameter.
GradCheckResult finite_diff_check(const MrnParams& params, const CriticBatch& batch, const GradCheckOptions& options = {});

/// Generic form: loss() is re-evaluated after perturbing each entry of each
/// array in place; analytic[i] must match arrays[i] in shape.
GradCheckResult finite_diff_check(const std::function<double()>& loss, const std::vector<Matrix*>& arrays,
                                  const std::vector<const Matrix*>& analytic, const GradCheckOptions& options = {});

/// Versioned decimal text checkpoints.
void write_params(std::ostream& out, const MrnParams& params);
void write_params(std::ostream& out, const ActorParams& params);
MrnParams read_mrn_params(std::istream& in);
ActorParams read_actor_params(std::istream& in);

}  // namespace gcrl
