#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gcrl/agent.hpp"
#include "gcrl/goal_env.hpp"
#include "gcrl/harness/config.hpp"
#include "gcrl/mrn.hpp"
#include "gcrl/shaping.hpp"

namespace gcrl::harness {

enum ExitCode : int { kPass = 0, kViolation = 1, kUsage = 2 };

/// Command-line layer on top of a config file: --set overrides first, then
/// the dedicated flags.
struct CommandOptions {
  std::optional<std::string> config_path;
  std::vector<std::string> overrides;
  std::optional<long long> seed;
  std::optional<std::string> out_dir;
  std::optional<long long> jobs;
  std::optional<double> tolerance;
  /// Key that --tolerance writes to.
  std::string tolerance_key = "audit.tolerance";
  std::optional<std::string> model_path;
};

RunConfig resolve_config(const CommandOptions& options);

std::unique_ptr<GoalEnv> make_env(const RunConfig& config);
/// shaping.* with eta = 0 replaced by default_eta.
PotentialSpec make_potential(const RunConfig& config, double default_eta, double gamma);
TrainConfig make_train_config(const RunConfig& config, const GoalEnv& env, std::uint64_t seed, TrainRewardMode mode);

struct Trial {
  TrainRewardMode mode;
  int seed;
  std::vector<CurveRow> curve;
  AgentNets nets;
};

/// Runs one trial per seed on up to `jobs` threads; output order is by seed.
std::vector<Trial> run_trials(const RunConfig& config, TrainRewardMode mode, std::ostream* log);

struct AggregateRow {
  int epoch = 0;
  double mean_success = 0.0;
  double sd_success = 0.0;
  double mean_loss = 0.0;
  double sd_loss = 0.0;
  std::size_t n = 0;
};

/// Per-epoch mean and sample standard deviation over the trials that reached
/// that epoch (early-stopped trials drop out).
std::vector<AggregateRow> aggregate(const std::vector<Trial>& trials);

double mean(const std::vector<double>& xs);
/// n - 1 denominator; 0 for fewer than two values.
double sample_sd(const std::vector<double>& xs);

/// Epoch at which the curve first reaches threshold, or epochs + 1.
int censored_epochs_to_threshold(const std::vector<CurveRow>& curve, double threshold, int epochs);

struct GradCheckInstance {
  MrnParams params;
  CriticBatch batch;
};
/// Down-sized critic (1536 parameters) with uniform random inputs.
GradCheckInstance make_gradcheck_instance(std::uint64_t seed, int batch_size);

int cmd_audit(const RunConfig& config, std::ostream& log);
int cmd_train(const RunConfig& config, std::ostream& log);
int cmd_compare(const RunConfig& config, std::ostream& log);
int cmd_shape_check(const RunConfig& config, std::ostream& log);
int cmd_grad_check(const RunConfig& config, std::ostream& log);
/// Writes a bundled model: gridworld | chain | random | point_reach (needs
/// env.discretization).
int cmd_export_model(const RunConfig& config, const std::string& which, const std::string& path, std::ostream& log);

}  // namespace gcrl::harness
