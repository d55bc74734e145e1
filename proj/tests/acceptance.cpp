// Acceptance suite: one [PASS]/[FAIL] line per criterion.
//
//   gcrl_acceptance            run everything
//   gcrl_acceptance -c 4 -c 7  run a subset
//
// Exit status 0 iff every selected criterion passes.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gcrl/audit.hpp"
#include "gcrl/harness/commands.hpp"
#include "gcrl/mrn.hpp"
#include "gcrl/solver.hpp"

using namespace gcrl;
using namespace gcrl::harness;

namespace {

// Pinned tolerances and budgets.
constexpr double kTriangleTol = 1e-9;
constexpr double kProgressiveTol = 1e-8;
constexpr double kIdentityTol = 1e-8;
constexpr double kBoundsTol = 1e-12;  // value iteration stops at 1e-12 sup-norm
constexpr double kTieTol = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kLatentTol = 1e-9;
constexpr double kRuntimeLimit = 10.0;  // seconds, criteria 1 and 2
constexpr std::size_t kSearchBudget = 10000;
constexpr int kGradInstances = 10;
constexpr std::size_t kMaxGradParams = 2000;
constexpr int kLatentTriples = 10000;
constexpr double kSuccessThreshold = 0.9;
constexpr int kSeedsNeeded = 4;
const char* kSeeds = "1..5";
// Frozen after calibration; both stay within the 200-epoch ceiling.
constexpr int kGridEpochs = 30;
constexpr int kReachEpochs = 60;
// Dense-mode eta for point-reach: best held-out mean in configs/sweep_eta.sh.
const char* kReachEta = "3";

struct Outcome {
  bool pass;
  std::string detail;
};

struct Named {
  const char* model;
  GoalConditionedMDP mdp;
};

std::vector<Named> bundled() {
  return {{"chain3", make_chain(3)}, {"gridworld5x5", make_gridworld()}, {"random20", make_random_mdp()}};
}

PotentialSpec admissible(const GoalConditionedMDP& m) {
  return {DistanceKind::scaled_euclidean, max_step_displacement(m), m.gamma()};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome sparse_triangle() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string d;
  for (const auto& [name, m] : bundled()) {
    const AuditReport r = triangle_audit(solve_qstar(m), m, kTriangleTol);
    ok = ok && r.passed();
    d += std::string(name) + " " + std::to_string(r.violations) + "/" + std::to_string(r.checked) + "; ";
  }
  const double secs = seconds_since(t0);
  return {ok && secs < kRuntimeLimit, d + num(secs) + " s"};
}

Outcome shaped_triangle() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string d;
  for (const auto& [name, m] : bundled()) {
    const PotentialSpec spec = admissible(m);
    const QTable q = solve_qstar(m);
    const AdmissibilityReport adm = admissibility_audit(m, spec, q, kTriangleTol);
    ok = ok && adm.holds;
    d += std::string(name) + " admissible=" + (adm.holds ? "yes" : "no");
    if (adm.holds) {
      const AuditReport r = triangle_audit(solve_shaped_qstar(m, spec, q, kTriangleTol), m, kTriangleTol);
      ok = ok && r.passed();
      d += " violations " + std::to_string(r.violations) + "/" + std::to_string(r.checked) + " worst " +
           num(r.worst_violation);
    }
    d += "; ";
  }
  const double secs = seconds_since(t0);
  return {ok && secs < kRuntimeLimit, d + num(secs) + " s"};
}

Outcome shaped_identity() {
  bool ok = true;
  std::string d;
  for (const auto& [name, m] : bundled()) {
    const PotentialSpec spec = admissible(m);
    const QTable q = solve_qstar(m);
    const QTable qf = solve_shaped_qstar(m, spec, q, kTriangleTol);
    const double gap = sup_norm_difference(qf, policy_evaluation(m, greedy_policy(q), RewardMode::shaped, spec));
    ok = ok && gap <= kIdentityTol;
    d += std::string(name) + " " + num(gap) + "; ";
  }
  return {ok, d};
}

Outcome shaped_bounds() {
  bool ok = true;
  std::string d;
  for (const auto& [name, m] : bundled()) {
    const PotentialSpec spec = admissible(m);
    const QTable qf = solve_shaped_qstar(m, spec, kTriangleTol);
    const BoundsReport r = projection_bounds_audit(qf, m, spec, kBoundsTol);
    const BoundsReport strict = projection_bounds_audit(qf, m, spec, 0.0);
    ok = ok && r.passed();
    d += std::string(name) + " " + std::to_string(r.violations) + "/" + std::to_string(r.checked) + " worst excess " +
         num(r.worst_excess) + " (" + std::to_string(strict.violations) + " above zero tolerance); ";
  }
  return {ok, d};
}

Outcome progressive() {
  const GoalConditionedMDP m = make_gridworld();
  const QTable q = solve_qstar(m);
  const ProgressiveSearchResult res = find_progressive_policies(m, q, {kSearchBudget, 3, 1});
  bool ok = !res.found.empty();
  std::string d = std::to_string(res.found.size()) + " found in " + std::to_string(res.evaluated) + " candidates";
  for (const auto& c : res.found) {
    const AuditReport r = triangle_audit(c.q_pi, m, kProgressiveTol);
    const double slack = progressive_bound_slack(c.q_pi, q, m, *c.report.epsilon);
    ok = ok && r.passed() && slack >= -kProgressiveTol;
    d += "; eps " + num(*c.report.epsilon) + " violations " + std::to_string(r.violations) + " slack " + num(slack);
  }
  return {ok, d};
}

Outcome invariance() {
  bool ok = true;
  std::string d;
  for (const auto& [name, m] : bundled()) {
    const QTable q = solve_qstar(m);
    const ArgmaxAgreement a = greedy_argmax_report(q, solve_shaped_qstar(m, admissible(m), q, kTriangleTol), kTieTol);
    ok = ok && a.all();
    d += std::string(name) + " " + std::to_string(a.disagreements) + "/" + std::to_string(a.states * a.goals) +
         " disagree; ";
  }
  return {ok, d};
}

Outcome mrn() {
  bool ok = true;
  double worst = 0.0;
  std::size_t params = 0;
  for (int i = 0; i < kGradInstances; ++i) {
    const GradCheckInstance inst = make_gradcheck_instance(1000 + static_cast<std::uint64_t>(i), 4);
    params = inst.params.parameter_count();
    const GradCheckResult r = finite_diff_check(inst.params, inst.batch);
    ok = ok && !r.skipped && r.max_relative_error < kGradTol && params <= kMaxGradParams;
    worst = std::max(worst, r.max_relative_error);
  }
  const MrnParams p = make_gradcheck_instance(77, 1).params;
  Rng rng(77);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  auto latent = [&] {
    Eigen::VectorXd v(p.shape.latent_dim);
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = u(rng);
    return v;
  };
  int tri_fail = 0, pos_fail = 0;
  for (int i = 0; i < kLatentTriples; ++i) {
    const Eigen::VectorXd x = latent(), y = latent(), z = latent();
    auto d = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return d_sym(a, b, p) + d_asym(a, b, p); };
    if (d(x, z) > d(x, y) + d(y, z) + kLatentTol) ++tri_fail;
    if (-d(x, y) > kLatentTol) ++pos_fail;
  }
  const GradCheckInstance big = make_gradcheck_instance(78, 1000);
  const double qmax = critic_forward(big.params, big.batch.obs, big.batch.action, big.batch.goal).maxCoeff();
  ok = ok && tri_fail == 0 && pos_fail == 0 && qmax <= kLatentTol;
  return {ok, "grad worst " + num(worst) + " over " + std::to_string(params) + " params x " +
                  std::to_string(kGradInstances) + "; triangle failures " + std::to_string(tri_fail) +
                  "; max Q " + num(qmax)};
}

RunConfig training_config(const std::string& env, int epochs) {
  RunConfig c;
  c.set("env.name", env);
  c.set("train.epochs", std::to_string(epochs));
  c.set("train.episodes_per_epoch", "50");
  c.set("train.updates_per_episode", env == "gridworld" ? "10" : "40");
  c.set("train.critic_hidden", "64, 64");
  c.set("train.head_hidden", "64");
  c.set("train.actor_hidden", "64, 64");
  c.set("train.eval_episodes", "50");
  c.set("train.stop_at_success", std::to_string(kSuccessThreshold));
  c.set("compare.threshold", std::to_string(kSuccessThreshold));
  c.set("run.seeds", kSeeds);
  return c;
}

std::vector<Trial> trials_for(const RunConfig& c, TrainRewardMode mode) {
  std::ostringstream sink;
  return run_trials(c, mode, &sink);
}

std::string epochs_text(const std::vector<Trial>& ts, int budget) {
  std::string s;
  for (const Trial& t : ts) {
    const int e = censored_epochs_to_threshold(t.curve, kSuccessThreshold, budget);
    s += (s.empty() ? "" : ",") + (e > budget ? std::string(">") + std::to_string(budget) : std::to_string(e));
  }
  return s;
}

// Sparse point-reach trials are shared by criteria 8 and 9.
const std::vector<Trial>& sparse_reach() {
  static const std::vector<Trial> ts = trials_for(training_config("point_reach", kReachEpochs), TrainRewardMode::sparse);
  return ts;
}

Outcome training_sanity() {
  bool ok = true;
  std::string d;
  for (const auto& [env, budget] : {std::pair<std::string, int>{"gridworld", kGridEpochs}, {"point_reach", kReachEpochs}}) {
    const std::vector<Trial> ts =
        env == "point_reach" ? sparse_reach() : trials_for(training_config(env, budget), TrainRewardMode::sparse);
    int hits = 0;
    for (const Trial& t : ts) hits += epochs_to_threshold(t.curve, kSuccessThreshold).has_value();
    ok = ok && hits >= kSeedsNeeded;
    d += env + " " + std::to_string(hits) + "/5 reach " + num(kSuccessThreshold) + " (epochs " + epochs_text(ts, budget) +
         "); ";
  }
  return {ok, d};
}

Outcome dense_vs_sparse() {
  RunConfig c = training_config("point_reach", kReachEpochs);
  c.set("shaping.distance", "scaled_euclidean");
  c.set("shaping.eta", kReachEta);
  const std::vector<Trial> dense = trials_for(c, TrainRewardMode::dense);
  std::vector<double> es, ed;
  for (const Trial& t : sparse_reach()) es.push_back(censored_epochs_to_threshold(t.curve, kSuccessThreshold, kReachEpochs));
  for (const Trial& t : dense) ed.push_back(censored_epochs_to_threshold(t.curve, kSuccessThreshold, kReachEpochs));
  const double ms = mean(es), ss = sample_sd(es), md = mean(ed), sd = sample_sd(ed);
  return {md <= ms + ss, "sparse " + num(ms) + " +- " + num(ss) + " (" + epochs_text(sparse_reach(), kReachEpochs) +
                             "), dense " + num(md) + " +- " + num(sd) + " (" + epochs_text(dense, kReachEpochs) +
                             "), improves=" + (md < ms ? "yes" : "no")};
}

Outcome reduction() {
  bool ok = true;
  std::string d;
  for (const std::string env : {"gridworld", "point_reach"}) {
    RunConfig c = training_config(env, 3);
    c.set("train.episodes_per_epoch", "10");
    c.set("train.stop_at_success", "0");
    c.set("run.seeds", "1..2");
    c.set("shaping.distance", "zero");
    c.set("shaping.eta", "1");
    const auto s = trials_for(c, TrainRewardMode::sparse), z = trials_for(c, TrainRewardMode::dense);
    bool same = s.size() == z.size();
    for (std::size_t i = 0; same && i < s.size(); ++i) {
      same = s[i].curve.size() == z[i].curve.size();
      for (std::size_t k = 0; same && k < s[i].curve.size(); ++k) {
        same = s[i].curve[k].critic_loss == z[i].curve[k].critic_loss &&
               s[i].curve[k].success_rate == z[i].curve[k].success_rate;
      }
      std::ostringstream a, b;
      write_checkpoint(a, s[i].nets);
      write_checkpoint(b, z[i].nets);
      same = same && a.str() == b.str();
    }
    ok = ok && same;
    d += env + (same ? " identical; " : " differs; ");
  }
  return {ok, d};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gcrl acceptance suite"};
  std::vector<int> only;
  app.add_option("-c,--criterion", only, "criterion number (repeatable)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"sparse triangle inequality on bundled models", sparse_triangle},
      {"shaped triangle inequality with admissible potential", shaped_triangle},
      {"shaped value identity", shaped_identity},
      {"shaped value bounds", shaped_bounds},
      {"progressive policies on the gridworld", progressive},
      {"greedy policy invariance under shaping", invariance},
      {"MRN gradients and quasimetric properties", mrn},
      {"sparse training reaches the success threshold", training_sanity},
      {"dense no worse than sparse on point-reach", dense_vs_sparse},
      {"zero potential reduces dense to sparse", reduction},
  };

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << id << ". " << criteria[i].first << " -- " << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
