#include "gcrl/harness/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "gcrl/audit.hpp"
#include "gcrl/errors.hpp"
#include "gcrl/numfmt.hpp"
#include "gcrl/qtable.hpp"
#include "gcrl/solver.hpp"

namespace gcrl::harness {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) { return format_double(v); }

// Every output file opens with this row.
class CsvFile {
 public:
  CsvFile(const fs::path& path, const RunConfig& config, const std::string& seed) : path_(path), out_(path) {
    if (!out_) throw ParseError("cannot write '" + path.string() + "'");
    out_ << "# config_hash=" << config.hash() << " seed=" << seed << '\n';
  }
  std::ostream& operator*() { return out_; }
  std::ostream* operator->() { return &out_; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::ofstream out_;
};

fs::path prepare_out_dir(const RunConfig& config) {
  fs::path dir = config.text("run.out_dir");
  fs::create_directories(dir);
  std::ofstream(dir / "resolved_config.ini") << "# config_hash=" << config.hash() << '\n' << config.resolved_text();
  return dir;
}

std::string seed_list_text(const std::vector<int>& seeds) {
  std::string s;
  for (std::size_t i = 0; i < seeds.size(); ++i) s += (i ? ";" : "") + std::to_string(seeds[i]);
  return s;
}

std::vector<int> check_seeds(const RunConfig& config) {
  std::vector<int> seeds = config.int_list("run.seeds");
  if (seeds.empty()) throw ParseError("run.seeds: empty seed list");
  std::vector<int> sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ParseError("run.seeds: duplicate seed");
  return sorted;
}

GoalConditionedMDP load_audit_model(const RunConfig& config) {
  const std::string& path = config.text("model.path");
  if (!path.empty()) return load_model(path);
  return make_env(config)->enumerate_model();
}

void require_shaping_keys(const RunConfig& config) {
  for (const char* key : {"shaping.distance", "shaping.eta"}) {
    if (!config.explicitly_set(key)) {
      throw ParseError(std::string("dense mode needs ") + key + " set explicitly; eta = 0 picks the largest one-step move");
    }
  }
}

void write_triangle_row(std::ostream& out, const std::string& label, const AuditReport& r) {
  out << label << ',' << r.checked << ',' << r.violations << ',' << fmt(r.worst_violation) << ',' << fmt(r.tolerance)
      << ',' << r.witness.x1.state << ',' << r.witness.x1.action << ',' << r.witness.x2.state << ','
      << r.witness.x2.action << ',' << r.witness.goal << ',' << (r.passed() ? "pass" : "violation") << '\n';
}

constexpr const char* kTriangleHeader =
    "table,checked,violations,worst_violation,tolerance,x1_state,x1_action,x2_state,x2_action,goal,status\n";

std::vector<std::vector<double>> by_epoch(const std::vector<Trial>& trials, bool success) {
  std::vector<std::vector<double>> cols;
  for (const Trial& t : trials) {
    for (const CurveRow& row : t.curve) {
      if (static_cast<std::size_t>(row.epoch) > cols.size()) cols.resize(row.epoch);
      cols[row.epoch - 1].push_back(success ? row.success_rate : row.critic_loss);
    }
  }
  return cols;
}

void write_curves(std::ostream& out, const std::vector<Trial>& trials) {
  for (const Trial& t : trials) {
    for (const CurveRow& row : t.curve) {
      out << t.seed << ',' << row.epoch << ',' << fmt(row.success_rate) << ',' << fmt(row.critic_loss) << ','
          << to_string(t.mode) << '\n';
    }
  }
}

void write_aggregate(std::ostream& out, TrainRewardMode mode, const std::vector<AggregateRow>& rows) {
  for (const AggregateRow& r : rows) {
    out << to_string(mode) << ',' << r.epoch << ',' << r.n << ',' << fmt(r.mean_success) << ',' << fmt(r.sd_success)
        << ',' << fmt(r.mean_loss) << ',' << fmt(r.sd_loss) << '\n';
  }
}

constexpr const char* kCurveHeader = "seed,epoch,success_rate,critic_loss,reward_mode\n";
constexpr const char* kAggregateHeader = "reward_mode,epoch,n,mean_success,sd_success,mean_loss,sd_loss\n";

}  // namespace

RunConfig resolve_config(const CommandOptions& options) {
  RunConfig config = options.config_path ? RunConfig::load(*options.config_path) : RunConfig();
  for (const std::string& o : options.overrides) config.apply_override(o);
  if (options.seed) {
    config.set("run.seeds", std::to_string(*options.seed));
    config.set("audit.search_seed", std::to_string(*options.seed));
  }
  if (options.out_dir) config.set("run.out_dir", *options.out_dir);
  if (options.jobs) config.set("run.jobs", std::to_string(*options.jobs));
  if (options.tolerance) config.set(options.tolerance_key, format_double(*options.tolerance));
  if (options.model_path) config.set("model.path", *options.model_path);
  return config;
}

std::unique_ptr<GoalEnv> make_env(const RunConfig& config) {
  const std::string& name = config.text("env.name");
  const long long horizon = config.integer("env.horizon");
  if (horizon < 0) throw ParseError("env.horizon must be >= 0");
  if (name == "gridworld") {
    GridReachOptions o;
    const long long w = config.integer("env.width"), h = config.integer("env.height");
    if (w < 2 || h < 2 || w * h > 100000) throw ParseError("env.width / env.height out of range");
    o.layout = {static_cast<std::size_t>(w), static_cast<std::size_t>(h)};
    if (horizon > 0) o.horizon = static_cast<int>(horizon);
    o.gamma = config.real("env.gamma");
    o.terminate_on_goal = config.boolean("env.terminate_on_goal");
    return std::make_unique<GridReachEnv>(o);
  }
  if (name == "point_reach") {
    ContinuousReachOptions o;
    o.max_step = config.real("env.max_step");
    o.success_radius = config.real("env.success_radius");
    if (horizon > 0) o.horizon = static_cast<int>(horizon);
    o.random_start = config.boolean("env.random_start");
    o.terminate_on_goal = config.boolean("env.terminate_on_goal");
    o.discretization = config.real("env.discretization");
    o.gamma = config.real("env.gamma");
    return std::make_unique<ContinuousReachEnv>(o);
  }
  throw ParseError("env.name: unknown environment '" + name + "'");
}

PotentialSpec make_potential(const RunConfig& config, double default_eta, double gamma) {
  PotentialSpec spec;
  spec.distance = distance_kind_from_string(config.text("shaping.distance"));
  const double eta = config.real("shaping.eta");
  spec.eta = eta == 0.0 ? default_eta : eta;
  spec.gamma = gamma;
  spec.validate();
  return spec;
}

TrainConfig make_train_config(const RunConfig& config, const GoalEnv& env, std::uint64_t seed, TrainRewardMode mode) {
  auto count = [&](const char* key) {
    const long long v = config.integer(key);
    if (v < 0 || v > 100000000) throw ParseError(std::string(key) + " out of range");
    return static_cast<int>(v);
  };
  TrainConfig tc;
  tc.epochs = count("train.epochs");
  tc.episodes_per_epoch = count("train.episodes_per_epoch");
  tc.updates_per_episode = count("train.updates_per_episode");
  tc.batch_size = count("train.batch_size");
  tc.buffer_capacity = static_cast<std::size_t>(count("train.buffer_capacity"));
  tc.actor_lr = config.real("train.actor_lr");
  tc.critic_lr = config.real("train.critic_lr");
  tc.optimizer = optimizer_kind_from_string(config.text("train.optimizer"));
  tc.polyak = config.real("train.polyak");
  tc.exploration_noise_scale = config.real("train.noise");
  tc.random_action_prob = config.real("train.random_action_prob");
  tc.her_ratio = config.real("train.her_ratio");
  const std::string& her = config.text("train.her_strategy");
  if (her == "future") {
    tc.her_strategy = HerStrategy::future;
  } else if (her == "final") {
    tc.her_strategy = HerStrategy::final;
  } else {
    throw ParseError("train.her_strategy: unknown strategy '" + her + "'");
  }
  tc.reward_mode = mode;
  tc.gamma = config.real("env.gamma");
  tc.shaping = make_potential(config, env.step_length(), tc.gamma);
  tc.clip_target = config.boolean("train.clip_target");
  tc.clip_loss = config.boolean("train.clip_loss");
  const std::string& cg = config.text("train.clip_gradient");
  if (cg == "hard") {
    tc.clip_gradient = autograd::ClipGradient::hard;
  } else if (cg == "straight_through") {
    tc.clip_gradient = autograd::ClipGradient::straight_through;
  } else {
    throw ParseError("train.clip_gradient: expected hard or straight_through");
  }
  tc.action_l2 = config.real("train.action_l2");
  tc.eval_episodes = count("train.eval_episodes");
  tc.stop_at_success = config.real("train.stop_at_success");
  tc.seed = seed;
  tc.critic_hidden = config.int_list("train.critic_hidden");
  tc.latent_dim = count("train.latent_dim");
  tc.head_hidden = config.int_list("train.head_hidden");
  tc.embed_dim = count("train.embed_dim");
  tc.actor_hidden = config.int_list("train.actor_hidden");
  tc.validate();
  return tc;
}

std::vector<Trial> run_trials(const RunConfig& config, TrainRewardMode mode, std::ostream* log) {
  const std::vector<int> seeds = check_seeds(config);
  const std::unique_ptr<GoalEnv> env = make_env(config);
  std::vector<TrainConfig> configs;
  for (int seed : seeds) configs.push_back(make_train_config(config, *env, static_cast<std::uint64_t>(seed), mode));

  std::vector<Trial> trials(seeds.size());
  const long long requested = config.integer("run.jobs");
  if (requested < 1) throw ParseError("run.jobs must be >= 1");
  const std::size_t jobs = std::min<std::size_t>(static_cast<std::size_t>(requested), seeds.size());

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        Trainer trainer(*env, configs[i]);
        auto curve = trainer.train([&](const CurveRow& row) {
          if (!log) return;
          std::lock_guard lock(log_mutex);
          *log << to_string(mode) << " seed " << seeds[i] << " epoch " << row.epoch << " success "
               << fmt(row.success_rate) << " loss " << fmt(row.critic_loss) << '\n';
        });
        trials[i] = Trial{mode, seeds[i], std::move(curve), trainer.nets()};
      } catch (...) {
        std::lock_guard lock(log_mutex);
        if (!failure) failure = std::current_exception();
        next = seeds.size();
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return trials;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<AggregateRow> aggregate(const std::vector<Trial>& trials) {
  const auto success = by_epoch(trials, true);
  const auto loss = by_epoch(trials, false);
  std::vector<AggregateRow> rows;
  for (std::size_t e = 0; e < success.size(); ++e) {
    if (success[e].empty()) continue;
    rows.push_back({static_cast<int>(e + 1), mean(success[e]), sample_sd(success[e]), mean(loss[e]),
                    sample_sd(loss[e]), success[e].size()});
  }
  return rows;
}

int censored_epochs_to_threshold(const std::vector<CurveRow>& curve, double threshold, int epochs) {
  const auto hit = epochs_to_threshold(curve, threshold);
  return hit ? *hit : epochs + 1;
}

GradCheckInstance make_gradcheck_instance(std::uint64_t seed, int batch_size) {
  if (batch_size < 1) throw ParseError("audit.grad_batch must be >= 1");
  MrnShape shape;
  shape.encoder_hidden = {16, 16};
  shape.latent_dim = 8;
  shape.head_hidden = {16};
  shape.sym_dim = 8;
  shape.asym_dim = 8;
  GradCheckInstance inst{MrnParams::create(shape, seed), {}};
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), target(-5.0, 0.0);
  auto fill = [&](Matrix& m, int cols) {
    m.resize(batch_size, cols);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = unit(rng);
  };
  fill(inst.batch.obs, shape.obs_dim);
  fill(inst.batch.action, shape.action_dim);
  fill(inst.batch.goal, shape.goal_dim);
  inst.batch.target.resize(batch_size);
  for (Eigen::Index i = 0; i < batch_size; ++i) inst.batch.target(i) = target(rng);
  return inst;
}

int cmd_audit(const RunConfig& config, std::ostream& log) {
  const fs::path dir = prepare_out_dir(config);
  const std::string seed = std::to_string(config.integer("audit.search_seed"));
  const double tol = config.real("audit.tolerance");
  const double ptol = config.real("audit.progressive_tolerance");
  const GoalConditionedMDP model = load_audit_model(config);
  bool ok = true;

  const std::string& table_path = config.text("model.table");
  if (!table_path.empty()) {
    std::ifstream in(table_path);
    if (!in) throw ParseError("cannot open value table '" + table_path + "'");
    const QTable q = read_qtable_csv(in, model.gamma());
    const AuditReport r = triangle_audit(q, model, tol);
    CsvFile f(dir / "table_triangle.csv", config, seed);
    *f << kTriangleHeader;
    write_triangle_row(*f, "table", r);
    log << "table triangle: " << r.violations << " violations of " << r.checked << ", worst "
        << fmt(r.worst_violation) << '\n';
    if (!r.passed()) {
      log << "  witness x1=(" << r.witness.x1.state << ',' << r.witness.x1.action << ") x2=(" << r.witness.x2.state
          << ',' << r.witness.x2.action << ") goal=" << r.witness.goal << '\n';
    }
    return r.passed() ? kPass : kViolation;
  }

  const QTable qstar = solve_qstar(model);
  const AuditReport sparse = triangle_audit(qstar, model, tol);
  {
    CsvFile f(dir / "sparse_triangle.csv", config, seed);
    *f << kTriangleHeader;
    write_triangle_row(*f, "qstar", sparse);
  }
  log << "sparse triangle: " << sparse.violations << " violations of " << sparse.checked << '\n';
  ok = ok && sparse.passed();

  const PotentialSpec spec = make_potential(config, max_step_displacement(model), model.gamma());
  const AdmissibilityReport adm = admissibility_audit(model, spec, qstar, tol);
  {
    CsvFile f(dir / "admissibility.csv", config, seed);
    write_admissibility_csv(*f, adm);
  }
  log << "admissibility: " << (adm.holds ? "holds" : "fails") << ", worst gap " << fmt(adm.worst_gap) << " (eta "
      << fmt(spec.eta) << ")\n";
  ok = ok && adm.holds;

  if (!adm.holds) {
    CsvFile f(dir / "shaped_triangle.csv", config, seed);
    *f << kTriangleHeader;
    *f << "qstar_shaped,0,0,,,,,,,,precondition failed\n";
    log << "shaped audits skipped: precondition failed\n";
  } else {
    const QTable qf = solve_shaped_qstar(model, spec, qstar, tol);

    const AuditReport shaped = triangle_audit(qf, model, tol);
    {
      CsvFile f(dir / "shaped_triangle.csv", config, seed);
      *f << kTriangleHeader;
      write_triangle_row(*f, "qstar_shaped", shaped);
    }
    log << "shaped triangle: " << shaped.violations << " violations of " << shaped.checked << ", worst "
        << fmt(shaped.worst_violation) << '\n';
    ok = ok && shaped.passed();

    const BoundsReport bounds = projection_bounds_audit(qf, model, spec, tol);
    {
      CsvFile f(dir / "shaped_bounds.csv", config, seed);
      *f << "checked,violations,worst_excess,tolerance,state,action,goal,status\n";
      *f << bounds.checked << ',' << bounds.violations << ',' << fmt(bounds.worst_excess) << ','
         << fmt(bounds.tolerance) << ',' << bounds.witness.x.state << ',' << bounds.witness.x.action << ','
         << bounds.witness.goal << ',' << (bounds.passed() ? "pass" : "violation") << '\n';
    }
    log << "shaped bounds: " << bounds.violations << " violations of " << bounds.checked << '\n';
    ok = ok && bounds.passed();

    const QTable q_eval = policy_evaluation(model, greedy_policy(qstar), RewardMode::shaped, spec);
    const double gap = sup_norm_difference(qf, q_eval);
    const bool identity_ok = gap <= ptol;
    {
      CsvFile f(dir / "shaped_identity.csv", config, seed);
      *f << "sup_norm,tolerance,status\n" << fmt(gap) << ',' << fmt(ptol) << ',' << (identity_ok ? "pass" : "violation")
         << '\n';
    }
    log << "shaped identity: sup-norm " << fmt(gap) << '\n';
    ok = ok && identity_ok;

    const ArgmaxAgreement agree = greedy_argmax_report(qstar, qf, tol);
    {
      CsvFile f(dir / "policy_invariance.csv", config, seed);
      *f << "states,goals,disagreements,tie_tolerance,status\n"
         << agree.states << ',' << agree.goals << ',' << agree.disagreements << ',' << fmt(tol) << ','
         << (agree.all() ? "pass" : "violation") << '\n';
    }
    log << "policy invariance: " << agree.disagreements << " disagreements\n";
    ok = ok && agree.all();
  }

  ProgressiveSearchOptions search;
  search.budget = static_cast<std::size_t>(std::max(0LL, config.integer("audit.search_budget")));
  search.max_found = static_cast<std::size_t>(std::max(1LL, config.integer("audit.search_max_found")));
  search.seed = static_cast<std::uint64_t>(config.integer("audit.search_seed"));
  const ProgressiveSearchResult found = find_progressive_policies(model, qstar, search);
  {
    CsvFile f(dir / "progressive.csv", config, seed);
    *f << "candidate,mix_weight,epsilon,gap_min,gap_max,triangle_violations,worst_violation,bound_slack,status\n";
    for (const ProgressiveCandidate& c : found.found) {
      const double eps = *c.report.epsilon;
      const AuditReport r = triangle_audit(c.q_pi, model, ptol);
      const double slack = progressive_bound_slack(c.q_pi, qstar, model, eps);
      const bool pass = r.passed() && slack >= -ptol;
      ok = ok && pass;
      *f << c.candidate_index << ',' << fmt(c.mix_weight) << ',' << fmt(eps) << ',' << fmt(c.report.gap_min) << ','
         << fmt(c.report.gap_max) << ',' << r.violations << ',' << fmt(r.worst_violation) << ',' << fmt(slack) << ','
         << (pass ? "pass" : "violation") << '\n';
    }
  }
  log << "progressive search: " << found.found.size() << " found in " << found.evaluated << " candidates\n";

  return ok ? kPass : kViolation;
}

int cmd_shape_check(const RunConfig& config, std::ostream& log) {
  const fs::path dir = prepare_out_dir(config);
  const GoalConditionedMDP model = load_audit_model(config);
  const PotentialSpec spec = make_potential(config, max_step_displacement(model), model.gamma());
  const QTable qstar = solve_qstar(model);
  const AdmissibilityReport adm = admissibility_audit(model, spec, qstar, config.real("audit.tolerance"));
  CsvFile f(dir / "admissibility.csv", config, std::to_string(config.integer("audit.search_seed")));
  write_admissibility_csv(*f, adm);
  log << "admissibility (" << to_string(spec.distance) << ", eta " << fmt(spec.eta) << "): "
      << (adm.holds ? "holds" : "fails") << ", worst gap " << fmt(adm.worst_gap) << " at state "
      << adm.witness.x.state << " action " << adm.witness.x.action << " goal " << adm.witness.goal << '\n';
  return adm.holds ? kPass : kViolation;
}

int cmd_train(const RunConfig& config, std::ostream& log) {
  const TrainRewardMode mode = train_reward_mode_from_string(config.text("train.reward_mode"));
  if (mode == TrainRewardMode::dense) require_shaping_keys(config);
  const std::vector<int> seeds = check_seeds(config);
  const fs::path dir = prepare_out_dir(config);
  const std::vector<Trial> trials = run_trials(config, mode, &log);
  const std::string seed_text = seed_list_text(seeds);
  {
    CsvFile f(dir / "curves.csv", config, seed_text);
    *f << kCurveHeader;
    write_curves(*f, trials);
  }
  {
    CsvFile f(dir / "aggregate.csv", config, seed_text);
    *f << kAggregateHeader;
    write_aggregate(*f, mode, aggregate(trials));
  }
  for (const Trial& t : trials) {
    CsvFile f(dir / ("checkpoint_seed" + std::to_string(t.seed) + ".txt"), config, std::to_string(t.seed));
    write_checkpoint(*f, t.nets);
  }
  return kPass;
}

int cmd_compare(const RunConfig& config, std::ostream& log) {
  require_shaping_keys(config);
  const std::vector<int> seeds = check_seeds(config);
  const double threshold = config.real("compare.threshold");
  const int epochs = static_cast<int>(config.integer("train.epochs"));
  const fs::path dir = prepare_out_dir(config);
  const std::string seed_text = seed_list_text(seeds);

  std::map<TrainRewardMode, std::vector<Trial>> runs;
  for (TrainRewardMode mode : {TrainRewardMode::sparse, TrainRewardMode::dense}) {
    runs[mode] = run_trials(config, mode, &log);
  }

  {
    CsvFile f(dir / "compare_curves.csv", config, seed_text);
    *f << kCurveHeader;
    for (const auto& [mode, trials] : runs) write_curves(*f, trials);
  }
  {
    CsvFile f(dir / "compare_aggregate.csv", config, seed_text);
    *f << kAggregateHeader;
    for (const auto& [mode, trials] : runs) write_aggregate(*f, mode, aggregate(trials));
  }

  std::map<TrainRewardMode, std::vector<double>> hits;
  {
    CsvFile f(dir / "compare_summary.csv", config, seed_text);
    *f << "reward_mode,seed,epochs_to_threshold,reached,final_success\n";
    for (const auto& [mode, trials] : runs) {
      for (const Trial& t : trials) {
        const int e = censored_epochs_to_threshold(t.curve, threshold, epochs);
        hits[mode].push_back(e);
        *f << to_string(mode) << ',' << t.seed << ',' << e << ',' << (e <= epochs ? 1 : 0) << ','
           << fmt(t.curve.empty() ? 0.0 : t.curve.back().success_rate) << '\n';
      }
    }
  }

  const double sparse_mean = mean(hits[TrainRewardMode::sparse]);
  const double sparse_sd = sample_sd(hits[TrainRewardMode::sparse]);
  const double dense_mean = mean(hits[TrainRewardMode::dense]);
  const double dense_sd = sample_sd(hits[TrainRewardMode::dense]);
  const bool no_worse = dense_mean <= sparse_mean + sparse_sd;
  {
    CsvFile f(dir / "compare_verdict.csv", config, seed_text);
    *f << "threshold,sparse_mean,sparse_sd,dense_mean,dense_sd,dense_improves,dense_no_worse\n"
       << fmt(threshold) << ',' << fmt(sparse_mean) << ',' << fmt(sparse_sd) << ',' << fmt(dense_mean) << ','
       << fmt(dense_sd) << ',' << (dense_mean < sparse_mean ? 1 : 0) << ',' << (no_worse ? 1 : 0) << '\n';
  }
  log << "epochs to " << fmt(threshold) << ": sparse " << fmt(sparse_mean) << " +- " << fmt(sparse_sd) << ", dense "
      << fmt(dense_mean) << " +- " << fmt(dense_sd) << (no_worse ? "" : "  (dense worse)") << '\n';
  return no_worse ? kPass : kViolation;
}

int cmd_grad_check(const RunConfig& config, std::ostream& log) {
  const fs::path dir = prepare_out_dir(config);
  const double tol = config.real("audit.grad_tolerance");
  const long long instances = config.integer("audit.grad_instances");
  if (instances < 1) throw ParseError("audit.grad_instances must be >= 1");
  const int batch = static_cast<int>(config.integer("audit.grad_batch"));
  const long long base = config.integer("audit.search_seed");
  GradCheckOptions opts;
  opts.step = config.real("audit.grad_step");

  CsvFile f(dir / "gradcheck.csv", config, std::to_string(base));
  *f << "instance,seed,parameters,samples_used,samples_skipped,max_relative_error,worst_array,status\n";
  bool ok = true;
  for (long long i = 0; i < instances; ++i) {
    const auto seed = static_cast<std::uint64_t>(base * 1000 + i);
    const GradCheckInstance inst = make_gradcheck_instance(seed, batch);
    const GradCheckResult r = finite_diff_check(inst.params, inst.batch, opts);
    const bool pass = !r.skipped && r.max_relative_error < tol;
    ok = ok && pass;
    *f << i << ',' << seed << ',' << r.parameters_checked << ',' << r.samples_used << ',' << r.samples_skipped << ','
       << fmt(r.max_relative_error) << ',' << r.worst_array << ',' << (r.skipped ? "skipped" : pass ? "pass" : "violation")
       << '\n';
    log << "instance " << i << ": max relative error " << fmt(r.max_relative_error) << " over "
        << r.parameters_checked << " parameters\n";
  }
  return ok ? kPass : kViolation;
}

int cmd_export_model(const RunConfig& config, const std::string& which, const std::string& path, std::ostream& log) {
  const double gamma = config.real("env.gamma");
  auto build = [&]() -> GoalConditionedMDP {
    if (which == "gridworld") {
      GridOptions o;
      o.layout = {static_cast<std::size_t>(config.integer("env.width")),
                  static_cast<std::size_t>(config.integer("env.height"))};
      o.gamma = gamma;
      return make_gridworld(o);
    }
    if (which == "chain") return make_chain(3, gamma);
    if (which == "random") {
      RandomMdpOptions o;
      o.gamma = gamma;
      return make_random_mdp(o);
    }
    if (which == "point_reach") {
      RunConfig c = config;
      c.set("env.name", "point_reach");
      return make_env(c)->enumerate_model();
    }
    throw ParseError("unknown model '" + which + "' (gridworld | chain | random | point_reach)");
  };
  const GoalConditionedMDP model = build();
  save_model(path, model);
  log << "wrote " << which << " (" << model.num_states() << " states, " << model.num_actions() << " actions, "
      << model.num_goals() << " goals) to " << path << '\n';
  return kPass;
}

}  // namespace gcrl::harness
