#include <CLI11.hpp>
#include <exception>
#include <iostream>
#include <string>

#include "gcrl/harness/commands.hpp"
#include "gcrl/harness/config.hpp"

using namespace gcrl::harness;

namespace {

void common_flags(CLI::App* cmd, CommandOptions& o) {
  cmd->add_option_function<std::string>("-c,--config", [&o](const std::string& p) { o.config_path = p; },
                                        "config file (key = value with [sections])");
  cmd->add_option("--set", o.overrides, "override a key, e.g. --set train.epochs=5")->take_all();
  cmd->add_option_function<long long>("--seed", [&o](long long v) { o.seed = v; }, "single seed (replaces run.seeds)");
  cmd->add_option_function<std::string>("--out-dir", [&o](const std::string& p) { o.out_dir = p; }, "output directory");
  cmd->add_option_function<long long>("--jobs", [&o](long long v) { o.jobs = v; }, "concurrent trials");
  cmd->add_option_function<double>("--tolerance", [&o](double v) { o.tolerance = v; }, "audit tolerance");
}

void model_arg(CLI::App* cmd, CommandOptions& o) {
  cmd->add_option_function<std::string>("model", [&o](const std::string& p) { o.model_path = p; },
                                        "tabular model file (default: enumerate the configured env)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gcrl: goal-conditioned RL audits, training and comparisons"};
  app.require_subcommand(1);
  CommandOptions opts;
  std::string which, export_path;
  bool print_keys = false;

  auto* audit = app.add_subcommand("audit", "triangle, admissibility, bounds and progressive-policy audits");
  common_flags(audit, opts);
  model_arg(audit, opts);
  auto* train = app.add_subcommand("train", "train one agent per seed and write learning curves");
  common_flags(train, opts);
  auto* compare = app.add_subcommand("compare", "paired sparse / dense training with matched seeds");
  common_flags(compare, opts);
  auto* shape = app.add_subcommand("shape-check", "admissibility of the configured potential");
  common_flags(shape, opts);
  model_arg(shape, opts);
  auto* grad = app.add_subcommand("grad-check", "MRN critic gradients against finite differences");
  common_flags(grad, opts);
  auto* exp = app.add_subcommand("export-model", "write a bundled tabular model file");
  common_flags(exp, opts);
  exp->add_option("which", which, "gridworld | chain | random | point_reach")->required();
  exp->add_option("path", export_path, "output file")->required();
  auto* keys = app.add_subcommand("keys", "list every config key with its default");
  keys->callback([&] { print_keys = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  if (print_keys) {
    for (const KeySpec& k : key_registry()) {
      std::cout << k.name << " = " << k.default_value << (k.help.empty() ? "" : "    # " + k.help) << '\n';
    }
    return kPass;
  }

  try {
    if (grad->parsed()) opts.tolerance_key = "audit.grad_tolerance";
    const RunConfig config = resolve_config(opts);
    if (audit->parsed()) return cmd_audit(config, std::cout);
    if (train->parsed()) return cmd_train(config, std::cout);
    if (compare->parsed()) return cmd_compare(config, std::cout);
    if (shape->parsed()) return cmd_shape_check(config, std::cout);
    if (grad->parsed()) return cmd_grad_check(config, std::cout);
    if (exp->parsed()) return cmd_export_model(config, which, export_path, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "gcrl: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
