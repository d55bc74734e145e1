#include "gcrl/harness/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "gcrl/errors.hpp"
#include "gcrl/numfmt.hpp"

namespace gcrl::harness {

namespace {

std::vector<KeySpec> build_registry() {
  using T = ValueType;
  std::vector<KeySpec> keys = {
      {"env.name", T::text, "gridworld", "gridworld | point_reach"},
      {"env.width", T::integer, "5", "gridworld columns"},
      {"env.height", T::integer, "5", "gridworld rows"},
      {"env.horizon", T::integer, "0", "episode length; 0 = env default (gridworld 20, point_reach 50)"},
      {"env.gamma", T::real, "0.98", "discount"},
      {"env.max_step", T::real, "0.2", "point_reach displacement cap"},
      {"env.success_radius", T::real, "0.1", "point_reach goal lattice spacing"},
      {"env.random_start", T::boolean, "true", "point_reach uniform start (else origin)"},
      {"env.discretization", T::real, "0", "point_reach grid resolution for enumeration; 0 = none"},
      {"env.terminate_on_goal", T::boolean, "false", "end episodes on the first zero reward"},
      {"model.path", T::text, "", "tabular model file for audit / shape-check"},
      {"model.table", T::text, "", "value table CSV audited instead of solving the model"},
      {"shaping.distance", T::text, "scaled_euclidean", "zero | arccos | scaled_euclidean | custom_table"},
      {"shaping.eta", T::real, "0", "goal distance per step; 0 = largest one-step move of the model/env"},
      {"train.epochs", T::integer, "200", ""},
      {"train.episodes_per_epoch", T::integer, "50", ""},
      {"train.updates_per_episode", T::integer, "40", "critic+actor steps after each episode"},
      {"train.batch_size", T::integer, "128", ""},
      {"train.buffer_capacity", T::integer, "10000", "in episodes"},
      {"train.actor_lr", T::real, "0.001", ""},
      {"train.critic_lr", T::real, "0.001", ""},
      {"train.optimizer", T::text, "adam", "adam | sgd"},
      {"train.polyak", T::real, "0.95", ""},
      {"train.noise", T::real, "0.2", "Gaussian std as a fraction of the action bound"},
      {"train.random_action_prob", T::real, "0.3", ""},
      {"train.her_ratio", T::real, "0.8", ""},
      {"train.her_strategy", T::text, "future", "future | final"},
      {"train.reward_mode", T::text, "sparse", "sparse | dense"},
      {"train.clip_target", T::boolean, "true", "clip TD targets to [lower, 0]"},
      {"train.clip_loss", T::boolean, "true", "clip the critic output inside the loss"},
      {"train.clip_gradient", T::text, "hard", "hard | straight_through"},
      {"train.action_l2", T::real, "1", "weight of mean((a/bound)^2) in the actor loss"},
      {"train.eval_episodes", T::integer, "50", ""},
      {"train.stop_at_success", T::real, "0", "stop once an epoch reaches this success; 0 = never"},
      {"train.critic_hidden", T::int_list, "256, 256", "encoder hidden widths"},
      {"train.latent_dim", T::integer, "16", ""},
      {"train.head_hidden", T::int_list, "256", "mu1 / mu2 hidden widths"},
      {"train.embed_dim", T::integer, "16", "mu1 and mu2 output size"},
      {"train.actor_hidden", T::int_list, "256, 256", ""},
      {"audit.tolerance", T::real, "1e-9", "triangle / admissibility tolerance"},
      {"audit.progressive_tolerance", T::real, "1e-8", "tolerance for progressive-policy audits"},
      {"audit.search_budget", T::integer, "10000", "progressive-policy candidates"},
      {"audit.search_max_found", T::integer, "3", ""},
      {"audit.search_seed", T::integer, "1", ""},
      {"audit.grad_tolerance", T::real, "1e-4", "max relative error for grad-check"},
      {"audit.grad_instances", T::integer, "10", ""},
      {"audit.grad_step", T::real, "1e-5", ""},
      {"audit.grad_batch", T::integer, "4", "samples per grad-check instance"},
      {"compare.threshold", T::real, "0.9", "success rate that counts as solved"},
      {"run.seeds", T::int_list, "1", "comma list, ranges as a..b"},
      {"run.jobs", T::integer, "1", "concurrent trials"},
      {"run.out_dir", T::text, "out", ""},
  };
  std::sort(keys.begin(), keys.end(), [](const KeySpec& a, const KeySpec& b) { return a.name < b.name; });
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::string item;
  std::string normalized = value;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  std::istringstream in(normalized);
  while (in >> item) {
    const auto dots = item.find("..");
    try {
      if (dots == std::string::npos) {
        out.push_back(static_cast<int>(parse_int(item)));
      } else {
        const long long lo = parse_int(item.substr(0, dots)), hi = parse_int(item.substr(dots + 2));
        if (hi < lo || hi - lo > 100000) throw ParseError("bad range");
        for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<int>(v));
      }
    } catch (const ParseError&) {
      throw ParseError(key + ": '" + item + "' is not an integer or a..b range");
    }
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ParseError(key + ": '" + value + "' is not a boolean");
}

void check_type(const KeySpec& spec, const std::string& value) {
  try {
    switch (spec.type) {
      case ValueType::integer: parse_int(value); break;
      case ValueType::real: parse_double(value); break;
      case ValueType::boolean: parse_bool(spec.name, value); break;
      case ValueType::int_list: parse_int_list(spec.name, value); break;
      case ValueType::text: break;
    }
  } catch (const ParseError& e) {
    throw ParseError(spec.name + ": invalid value '" + value + "' (" + e.what() + ")");
  }
}

const KeySpec& require_key(const std::string& key) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw ParseError("unknown config key '" + key + "'");
  return *spec;
}

}  // namespace

const std::vector<KeySpec>& key_registry() {
  static const std::vector<KeySpec> registry = build_registry();
  return registry;
}

const KeySpec* find_key(std::string_view name) {
  const auto& keys = key_registry();
  auto it = std::lower_bound(keys.begin(), keys.end(), name, [](const KeySpec& k, std::string_view n) { return k.name < n; });
  return it != keys.end() && it->name == name ? &*it : nullptr;
}

RunConfig::RunConfig() {
  for (const KeySpec& k : key_registry()) values_[k.name] = k.default_value;
}

RunConfig RunConfig::parse(std::istream& in, const std::string& origin) {
  RunConfig cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    std::string body = trim(line);
    if (body.empty() || body[0] == '#' || body[0] == ';') continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError(where + "unterminated section header");
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      if (section.empty() || section.find_first_of(" \t=") != std::string::npos) {
        throw ParseError(where + "bad section name");
      }
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(where + "expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string::npos) value = trim(value.substr(0, hash));
    if (key.empty()) throw ParseError(where + "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      cfg.set(full, value);
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  return parse(in, path);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec& spec = require_key(key);
  check_type(spec, value);
  values_[key] = value;
  explicit_[key] = true;
}

void RunConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ParseError("override '" + assignment + "' is not key=value");
  set(trim(std::string_view(assignment).substr(0, eq)), trim(std::string_view(assignment).substr(eq + 1)));
}

bool RunConfig::explicitly_set(const std::string& key) const {
  require_key(key);
  auto it = explicit_.find(key);
  return it != explicit_.end() && it->second;
}

const std::string& RunConfig::raw(const std::string& key) const {
  require_key(key);
  return values_.at(key);
}

long long RunConfig::integer(const std::string& key) const { return parse_int(raw(key)); }
double RunConfig::real(const std::string& key) const { return parse_double(raw(key)); }
bool RunConfig::boolean(const std::string& key) const { return parse_bool(key, raw(key)); }
const std::string& RunConfig::text(const std::string& key) const { return raw(key); }
std::vector<int> RunConfig::int_list(const std::string& key) const { return parse_int_list(key, raw(key)); }

std::string RunConfig::resolved_text() const { return canonical_text(true); }

std::string RunConfig::canonical_text(bool with_runtime_keys) const {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : values_) {
    if (!with_runtime_keys && (key == "run.out_dir" || key == "run.jobs")) continue;
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      out << (section.empty() ? "" : "\n") << '[' << s << "]\n";
      section = s;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_text(false))));
  return buf;
}

}  // namespace gcrl::harness
