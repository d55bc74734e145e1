// Plain-text model files.
//
//   gcmdp 1 <states> <actions> <goals> <gamma> <embed_dim> <has_distance_table>
//   rho0 <p_0> ... <p_{S-1}>
//   rhog <q_0> ... <q_{G-1}>
//   goal <g> <e_1> ... <e_K>            one line per goal, only when embed_dim > 0
//   dist <g> <d_g0> ... <d_g(G-1)>      one line per goal, only when the table is present
//   sa <s> <a> <achieved> <T(0|s,a)> ... <T(S-1|s,a)>
//
// Tokens are whitespace separated; '#' starts a comment line. Numbers are
// written in shortest round-trip form so a save/load cycle is exact.

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gcrl/errors.hpp"
#include "gcrl/model.hpp"
#include "gcrl/numfmt.hpp"

namespace gcrl {
namespace {

class TokenLines {
 public:
  explicit TokenLines(std::istream& in) : in_(in) {}

  // Next non-comment, non-blank line split into tokens; empty at EOF.
  std::vector<std::string> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string tok; ss >> tok;) tokens.push_back(tok);
      return tokens;
    }
    return {};
  }

  std::vector<std::string> expect(const std::string& keyword, std::size_t count) {
    auto tokens = next();
    if (tokens.empty()) fail("unexpected end of file, expected '" + keyword + "'");
    if (tokens.front() != keyword) fail("expected '" + keyword + "', found '" + tokens.front() + "'");
    if (tokens.size() != count) {
      fail("'" + keyword + "' line has " + std::to_string(tokens.size()) + " tokens, expected " +
           std::to_string(count));
    }
    return tokens;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("model file line " + std::to_string(line_no_) + ": " + msg);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::size_t to_index(const std::string& tok, TokenLines& lines) {
  try {
    const long long v = parse_int(tok);
    if (v < 0) lines.fail("negative index " + tok);
    return static_cast<std::size_t>(v);
  } catch (const ParseError& e) {
    lines.fail(e.what());
  }
}

double to_real(const std::string& tok, TokenLines& lines) {
  try {
    return parse_double(tok);
  } catch (const ParseError& e) {
    lines.fail(e.what());
  }
}

}  // namespace

void write_model(std::ostream& out, const GoalConditionedMDP& model) {
  const auto& t = model.tables();
  out << "# gcrl goal-conditioned MDP\n";
  out << "gcmdp 1 " << t.num_states << ' ' << t.num_actions << ' ' << t.num_goals << ' '
      << format_double(t.gamma) << ' ' << model.embedding_dim() << ' ' << (model.has_goal_distance() ? 1 : 0)
      << '\n';
  out << "rho0";
  for (double p : t.rho0) out << ' ' << format_double(p);
  out << "\nrhog";
  for (double p : t.rho_goal) out << ' ' << format_double(p);
  out << '\n';
  for (std::size_t g = 0; g < t.goal_embedding.size(); ++g) {
    out << "goal " << g;
    for (double v : t.goal_embedding[g]) out << ' ' << format_double(v);
    out << '\n';
  }
  if (model.has_goal_distance()) {
    for (std::size_t g = 0; g < t.num_goals; ++g) {
      out << "dist " << g;
      for (std::size_t h = 0; h < t.num_goals; ++h) out << ' ' << format_double(t.goal_distance[g * t.num_goals + h]);
      out << '\n';
    }
  }
  for (std::size_t s = 0; s < t.num_states; ++s) {
    for (std::size_t a = 0; a < t.num_actions; ++a) {
      const std::size_t row = s * t.num_actions + a;
      out << "sa " << s << ' ' << a << ' ' << t.achieved[row];
      for (std::size_t n = 0; n < t.num_states; ++n) out << ' ' << format_double(t.transition[row * t.num_states + n]);
      out << '\n';
    }
  }
}

GoalConditionedMDP read_model(std::istream& in) {
  TokenLines lines(in);
  auto header = lines.next();
  if (header.empty() || header.front() != "gcmdp") lines.fail("missing 'gcmdp' header");
  if (header.size() != 8) lines.fail("header must have 8 tokens");
  if (header[1] != "1") lines.fail("unsupported model format version " + header[1]);

  MdpTables t;
  t.num_states = to_index(header[2], lines);
  t.num_actions = to_index(header[3], lines);
  t.num_goals = to_index(header[4], lines);
  t.gamma = to_real(header[5], lines);
  const std::size_t embed_dim = to_index(header[6], lines);
  const std::size_t has_table = to_index(header[7], lines);
  if (has_table > 1) lines.fail("distance table flag must be 0 or 1");
  const std::size_t S = t.num_states, A = t.num_actions, G = t.num_goals;

  auto rho0 = lines.expect("rho0", S + 1);
  for (std::size_t i = 0; i < S; ++i) t.rho0.push_back(to_real(rho0[i + 1], lines));
  auto rhog = lines.expect("rhog", G + 1);
  for (std::size_t i = 0; i < G; ++i) t.rho_goal.push_back(to_real(rhog[i + 1], lines));

  if (embed_dim > 0) {
    t.goal_embedding.resize(G);
    for (std::size_t g = 0; g < G; ++g) {
      auto tok = lines.expect("goal", embed_dim + 2);
      if (to_index(tok[1], lines) != g) lines.fail("goal lines must appear in index order");
      for (std::size_t k = 0; k < embed_dim; ++k) t.goal_embedding[g].push_back(to_real(tok[k + 2], lines));
    }
  }
  if (has_table == 1) {
    t.goal_distance.reserve(G * G);
    for (std::size_t g = 0; g < G; ++g) {
      auto tok = lines.expect("dist", G + 2);
      if (to_index(tok[1], lines) != g) lines.fail("dist lines must appear in index order");
      for (std::size_t h = 0; h < G; ++h) t.goal_distance.push_back(to_real(tok[h + 2], lines));
    }
  }

  t.transition.assign(S * A * S, 0.0);
  t.achieved.assign(S * A, 0);
  std::vector<bool> seen(S * A, false);
  for (std::size_t k = 0; k < S * A; ++k) {
    auto tok = lines.expect("sa", S + 4);
    const std::size_t s = to_index(tok[1], lines), a = to_index(tok[2], lines);
    if (s >= S || a >= A) lines.fail("state-action index out of range");
    const std::size_t row = s * A + a;
    if (seen[row]) lines.fail("duplicate state-action line");
    seen[row] = true;
    t.achieved[row] = to_index(tok[3], lines);
    for (std::size_t n = 0; n < S; ++n) t.transition[row * S + n] = to_real(tok[n + 4], lines);
  }
  if (!lines.next().empty()) lines.fail("trailing content after the last state-action line");

  try {
    return GoalConditionedMDP(std::move(t));
  } catch (const ModelError& e) {
    throw ParseError(std::string("model file is not a valid MDP: ") + e.what());
  }
}

void save_model(const std::string& path, const GoalConditionedMDP& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_model(out, model);
}

GoalConditionedMDP load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file " + path);
  return read_model(in);
}

}  // namespace gcrl
