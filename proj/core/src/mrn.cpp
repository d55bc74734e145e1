#include "gcrl/mrn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "gcrl/errors.hpp"
#include "gcrl/numfmt.hpp"

namespace gcrl {

using autograd::Tape;
using autograd::Var;

// ---- Mlp ----

Mlp Mlp::create(const std::vector<int>& sizes, Rng& rng) {
  if (sizes.size() < 2) throw DimensionError("an MLP needs at least input and output sizes");
  for (int n : sizes) {
    if (n <= 0) throw DimensionError("MLP layer sizes must be positive");
  }
  Mlp net;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[i]));
    std::uniform_real_distribution<double> init(-bound, bound);
    Layer layer{Matrix(sizes[i], sizes[i + 1]), Matrix(1, sizes[i + 1])};
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = init(rng);
    }
    for (Eigen::Index c = 0; c < layer.bias.cols(); ++c) layer.bias(0, c) = init(rng);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Mlp Mlp::zeros_like() const {
  Mlp out;
  for (const Layer& l : layers) {
    out.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Matrix::Zero(1, l.bias.cols())});
  }
  return out;
}

int Mlp::input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weight.rows()); }
int Mlp::output_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().weight.cols()); }

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::vector<Matrix*> Mlp::arrays() {
  std::vector<Matrix*> out;
  for (Layer& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Matrix*> Mlp::arrays() const {
  std::vector<const Matrix*> out;
  for (const Layer& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

Matrix mlp_forward(const Mlp& net, const Matrix& x) {
  if (x.cols() != net.input_dim()) {
    throw DimensionError("MLP input has " + std::to_string(x.cols()) + " columns, expected " +
                         std::to_string(net.input_dim()));
  }
  Matrix h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    Matrix z = h * net.layers[i].weight;
    z.rowwise() += net.layers[i].bias.row(0);
    h = i + 1 < net.layers.size() ? Matrix(z.cwiseMax(0.0)) : std::move(z);
  }
  return h;
}

std::vector<bool> mlp_near_kink(const Mlp& net, const Matrix& x, double margin) {
  std::vector<bool> near(static_cast<std::size_t>(x.rows()), false);
  Matrix h = x;
  for (std::size_t i = 0; i + 1 < net.layers.size(); ++i) {
    Matrix z = h * net.layers[i].weight;
    z.rowwise() += net.layers[i].bias.row(0);
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      if ((z.row(r).array().abs() < margin).any()) near[static_cast<std::size_t>(r)] = true;
    }
    h = z.cwiseMax(0.0);
  }
  return near;
}

Var mlp_graph(Tape& tape, const Mlp& net, Mlp* grad, Var x) {
  if (x.cols() != net.input_dim()) {
    throw DimensionError("MLP input has " + std::to_string(x.cols()) + " columns, expected " +
                         std::to_string(net.input_dim()));
  }
  Var h = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& l = net.layers[i];
    Var w = grad ? tape.parameter(l.weight, &grad->layers[i].weight) : tape.constant_ref(l.weight);
    Var b = grad ? tape.parameter(l.bias, &grad->layers[i].bias) : tape.constant_ref(l.bias);
    h = tape.affine(h, w, b);
    if (i + 1 < net.layers.size()) h = tape.relu(h);
  }
  return h;
}

namespace {

std::vector<int> layer_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

void append_names(std::vector<std::string>& names, const std::string& prefix, const Mlp& net) {
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    names.push_back(prefix + "." + std::to_string(i) + ".weight");
    names.push_back(prefix + "." + std::to_string(i) + ".bias");
  }
}

bool finite(const std::vector<const Matrix*>& arrays) {
  return std::all_of(arrays.begin(), arrays.end(), [](const Matrix* m) { return m->allFinite(); });
}

void check_positive(int value, const char* what) {
  if (value <= 0) throw DimensionError(std::string(what) + " must be positive");
}

}  // namespace

// ---- MrnParams ----

void MrnShape::validate() const {
  check_positive(obs_dim, "obs_dim");
  check_positive(action_dim, "action_dim");
  check_positive(goal_dim, "goal_dim");
  check_positive(latent_dim, "latent_dim");
  check_positive(sym_dim, "sym_dim");
  check_positive(asym_dim, "asym_dim");
  for (int h : encoder_hidden) check_positive(h, "encoder hidden width");
  for (int h : head_hidden) check_positive(h, "head hidden width");
}

MrnParams MrnParams::create(const MrnShape& shape, std::uint64_t seed) {
  shape.validate();
  Rng rng(seed);
  MrnParams p;
  p.shape = shape;
  p.seed = seed;
  p.encoder_sa = Mlp::create(layer_sizes(shape.obs_dim + shape.action_dim, shape.encoder_hidden, shape.latent_dim), rng);
  p.encoder_sg = Mlp::create(layer_sizes(shape.obs_dim + shape.goal_dim, shape.encoder_hidden, shape.latent_dim), rng);
  p.head_sym = Mlp::create(layer_sizes(shape.latent_dim, shape.head_hidden, shape.sym_dim), rng);
  p.head_asym = Mlp::create(layer_sizes(shape.latent_dim, shape.head_hidden, shape.asym_dim), rng);
  return p;
}

MrnParams MrnParams::zeros_like() const {
  MrnParams z;
  z.shape = shape;
  z.seed = seed;
  z.encoder_sa = encoder_sa.zeros_like();
  z.encoder_sg = encoder_sg.zeros_like();
  z.head_sym = head_sym.zeros_like();
  z.head_asym = head_asym.zeros_like();
  return z;
}

std::size_t MrnParams::parameter_count() const {
  return encoder_sa.parameter_count() + encoder_sg.parameter_count() + head_sym.parameter_count() +
         head_asym.parameter_count();
}

std::vector<Matrix*> MrnParams::arrays() {
  std::vector<Matrix*> out;
  for (Mlp* net : {&encoder_sa, &encoder_sg, &head_sym, &head_asym}) {
    auto a = net->arrays();
    out.insert(out.end(), a.begin(), a.end());
  }
  return out;
}

std::vector<const Matrix*> MrnParams::arrays() const {
  std::vector<const Matrix*> out;
  for (const Mlp* net : {&encoder_sa, &encoder_sg, &head_sym, &head_asym}) {
    auto a = net->arrays();
    out.insert(out.end(), a.begin(), a.end());
  }
  return out;
}

std::vector<std::string> MrnParams::array_names() const {
  std::vector<std::string> names;
  append_names(names, "encoder_sa", encoder_sa);
  append_names(names, "encoder_sg", encoder_sg);
  append_names(names, "head_sym", head_sym);
  append_names(names, "head_asym", head_asym);
  return names;
}

bool MrnParams::all_finite() const { return finite(arrays()); }

// ---- ActorParams ----

void ActorShape::validate() const {
  check_positive(obs_dim, "obs_dim");
  check_positive(goal_dim, "goal_dim");
  check_positive(action_dim, "action_dim");
  for (int h : hidden) check_positive(h, "actor hidden width");
  if (!(action_bound > 0.0) || !std::isfinite(action_bound)) throw DomainError("action_bound must be positive");
}

ActorParams ActorParams::create(const ActorShape& shape, std::uint64_t seed) {
  shape.validate();
  Rng rng(seed);
  ActorParams p;
  p.shape = shape;
  p.seed = seed;
  p.net = Mlp::create(layer_sizes(shape.obs_dim + shape.goal_dim, shape.hidden, shape.action_dim), rng);
  return p;
}

ActorParams ActorParams::zeros_like() const {
  ActorParams z;
  z.shape = shape;
  z.seed = seed;
  z.net = net.zeros_like();
  return z;
}

std::size_t ActorParams::parameter_count() const { return net.parameter_count(); }
std::vector<Matrix*> ActorParams::arrays() { return net.arrays(); }
std::vector<const Matrix*> ActorParams::arrays() const { return net.arrays(); }

std::vector<std::string> ActorParams::array_names() const {
  std::vector<std::string> names;
  append_names(names, "net", net);
  return names;
}

bool ActorParams::all_finite() const { return finite(arrays()); }

// ---- distances ----

double sym_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionError("sym_distance: embedding sizes differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += (u[i] - v[i]) * (u[i] - v[i]);
  return std::sqrt(sum);
}

double asym_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionError("asym_distance: embedding sizes differ");
  double best = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) best = std::max(best, u[i] - v[i]);
  return best;
}

namespace {
Eigen::VectorXd head_output(const Mlp& head, const Eigen::VectorXd& h) {
  if (h.size() != head.input_dim()) throw DimensionError("latent size does not match the head");
  const Matrix out = mlp_forward(head, h.transpose());
  return out.row(0).transpose();
}
}  // namespace

double d_sym(const Eigen::VectorXd& hx, const Eigen::VectorXd& hy, const MrnParams& params) {
  if (hx.size() != hy.size()) throw DimensionError("d_sym: latent sizes differ");
  const Eigen::VectorXd u = head_output(params.head_sym, hx), v = head_output(params.head_sym, hy);
  return sym_distance({u.data(), static_cast<std::size_t>(u.size())}, {v.data(), static_cast<std::size_t>(v.size())});
}

double d_asym(const Eigen::VectorXd& hx, const Eigen::VectorXd& hy, const MrnParams& params) {
  if (hx.size() != hy.size()) throw DimensionError("d_asym: latent sizes differ");
  const Eigen::VectorXd u = head_output(params.head_asym, hx), v = head_output(params.head_asym, hy);
  return asym_distance({u.data(), static_cast<std::size_t>(u.size())}, {v.data(), static_cast<std::size_t>(v.size())});
}

// ---- critic ----

namespace {

void check_inputs(const MrnShape& shape, const Matrix& obs, const Matrix& action, const Matrix& goal) {
  if (obs.cols() != shape.obs_dim || action.cols() != shape.action_dim || goal.cols() != shape.goal_dim) {
    throw DimensionError("critic inputs have " + std::to_string(obs.cols()) + "/" + std::to_string(action.cols()) +
                         "/" + std::to_string(goal.cols()) + " columns, expected " + std::to_string(shape.obs_dim) +
                         "/" + std::to_string(shape.action_dim) + "/" + std::to_string(shape.goal_dim));
  }
  if (obs.rows() != action.rows() || obs.rows() != goal.rows()) throw DimensionError("critic inputs differ in rows");
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

}  // namespace

MrnLatents mrn_encode(const MrnParams& params, const Matrix& obs, const Matrix& action, const Matrix& goal) {
  check_inputs(params.shape, obs, action, goal);
  return {mlp_forward(params.encoder_sa, hcat(obs, action)), mlp_forward(params.encoder_sg, hcat(obs, goal))};
}

Var critic_graph(Tape& tape, const MrnParams& params, MrnParams* grad, Var obs, Var action, Var goal,
                 const CriticClip& clip) {
  check_inputs(params.shape, obs.value(), action.value(), goal.value());
  Var h_sa = mlp_graph(tape, params.encoder_sa, grad ? &grad->encoder_sa : nullptr, tape.concat(obs, action));
  Var h_sg = mlp_graph(tape, params.encoder_sg, grad ? &grad->encoder_sg : nullptr, tape.concat(obs, goal));
  Mlp* g_sym = grad ? &grad->head_sym : nullptr;
  Mlp* g_asym = grad ? &grad->head_asym : nullptr;
  Var sym = tape.row_norm(tape.sub(mlp_graph(tape, params.head_sym, g_sym, h_sa),
                                   mlp_graph(tape, params.head_sym, g_sym, h_sg)));
  Var asym = tape.row_max_positive(tape.sub(mlp_graph(tape, params.head_asym, g_asym, h_sa),
                                            mlp_graph(tape, params.head_asym, g_asym, h_sg)));
  Var q = tape.neg(tape.add(sym, asym));
  if (clip.enabled()) {
    if (clip.lower.size() != q.rows()) throw DimensionError("clip bound count does not match the batch");
    q = tape.clip_below(q, clip.lower, clip.gradient);
  }
  return q;
}

Eigen::VectorXd critic_forward(const MrnParams& params, const Matrix& obs, const Matrix& action, const Matrix& goal,
                               const CriticClip& clip) {
  Tape tape;
  Var q = critic_graph(tape, params, nullptr, tape.constant_ref(obs), tape.constant_ref(action),
                       tape.constant_ref(goal), clip);
  return q.value().col(0);
}

double critic_forward(const MrnParams& params, const Eigen::VectorXd& obs, const Eigen::VectorXd& action,
                      const Eigen::VectorXd& goal) {
  return critic_forward(params, Matrix(obs.transpose()), Matrix(action.transpose()), Matrix(goal.transpose()))[0];
}

void CriticBatch::validate(const MrnShape& shape) const {
  if (obs.rows() == 0) throw std::invalid_argument("critic batch is empty");
  check_inputs(shape, obs, action, goal);
  if (target.size() != obs.rows()) throw DimensionError("critic batch target count does not match rows");
  if (clip.enabled() && clip.lower.size() != obs.rows()) throw DimensionError("clip bound count does not match rows");
}

namespace {
Var loss_graph(Tape& tape, const MrnParams& params, MrnParams* grad, const CriticBatch& batch) {
  batch.validate(params.shape);
  Var q = critic_graph(tape, params, grad, tape.constant_ref(batch.obs), tape.constant_ref(batch.action),
                       tape.constant_ref(batch.goal), batch.clip);
  return tape.mean(tape.square(tape.sub(tape.constant(Matrix(batch.target)), q)));
}
}  // namespace

CriticGradient critic_grad(const MrnParams& params, const CriticBatch& batch) {
  CriticGradient out{0.0, params.zeros_like()};
  Tape tape;
  Var loss = loss_graph(tape, params, &out.grad, batch);
  tape.backward(loss);
  out.loss = loss.value()(0, 0);
  return out;
}

double critic_loss(const MrnParams& params, const CriticBatch& batch) {
  Tape tape;
  return loss_graph(tape, params, nullptr, batch).value()(0, 0);
}

Matrix critic_action_gradient(const MrnParams& params, const Matrix& obs, const Matrix& action, const Matrix& goal) {
  Tape tape;
  Var a = tape.input(action);
  Var q = critic_graph(tape, params, nullptr, tape.constant_ref(obs), a, tape.constant_ref(goal));
  // Rows are independent, so the gradient of the sum is the per-row gradient.
  tape.backward(tape.scale(tape.mean(q), static_cast<double>(q.rows())));
  return a.grad();
}

// ---- actor ----

Var actor_graph(Tape& tape, const ActorParams& params, ActorParams* grad, Var obs, Var goal) {
  if (obs.cols() != params.shape.obs_dim || goal.cols() != params.shape.goal_dim || obs.rows() != goal.rows()) {
    throw DimensionError("actor inputs do not match the actor shape");
  }
  Var raw = mlp_graph(tape, params.net, grad ? &grad->net : nullptr, tape.concat(obs, goal));
  return tape.scale(tape.tanh(raw), params.shape.action_bound);
}

Matrix actor_forward(const ActorParams& params, const Matrix& obs, const Matrix& goal) {
  Tape tape;
  return actor_graph(tape, params, nullptr, tape.constant_ref(obs), tape.constant_ref(goal)).value();
}

Eigen::VectorXd actor_forward(const ActorParams& params, const Eigen::VectorXd& obs, const Eigen::VectorXd& goal) {
  return actor_forward(params, Matrix(obs.transpose()), Matrix(goal.transpose())).row(0).transpose();
}

// ---- gradient check ----

GradCheckResult finite_diff_check(const std::function<double()>& loss, const std::vector<Matrix*>& arrays,
                                  const std::vector<const Matrix*>& analytic, const GradCheckOptions& options) {
  if (!(options.step > 0.0)) throw DomainError("finite-difference step must be positive");
  if (arrays.size() != analytic.size()) throw DimensionError("gradient array count does not match parameters");
  GradCheckResult result;
  for (std::size_t k = 0; k < arrays.size(); ++k) {
    Matrix& p = *arrays[k];
    const Matrix& g = *analytic[k];
    if (p.rows() != g.rows() || p.cols() != g.cols()) throw DimensionError("gradient array shape mismatch");
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + options.step;
      const double up = loss();
      p.data()[i] = saved - options.step;
      const double down = loss();
      p.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = g.data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), options.relative_floor});
      const double err = std::abs(a - numeric) / denom;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_array = "array " + std::to_string(k);
      }
      ++result.parameters_checked;
    }
  }
  return result;
}

GradCheckResult finite_diff_check(const MrnParams& params, const CriticBatch& batch, const GradCheckOptions& options) {
  batch.validate(params.shape);
  const double margin = options.kink_margin;
  const auto rows = static_cast<std::size_t>(batch.size());

  // Drop samples sitting near a nondifferentiable point.
  const MrnLatents lat = mrn_encode(params, batch.obs, batch.action, batch.goal);
  std::vector<bool> drop = mlp_near_kink(params.encoder_sa, hcat(batch.obs, batch.action), margin);
  auto merge = [&drop](const std::vector<bool>& more) {
    for (std::size_t i = 0; i < drop.size(); ++i) drop[i] = drop[i] || more[i];
  };
  merge(mlp_near_kink(params.encoder_sg, hcat(batch.obs, batch.goal), margin));
  for (const Matrix* h : {&lat.h_sa, &lat.h_sg}) {
    merge(mlp_near_kink(params.head_sym, *h, margin));
    merge(mlp_near_kink(params.head_asym, *h, margin));
  }
  const Matrix diff = mlp_forward(params.head_asym, lat.h_sa) - mlp_forward(params.head_asym, lat.h_sg);
  const Eigen::VectorXd raw = critic_forward(params, batch.obs, batch.action, batch.goal);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    std::vector<double> d(static_cast<std::size_t>(diff.cols()));
    for (Eigen::Index c = 0; c < diff.cols(); ++c) d[static_cast<std::size_t>(c)] = diff(row, c);
    std::sort(d.begin(), d.end(), std::greater<>());
    if (std::abs(d[0]) < margin) drop[r] = true;
    if (d.size() > 1 && d[0] > 0.0 && d[0] - d[1] < margin) drop[r] = true;
    if (batch.clip.enabled() && std::abs(raw[row] - batch.clip.lower[row]) < margin) drop[r] = true;
  }

  CriticBatch kept;
  const auto keep = static_cast<Eigen::Index>(std::count(drop.begin(), drop.end(), false));
  kept.obs.resize(keep, batch.obs.cols());
  kept.action.resize(keep, batch.action.cols());
  kept.goal.resize(keep, batch.goal.cols());
  kept.target.resize(keep);
  if (batch.clip.enabled()) kept.clip.lower.resize(keep);
  kept.clip.gradient = batch.clip.gradient;
  Eigen::Index k = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (drop[r]) continue;
    const auto row = static_cast<Eigen::Index>(r);
    kept.obs.row(k) = batch.obs.row(row);
    kept.action.row(k) = batch.action.row(row);
    kept.goal.row(k) = batch.goal.row(row);
    kept.target[k] = batch.target[row];
    if (batch.clip.enabled()) kept.clip.lower[k] = batch.clip.lower[row];
    ++k;
  }

  GradCheckResult result;
  result.samples_skipped = rows - static_cast<std::size_t>(keep);
  result.samples_used = static_cast<std::size_t>(keep);
  if (keep == 0) {
    result.skipped = true;
    return result;
  }
  MrnParams work = params;
  const CriticGradient analytic = critic_grad(work, kept);
  GradCheckResult checked = finite_diff_check([&] { return critic_loss(work, kept); }, work.arrays(),
                                              analytic.grad.arrays(), options);
  result.max_relative_error = checked.max_relative_error;
  result.parameters_checked = checked.parameters_checked;
  if (!checked.worst_array.empty()) {
    const auto index = static_cast<std::size_t>(std::stoul(checked.worst_array.substr(6)));
    result.worst_array = params.array_names()[index];
  }
  return result;
}

// ---- checkpoints ----

namespace {

constexpr int kFormatVersion = 1;

void write_ints(std::ostream& out, const char* key, const std::vector<int>& values) {
  out << key << ' ' << values.size();
  for (int v : values) out << ' ' << v;
  out << '\n';
}

void write_arrays(std::ostream& out, const std::vector<std::string>& names, const std::vector<const Matrix*>& arrays) {
  for (std::size_t k = 0; k < arrays.size(); ++k) {
    const Matrix& m = *arrays[k];
    out << "array " << names[k] << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? " " : "") << format_double(m(r, c));
      out << '\n';
    }
  }
  out << "end\n";
}

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    std::string tok;
    while (true) {
      if (!(in_ >> tok)) throw ParseError(std::string("checkpoint truncated: expected ") + what);
      if (tok[0] != '#') return tok;
      std::string rest;
      std::getline(in_, rest);
    }
  }
  void expect(const std::string& literal) {
    const std::string tok = next(literal.c_str());
    if (tok != literal) throw ParseError("checkpoint: expected '" + literal + "', found '" + tok + "'");
  }
  long long integer(const char* what) { return parse_int(next(what)); }
  double real(const char* what) { return parse_double(next(what)); }
  int dim(const std::string& key) {
    expect(key);
    const long long v = integer(key.c_str());
    if (v <= 0 || v > (1 << 20)) throw ParseError("checkpoint: bad value for " + key);
    return static_cast<int>(v);
  }
  std::vector<int> dims(const std::string& key) {
    expect(key);
    const long long n = integer(key.c_str());
    if (n < 0 || n > 64) throw ParseError("checkpoint: bad layer count for " + key);
    std::vector<int> out;
    for (long long i = 0; i < n; ++i) {
      const long long v = integer(key.c_str());
      if (v <= 0 || v > (1 << 20)) throw ParseError("checkpoint: bad width in " + key);
      out.push_back(static_cast<int>(v));
    }
    return out;
  }
  void arrays(const std::vector<std::string>& names, const std::vector<Matrix*>& arrays) {
    for (std::size_t k = 0; k < arrays.size(); ++k) {
      expect("array");
      expect(names[k]);
      Matrix& m = *arrays[k];
      if (integer("rows") != m.rows() || integer("cols") != m.cols()) {
        throw ParseError("checkpoint: array " + names[k] + " has the wrong shape");
      }
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = real("array value");
      }
      if (!m.allFinite()) throw ParseError("checkpoint: array " + names[k] + " has non-finite values");
    }
    expect("end");
  }
  std::uint64_t seed() {
    expect("seed");
    const std::string tok = next("seed");
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || tok.empty() || tok[0] == '-') throw ParseError("checkpoint: bad seed '" + tok + "'");
    return v;
  }
  void header(const char* kind) {
    expect("gcrl-params");
    const long long version = integer("version");
    if (version != kFormatVersion) throw ParseError("checkpoint: unsupported format version " + std::to_string(version));
    expect(kind);
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_params(std::ostream& out, const MrnParams& p) {
  const MrnShape& s = p.shape;
  out << "gcrl-params " << kFormatVersion << " mrn\n";
  out << "seed " << p.seed << '\n';
  out << "obs_dim " << s.obs_dim << "\naction_dim " << s.action_dim << "\ngoal_dim " << s.goal_dim << '\n';
  write_ints(out, "encoder_hidden", s.encoder_hidden);
  out << "latent_dim " << s.latent_dim << '\n';
  write_ints(out, "head_hidden", s.head_hidden);
  out << "sym_dim " << s.sym_dim << "\nasym_dim " << s.asym_dim << '\n';
  write_arrays(out, p.array_names(), p.arrays());
}

void write_params(std::ostream& out, const ActorParams& p) {
  const ActorShape& s = p.shape;
  out << "gcrl-params " << kFormatVersion << " actor\n";
  out << "seed " << p.seed << '\n';
  out << "obs_dim " << s.obs_dim << "\ngoal_dim " << s.goal_dim << "\naction_dim " << s.action_dim << '\n';
  write_ints(out, "hidden", s.hidden);
  out << "action_bound " << format_double(s.action_bound) << '\n';
  write_arrays(out, p.array_names(), p.arrays());
}

MrnParams read_mrn_params(std::istream& in) {
  TokenReader r(in);
  r.header("mrn");
  const std::uint64_t seed = r.seed();
  MrnShape s;
  s.obs_dim = r.dim("obs_dim");
  s.action_dim = r.dim("action_dim");
  s.goal_dim = r.dim("goal_dim");
  s.encoder_hidden = r.dims("encoder_hidden");
  s.latent_dim = r.dim("latent_dim");
  s.head_hidden = r.dims("head_hidden");
  s.sym_dim = r.dim("sym_dim");
  s.asym_dim = r.dim("asym_dim");
  MrnParams p = MrnParams::create(s, seed);
  r.arrays(p.array_names(), p.arrays());
  return p;
}

ActorParams read_actor_params(std::istream& in) {
  TokenReader r(in);
  r.header("actor");
  const std::uint64_t seed = r.seed();
  ActorShape s;
  s.obs_dim = r.dim("obs_dim");
  s.goal_dim = r.dim("goal_dim");
  s.action_dim = r.dim("action_dim");
  s.hidden = r.dims("hidden");
  r.expect("action_bound");
  s.action_bound = r.real("action_bound");
  ActorParams p = ActorParams::create(s, seed);
  r.arrays(p.array_names(), p.arrays());
  return p;
}

}  // namespace gcrl
