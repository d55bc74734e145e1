#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gcrl/autograd.hpp"
#include "gcrl/errors.hpp"
#include "gcrl/mrn.hpp"

using namespace gcrl;
using autograd::ClipGradient;
using autograd::Tape;
using autograd::Var;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

MrnShape small_shape() {
  MrnShape s;
  s.encoder_hidden = {16, 16};
  s.latent_dim = 8;
  s.head_hidden = {16};
  s.sym_dim = 8;
  s.asym_dim = 8;
  return s;
}

CriticBatch random_batch(int n, Rng& rng) {
  CriticBatch b;
  b.obs = random_matrix(n, 2, rng);
  b.action = random_matrix(n, 2, rng);
  b.goal = random_matrix(n, 2, rng);
  b.target = random_matrix(n, 1, rng, -5.0, 0.0).col(0);
  return b;
}

// loss = mean(f(x)^2) through every op, checked by the generic finite-difference routine.
void check_op(const std::function<Var(Tape&, Var)>& f, Matrix x) {
  auto loss = [&] {
    Tape t;
    Var v = t.constant_ref(x);
    return t.mean(t.square(f(t, v))).value()(0, 0);
  };
  Matrix g = Matrix::Zero(x.rows(), x.cols());
  {
    Tape t;
    Var v = t.parameter(x, &g);
    t.backward(t.mean(t.square(f(t, v))));
  }
  const auto r = finite_diff_check(loss, {&x}, {&g});
  CHECK(r.max_relative_error < 1e-6);
}

}  // namespace

TEST_CASE("autograd ops against finite differences") {
  Rng rng(2);
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix w = random_matrix(4, 2, rng), b = random_matrix(1, 2, rng);
  check_op([&](Tape& t, Var v) { return t.affine(v, t.constant(w), t.constant(b)); }, x);
  check_op([&](Tape& t, Var v) { return t.tanh(v); }, x);
  check_op([&](Tape& t, Var v) { return t.relu(t.scale(v, 1.5)); }, x);
  check_op([&](Tape& t, Var v) { return t.sub(t.add(v, v), t.neg(v)); }, x);
  check_op([&](Tape& t, Var v) { return t.concat(v, t.tanh(v)); }, x);
  check_op([&](Tape& t, Var v) { return t.row_norm(v); }, x);
  check_op([&](Tape& t, Var v) { return t.row_max_positive(v); }, x);
  check_op([&](Tape& t, Var v) { return t.clip_below(v, Matrix::Constant(3, 4, -0.3)); }, x);
}

TEST_CASE("autograd subgradients at kinks") {
  Tape t;
  Matrix g = Matrix::Zero(1, 2);
  const Matrix zero = Matrix::Zero(1, 2);
  Var v = t.parameter(zero, &g);
  t.backward(t.mean(t.row_norm(v)));
  CHECK(g.isZero());

  Tape t2;
  Matrix g2 = Matrix::Zero(1, 3);
  Matrix neg(1, 3);
  neg << -1, -2, -0.5;
  t2.backward(t2.mean(t2.row_max_positive(t2.parameter(neg, &g2))));
  CHECK(g2.isZero());
}

TEST_CASE("clip gradient modes") {
  Matrix x(2, 1), lower(2, 1);
  x << -80, -10;
  lower << -50, -50;
  for (auto mode : {ClipGradient::hard, ClipGradient::straight_through}) {
    Tape t;
    Matrix g = Matrix::Zero(2, 1);
    Var c = t.clip_below(t.parameter(x, &g), lower, mode);
    CHECK(c.value()(0, 0) == -50.0);
    CHECK(c.value()(1, 0) == -10.0);
    t.backward(t.mean(c));
    CHECK(g(1, 0) == doctest::Approx(0.5));
    CHECK(g(0, 0) == doctest::Approx(mode == ClipGradient::hard ? 0.0 : 0.5));
  }
}

TEST_CASE("parameters used twice accumulate") {
  Matrix x = Matrix::Constant(1, 1, 2.0), g = Matrix::Zero(1, 1);
  Tape t;
  Var v = t.parameter(x, &g);
  t.backward(t.mean(t.add(t.square(v), v)));
  CHECK(g(0, 0) == doctest::Approx(5.0));
  CHECK_THROWS(t.backward(t.concat(v, v)));
}

TEST_CASE("metric distances by hand") {
  CHECK(sym_distance(std::vector<double>{0, 3}, std::vector<double>{4, 0}) == doctest::Approx(5.0));
  const std::vector<double> x{1, 3}, y{2, 1};
  CHECK(asym_distance(x, y) == doctest::Approx(2.0));
  CHECK(asym_distance(y, x) == doctest::Approx(1.0));
  CHECK(asym_distance(x, x) == 0.0);
}

TEST_CASE("critic is non-positive and its distances obey the triangle inequality") {
  const MrnParams p = MrnParams::create(small_shape(), 4);
  Rng rng(8);
  const CriticBatch b = random_batch(500, rng);
  const Eigen::VectorXd q = critic_forward(p, b.obs, b.action, b.goal);
  CHECK(q.maxCoeff() <= 0.0);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd x = random_matrix(8, 1, rng, -3, 3).col(0), y = random_matrix(8, 1, rng, -3, 3).col(0),
                          z = random_matrix(8, 1, rng, -3, 3).col(0);
    const double xy = d_sym(x, y, p) + d_asym(x, y, p);
    const double yz = d_sym(y, z, p) + d_asym(y, z, p);
    const double xz = d_sym(x, z, p) + d_asym(x, z, p);
    CHECK(xz <= xy + yz + 1e-9);
    CHECK(d_sym(x, x, p) + d_asym(x, x, p) == 0.0);
  }
}

TEST_CASE("critic clip at the shaped floor") {
  MrnParams p = MrnParams::create(small_shape(), 1);
  // scale the last sym layer so Q is far below the floor
  p.head_sym.layers.back().weight *= 400.0;
  Rng rng(3);
  const CriticBatch b = random_batch(1, rng);
  const double raw = critic_forward(p, b.obs, b.action, b.goal)(0);
  REQUIRE(raw < -50.0);
  CriticClip clip{Eigen::VectorXd::Constant(1, -50.0), ClipGradient::hard};
  CHECK(critic_forward(p, b.obs, b.action, b.goal, clip)(0) == -50.0);
}

TEST_CASE("critic gradient on a single sample") {
  Rng rng(12);
  const MrnParams p = MrnParams::create(small_shape(), 12);
  const auto r = finite_diff_check(p, random_batch(1, rng));
  CHECK_FALSE(r.skipped);
  CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("wider critic gradient") {
  Rng rng(13);
  MrnShape shape;
  shape.encoder_hidden = {64, 64};
  shape.head_hidden = {64};
  const MrnParams p = MrnParams::create(shape, 13);
  CHECK(p.parameter_count() > 10000);
  const auto r = finite_diff_check(p, random_batch(2, rng));
  CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("critic action gradient") {
  Rng rng(14);
  const MrnParams p = MrnParams::create(small_shape(), 14);
  const CriticBatch b = random_batch(3, rng);
  Matrix action = b.action;
  const Matrix analytic = critic_action_gradient(p, b.obs, action, b.goal);
  auto loss = [&] { return critic_forward(p, b.obs, action, b.goal).sum(); };
  const auto r = finite_diff_check(loss, {&action}, {&analytic});
  CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("duplicated batch leaves loss and gradient unchanged") {
  Rng rng(15);
  const MrnParams p = MrnParams::create(small_shape(), 15);
  const CriticBatch b = random_batch(5, rng);
  CriticBatch d;
  d.obs.resize(10, 2);
  d.action.resize(10, 2);
  d.goal.resize(10, 2);
  d.target.resize(10);
  d.obs << b.obs, b.obs;
  d.action << b.action, b.action;
  d.goal << b.goal, b.goal;
  d.target << b.target, b.target;
  const auto g1 = critic_grad(p, b), g2 = critic_grad(p, d);
  CHECK(g1.loss == doctest::Approx(g2.loss).epsilon(1e-12));
  const auto a1 = g1.grad.arrays(), a2 = g2.grad.arrays();
  for (std::size_t i = 0; i < a1.size(); ++i) CHECK((*a1[i] - *a2[i]).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(critic_grad(p, CriticBatch{}), std::invalid_argument);
}

TEST_CASE("actor output stays inside the bound") {
  ActorShape s;
  s.hidden = {32};
  s.action_bound = 0.2;
  ActorParams a = ActorParams::create(s, 6);
  a.net.layers.back().weight *= 1000.0;
  Rng rng(6);
  const Matrix out = actor_forward(a, random_matrix(200, 2, rng), random_matrix(200, 2, rng));
  CHECK(out.cwiseAbs().maxCoeff() <= 0.2);
}

TEST_CASE("checkpoints round trip") {
  const MrnParams p = MrnParams::create(small_shape(), 21);
  std::stringstream io;
  write_params(io, p);
  const MrnParams back = read_mrn_params(io);
  CHECK(back.shape == p.shape);
  CHECK(back.seed == p.seed);
  const auto a = p.arrays(), b = back.arrays();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == *b[i]);

  ActorShape s;
  s.hidden = {8, 8};
  const ActorParams actor = ActorParams::create(s, 3);
  std::stringstream io2;
  write_params(io2, actor);
  const ActorParams actor_back = read_actor_params(io2);
  CHECK(actor_back.shape == actor.shape);
  CHECK(*actor_back.arrays()[0] == *actor.arrays()[0]);

  std::istringstream wrong("gcrl-params 1 actor\n");
  CHECK_THROWS_AS(read_mrn_params(wrong), ParseError);
}

TEST_CASE("seeded construction") {
  const MrnParams a = MrnParams::create(small_shape(), 5), b = MrnParams::create(small_shape(), 5),
                  c = MrnParams::create(small_shape(), 6);
  CHECK(*a.arrays()[0] == *b.arrays()[0]);
  CHECK_FALSE(*a.arrays()[0] == *c.arrays()[0]);
  CHECK(a.parameter_count() == 1536);
}
