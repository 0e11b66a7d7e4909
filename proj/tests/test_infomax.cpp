#include <doctest.h>

#include <cmath>

#include "rinfo/error.hpp"
#include "rinfo/infomax.hpp"

using namespace rinfo;

namespace {

BlockStats single_variable(double v, double c) {
  BlockStats s;
  s.e_same = Matrix::Constant(1, 1, v);
  s.e_next_next = Matrix::Constant(1, 1, v);
  s.e_next_same = Matrix::Constant(1, 1, c);
  s.e_same_next = s.e_next_same;
  s.n_samples = 1000;
  return s;
}

StateTrace simulate(int n, double sigma2, std::int64_t steps, std::uint64_t seed) {
  const auto p = init_network(n, sigma2, seed);
  Rng rng(seed + 1);
  InputSource in = InputSource::bernoulli(0.5, seed + 2);
  auto warm = run_phase(p, NetworkState::zeros(n), 20'000, in, rng, {.adapt_bias = true, .record = false});
  return run_phase(warm.params, warm.state, steps, in, rng).trace;
}

Vector default_rates(int n) {
  Vector r = Vector::Constant(n + 1, 0.1);
  r[0] = 0.5;
  return r;
}

StateTrace slice(const StateTrace& t, std::size_t begin, std::size_t end) {
  StateTrace s;
  s.n_neurons = t.n_neurons;
  s.inputs.assign(t.inputs.begin() + begin, t.inputs.begin() + end);
  const auto n = static_cast<std::size_t>(t.n_neurons);
  s.states.assign(t.states.begin() + begin * n, t.states.begin() + end * n);
  return s;
}

}  // namespace

TEST_SUITE("infomax") {

TEST_CASE("constant trace gives closed-form second moments") {
  StateTrace t;
  t.n_neurons = 3;
  t.inputs.assign(100, 0);
  t.states.assign(300, 0);
  const BlockStats s = accumulate_stats(t, default_rates(3));
  CHECK(s.n_samples == 99);
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      CHECK(s.e_same(i, j) == doctest::Approx(0.01));
      CHECK(s.e_next_same(i, j) == doctest::Approx(0.01));
    }
  CHECK(s.e_same(0, 0) == doctest::Approx(0.25));
  CHECK(s.e_same(0, 2) == doctest::Approx(0.05));
}

TEST_CASE("short traces are rejected") {
  StateTrace t;
  t.n_neurons = 2;
  t.inputs = {1};
  t.states = {0, 1};
  CHECK_THROWS_AS(accumulate_stats(t, default_rates(2)), ConfigError);
  t.inputs = {1, 0};
  t.states = {0, 1, 1, 0};
  CHECK_THROWS_AS(accumulate_stats(t, default_rates(3)), ConfigError);
}

TEST_CASE("input variance tends to 1/4") {
  const StateTrace t = simulate(4, 0.01, 40'000, 3);
  const BlockStats s = accumulate_stats(t, default_rates(4));
  // (u - 1/2)^2 is exactly 1/4 for binary u, so only rounding remains.
  CHECK(std::abs(s.e_same(0, 0) - 0.25) < 1e-12);
  // The lag-1 input autocovariance of a fair coin vanishes within 3 s.e.
  CHECK(std::abs(s.e_next_same(0, 0)) < 3 * 0.25 / std::sqrt(40'000.0));
}

TEST_CASE("block invariants on simulated data") {
  const StateTrace t = simulate(10, 0.05, 30'000, 5);
  const BlockStats s = accumulate_stats(t, default_rates(10));
  const double scale = s.e_same.cwiseAbs().maxCoeff();
  CHECK((s.e_same - s.e_same.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  CHECK((s.e_next_next - s.e_next_next.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  CHECK(s.e_same_next == s.e_next_same.transpose());
  // Rates near their targets keep the centered variances under the binary bound.
  CHECK((s.e_same.diagonal().array() >= 0.0).all());
  CHECK((s.e_same.diagonal().array() <= 0.25).all());
}

TEST_CASE("merging halves equals one pass over the whole trace") {
  const StateTrace t = simulate(6, 0.05, 20'001, 8);
  const Vector r = default_rates(6);
  const BlockStats whole = accumulate_stats(t, r);
  // The halves share row 12000, so together they hold every pair once.
  const BlockStats merged =
      merge_stats(accumulate_stats(slice(t, 0, 12'001), r), accumulate_stats(slice(t, 12'000, t.length()), r));
  CHECK(merged.n_samples == whole.n_samples);
  CHECK((merged.e_same - whole.e_same).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((merged.e_next_same - whole.e_next_same).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((merged.e_next_next - whole.e_next_next).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("chunk boundaries do not change the accumulation") {
  // More than one 8192-row chunk, compared against a naive sum.
  const StateTrace t = simulate(3, 0.1, 20'000, 12);
  const Vector r = default_rates(3);
  const BlockStats s = accumulate_stats(t, r);
  Matrix naive = Matrix::Zero(4, 4);
  for (std::size_t k = 0; k + 1 < t.length(); ++k) {
    Vector now(4), next(4);
    now[0] = t.inputs[k] - r[0];
    next[0] = t.inputs[k + 1] - r[0];
    for (int j = 0; j < 3; ++j) {
      now[j + 1] = t.row(k)[j] - r[j + 1];
      next[j + 1] = t.row(k + 1)[j] - r[j + 1];
    }
    naive += next * now.transpose();
  }
  naive /= static_cast<double>(t.length() - 1);
  CHECK((naive - s.e_next_same).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("independent successive states carry no information") {
  BlockStats s;
  Matrix a = Matrix::Random(5, 5);
  s.e_same = a * a.transpose() + 0.5 * Matrix::Identity(5, 5);
  s.e_next_next = s.e_same;
  s.e_next_same = Matrix::Zero(5, 5);
  s.e_same_next = s.e_next_same;
  s.n_samples = 100;
  const MiReport r = gaussian_mi(s);
  CHECK(std::abs(r.mi) < 1e-9);
  CHECK(r.log_det_d == doctest::Approx(2 * r.log_det_c));
  const GradientMatrix g = mi_gradient(s, Vector::Constant(5, 0.1));
  CHECK(g.g.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("single variable lag-1 closed form") {
  for (double rho : {0.0, 0.5, 0.9}) {
    const double v = 0.09;
    const MiReport r = gaussian_mi(single_variable(v, rho * v));
    CHECK(std::abs(r.mi - (-0.5 * std::log(1.0 - rho * rho))) < 1e-9);
  }
  CHECK(gaussian_mi(single_variable(1.0, 0.9)).mi == doctest::Approx(0.830).epsilon(1e-3));
}

TEST_CASE("report fields satisfy the MI identity") {
  const BlockStats s = accumulate_stats(simulate(8, 0.1, 10'000, 2), default_rates(8));
  const MiReport r = gaussian_mi(s);
  CHECK(r.mi == r.log_det_c - 0.5 * r.log_det_d);
  CHECK(r.mi >= -1e-9);
  CHECK(r.jitter_applied == 0.0);
}

TEST_CASE("joint matrix has C as its top-left block") {
  const BlockStats s = accumulate_stats(simulate(5, 0.1, 5'000, 4), default_rates(5));
  const Matrix d = assemble_joint(s);
  CHECK(d.rows() == 12);
  CHECK(d.topLeftCorner(6, 6) == s.e_same);
  CHECK(d.bottomRightCorner(6, 6) == s.e_next_next);
  CHECK(d.bottomLeftCorner(6, 6) == s.e_next_same);
}

TEST_CASE("MI is invariant under neuron relabeling and overall scale") {
  const BlockStats s = accumulate_stats(simulate(6, 0.2, 10'000, 6), default_rates(6));
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(7);
  perm.indices() << 0, 4, 6, 1, 3, 2, 5;  // the input stays at index 0
  BlockStats p;
  p.e_same = perm * s.e_same * perm.transpose();
  p.e_next_same = perm * s.e_next_same * perm.transpose();
  p.e_same_next = p.e_next_same.transpose();
  p.e_next_next = perm * s.e_next_next * perm.transpose();
  p.n_samples = s.n_samples;
  CHECK(gaussian_mi(p).mi == doctest::Approx(gaussian_mi(s).mi).epsilon(1e-10));

  BlockStats g = s;
  for (Matrix* m : {&g.e_same, &g.e_next_same, &g.e_same_next, &g.e_next_next}) *m *= 3.7;
  CHECK(gaussian_mi(g).mi == doctest::Approx(gaussian_mi(s).mi).epsilon(1e-10));
}

TEST_CASE("gradient relabels with the neurons") {
  const BlockStats s = accumulate_stats(simulate(5, 0.2, 10'000, 16), default_rates(5));
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
  perm.indices() << 0, 3, 1, 5, 2, 4;
  BlockStats p;
  p.e_same = perm * s.e_same * perm.transpose();
  p.e_next_same = perm * s.e_next_same * perm.transpose();
  p.e_same_next = p.e_next_same.transpose();
  p.e_next_next = perm * s.e_next_next * perm.transpose();
  p.n_samples = s.n_samples;
  const Matrix g = mi_gradient(s, default_rates(5)).g;
  const Matrix gp = mi_gradient(p, default_rates(5)).g;
  for (int i = 1; i <= 5; ++i)
    for (int j = 0; j <= 5; ++j)
      CHECK(gp(perm.indices()[i] - 1, perm.indices()[j]) == doctest::Approx(g(i - 1, j)).epsilon(1e-9));
}

TEST_CASE("gradient shape and finiteness") {
  const BlockStats s = accumulate_stats(simulate(7, 0.05, 10'000, 9), default_rates(7));
  const GradientMatrix g = mi_gradient(s, default_rates(7));
  CHECK(g.g.rows() == 7);
  CHECK(g.g.cols() == 8);
  CHECK(g.g.allFinite());
  CHECK_THROWS_AS(mi_gradient(s, default_rates(6)), ConfigError);
}

TEST_CASE("near-singular C is jittered and logged") {
  BlockStats s = single_variable(1.0, 0.1);
  s.e_same = Matrix::Ones(2, 2);  // rank one
  s.e_next_next = s.e_same;
  s.e_next_same = Matrix::Zero(2, 2);
  s.e_same_next = s.e_next_same;
  const MiReport r = gaussian_mi(s);
  CHECK(r.jitter_applied > 0.0);
  CHECK(r.jitter_applied <= 1e-8);
  CHECK(r.mi == r.log_det_c - 0.5 * r.log_det_d);
}

TEST_CASE("indefinite statistics raise a degenerate error naming the matrix") {
  BlockStats s = single_variable(1.0, 0.0);
  s.e_same.resize(2, 2);
  s.e_same << 1.0, 2.0, 2.0, 1.0;
  s.e_next_next = Matrix::Identity(2, 2);
  s.e_next_same = Matrix::Zero(2, 2);
  s.e_same_next = s.e_next_same;
  try {
    gaussian_mi(s);
    FAIL("expected DegenerateStatsError");
  } catch (const DegenerateStatsError& e) {
    CHECK(e.matrix() == "C");
  }
  CHECK_THROWS_AS(mi_gradient(s, Vector::Constant(2, 0.1)), DegenerateStatsError);
}

TEST_CASE("log-determinants do not overflow at N = 512") {
  BlockStats s;
  s.e_same = 0.01 * Matrix::Identity(513, 513);
  s.e_next_next = s.e_same;
  s.e_next_same = 0.005 * Matrix::Identity(513, 513);
  s.e_same_next = s.e_next_same;
  s.n_samples = 1;
  const MiReport r = gaussian_mi(s);
  CHECK(std::isfinite(r.log_det_d));
  CHECK(r.mi == doctest::Approx(-0.5 * 513 * std::log(0.75)).epsilon(1e-9));
}

TEST_CASE("apply_ri_update scales the input column by K") {
  const auto p = init_network(3, 0.01, 1);
  GradientMatrix g{Matrix::Zero(3, 4)};
  g.g(1, 0) = 0.01;
  g.g(2, 3) = 0.5;
  RIConfig cfg;
  cfg.input_multiplicity = 7;
  const auto q = apply_ri_update(p, g, cfg);
  CHECK(q.w_input[1] - p.w_input[1] == doctest::Approx(0.014));
  CHECK(q.w_recurrent(2, 2) - p.w_recurrent(2, 2) == doctest::Approx(0.1));
  CHECK(q.bias == p.bias);

  cfg.input_multiplicity = 1;
  const auto k1 = apply_ri_update(p, g, cfg);
  CHECK(k1.w_input[1] - p.w_input[1] == doctest::Approx(0.002));
}

TEST_CASE("zero gradient leaves params unchanged") {
  const auto p = init_network(4, 0.01, 1);
  CHECK(apply_ri_update(p, GradientMatrix{Matrix::Zero(4, 5)}, RIConfig{}) == p);
}

TEST_CASE("non-finite or misshapen gradients are rejected") {
  const auto p = init_network(2, 0.01, 1);
  GradientMatrix g{Matrix::Zero(2, 3)};
  g.g(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(apply_ri_update(p, g, RIConfig{}), DegenerateStatsError);
  CHECK_THROWS_AS(apply_ri_update(p, GradientMatrix{Matrix::Zero(2, 2)}, RIConfig{}), ConfigError);
}

TEST_CASE("RIConfig validation") {
  RIConfig c;
  CHECK_NOTHROW(c.validate());
  c.settle_steps = c.block_steps;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RIConfig{};
  c.input_multiplicity = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = RIConfig{};
  c.eta = -0.1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("zero learning rate keeps weights across blocks") {
  const auto p = init_network(6, 0.01, 3);
  RIConfig cfg;
  cfg.eta = 0.0;
  cfg.block_steps = 2000;
  cfg.settle_steps = 1000;
  Rng rng(1);
  InputSource in = InputSource::bernoulli(0.5, 2);
  auto r = run_ri_block(p, NetworkState::zeros(6), cfg, in, rng);
  r = run_ri_block(r.params, r.state, cfg, in, rng);
  CHECK(r.params.w_recurrent == p.w_recurrent);
  CHECK(r.params.w_input == p.w_input);
}

TEST_CASE("block-0 MI of a random network is small and positive") {
  const auto p = init_network(100, 0.01, 4);
  RIConfig cfg;
  cfg.block_steps = 40'000;
  cfg.settle_steps = 20'000;
  Rng rng(5);
  InputSource in = InputSource::bernoulli(0.5, 6);
  const auto r = run_ri_block(p, NetworkState::zeros(100), cfg, in, rng);
  CHECK(r.mi.mi > 0.0);
  CHECK(r.mi.mi < 1.0);
  CHECK(r.stats.n_samples == 19'999);
}

TEST_CASE("run_ri_block is deterministic") {
  const auto p = init_network(8, 0.01, 4);
  RIConfig cfg;
  cfg.block_steps = 3000;
  cfg.settle_steps = 1000;
  Rng r1(5), r2(5);
  InputSource i1 = InputSource::bernoulli(0.5, 6), i2 = InputSource::bernoulli(0.5, 6);
  const auto a = run_ri_block(p, NetworkState::zeros(8), cfg, i1, r1);
  const auto b = run_ri_block(p, NetworkState::zeros(8), cfg, i2, r2);
  CHECK(a.params == b.params);
  CHECK(a.mi.mi == b.mi.mi);
}

}  // TEST_SUITE
