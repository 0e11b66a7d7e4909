#include "rinfo/benchmarks.hpp"

#include <algorithm>
#include <cmath>

#include "rinfo/error.hpp"
#include "rinfo/rng.hpp"

namespace rinfo {

namespace {

constexpr double kVarianceFloor = 1e-12;
// Relative pivot size below which a state direction counts as collinear.
constexpr double kRankThreshold = 1e-10;

Eigen::CompleteOrthogonalDecomposition<Matrix> factorize(const Matrix& centered) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(centered.rows(), centered.cols());
  cod.setThreshold(kRankThreshold);
  cod.compute(centered);
  return cod;
}

struct PhaseScores {
  std::vector<double> train;
  std::vector<double> test;
  std::vector<bool> degenerate;
};

bool constant(const Eigen::Ref<const Vector>& v) {
  return v.size() == 0 || (v.array() == v[0]).all();
}

double r2(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& y) {
  return determination_coefficient(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())),
                                   std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

// One factorization of the learning-phase state matrix shared by every
// readout trained on the same run.
class ReadoutBank {
 public:
  explicit ReadoutBank(const BenchmarkRun& run)
      : x_learn_(run.trace.state_block(run.learn_begin(), run.test_begin())),
        x_test_(run.trace.state_block(run.test_begin(), run.test_end())),
        x_mean_(x_learn_.colwise().mean()),
        cod_(factorize(x_learn_.rowwise() - x_mean_)) {}

  // Trains one readout per target column and scores it on both phases.
  PhaseScores score(const Matrix& y_learn, const Matrix& y_test) const {
    const Eigen::RowVectorXd y_mean = y_learn.colwise().mean();
    const Matrix w = cod_.solve(y_learn.rowwise() - y_mean);
    const Eigen::RowVectorXd offset = y_mean - x_mean_ * w;
    const Matrix z_learn = (x_learn_ * w).rowwise() + offset;
    const Matrix z_test = (x_test_ * w).rowwise() + offset;

    const auto m = y_learn.cols();
    PhaseScores s;
    s.train.resize(static_cast<std::size_t>(m));
    s.test.resize(static_cast<std::size_t>(m));
    s.degenerate.resize(static_cast<std::size_t>(m));
    for (Eigen::Index c = 0; c < m; ++c) {
      const auto k = static_cast<std::size_t>(c);
      if (constant(y_learn.col(c)) || constant(y_test.col(c))) {
        s.train[k] = s.test[k] = 0.0;
        s.degenerate[k] = true;
        continue;
      }
      s.train[k] = r2(z_learn.col(c), y_learn.col(c));
      s.test[k] = r2(z_test.col(c), y_test.col(c));
      s.degenerate[k] = false;
    }
    return s;
  }

 private:
  Matrix x_learn_;
  Matrix x_test_;
  Eigen::RowVectorXd x_mean_;
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod_;
};

void check_run(const BenchmarkRun& run, int tau_max, int arity) {
  if (tau_max < 1) throw ConfigError("tau_max must be >= 1");
  if (static_cast<std::int64_t>(tau_max + arity - 1) > run.phases.washout)
    throw ConfigError("washout too short for the requested delays");
  if (run.trace.length() < run.test_end()) throw ConfigError("benchmark trace shorter than its phases");
}

// Column tau - 1 holds f_tau over rows [begin, end).
Matrix target_matrix(std::span<const Bit> inputs, const BooleanRule& rule, int tau_max,
                     std::size_t begin, std::size_t end) {
  Matrix y(static_cast<Eigen::Index>(end - begin), tau_max);
  for (int tau = 1; tau <= tau_max; ++tau) {
    const auto t = rule_target(rule, inputs, tau, begin, end);
    for (std::size_t r = 0; r < t.size(); ++r)
      y(static_cast<Eigen::Index>(r), tau - 1) = static_cast<double>(t[r]);
  }
  return y;
}

}  // namespace

double ReadoutModel::predict(std::span<const Bit> x) const {
  double z = offset;
  for (std::size_t j = 0; j < x.size(); ++j) z += weights[static_cast<Eigen::Index>(j)] * x[j];
  return z;
}

void BenchmarkPhases::validate() const {
  if (washout < 0 || learning < 2 || testing < 2)
    throw ConfigError("benchmark phases need washout >= 0 and learning, testing >= 2");
}

ReadoutModel train_readout(const Matrix& states, const Vector& target) {
  if (states.rows() != target.size()) throw ConfigError("states and target lengths differ");
  if (states.rows() < 1) throw ConfigError("readout needs at least one sample");
  if (!target.allFinite()) throw ConfigError("readout target must be finite");
  const Eigen::RowVectorXd x_mean = states.colwise().mean();
  const double y_mean = target.mean();
  const Matrix xc = states.rowwise() - x_mean;
  const Vector yc = target.array() - y_mean;
  ReadoutModel m;
  m.weights = factorize(xc).solve(yc);
  m.offset = y_mean - x_mean.dot(m.weights);
  return m;
}

double determination_coefficient(std::span<const double> z, std::span<const double> y) {
  if (z.size() != y.size()) throw ConfigError("determination coefficient needs equal lengths");
  if (z.size() < 2) throw ConfigError("determination coefficient needs at least 2 samples");
  const double n = static_cast<double>(z.size());
  double mz = 0.0, my = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    mz += z[k];
    my += y[k];
  }
  mz /= n;
  my /= n;
  double szz = 0.0, syy = 0.0, szy = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double a = z[k] - mz, b = y[k] - my;
    szz += a * a;
    syy += b * b;
    szy += a * b;
  }
  szz /= n;
  syy /= n;
  szy /= n;
  if (szz < kVarianceFloor || syy < kVarianceFloor) return 0.0;
  return std::clamp(szy * szy / (szz * syy), 0.0, 1.0);
}

BenchmarkRun simulate_benchmark(const NetworkParams& params, const BenchmarkPhases& phases,
                                std::uint64_t seed) {
  phases.validate();
  params.validate();
  Rng rng(derive_seed(seed, {}, "neurons"));
  InputSource input = InputSource::bernoulli(params.p0_bar, derive_seed(seed, {}, "input"));
  NetworkState state = NetworkState::zeros(params.n_neurons());

  BenchmarkRun run;
  run.phases = phases;
  NetworkParams p = params;
  if (phases.washout > 0) {
    auto washed = run_phase(std::move(p), std::move(state), phases.washout, input, rng,
                            {.adapt_bias = true, .record = true});
    run.trace = std::move(washed.trace);
    p = std::move(washed.params);
    state = std::move(washed.state);
  } else {
    run.trace.n_neurons = params.n_neurons();
  }
  auto scored = run_phase(std::move(p), std::move(state), phases.learning + phases.testing, input,
                          rng, {.adapt_bias = false, .record = true});
  run.trace.inputs.insert(run.trace.inputs.end(), scored.trace.inputs.begin(),
                          scored.trace.inputs.end());
  run.trace.states.insert(run.trace.states.end(), scored.trace.states.begin(),
                          scored.trace.states.end());
  return run;
}

TaskScore memory_capacity(const BenchmarkRun& run, int tau_max) {
  const BooleanRule identity = BooleanRule::from_id(2, 0b1100);  // f = u(t - tau)
  auto r = boolean_capacity(run, std::span<const BooleanRule>(&identity, 1), tau_max);
  return r.score;
}

TaskScore memory_capacity(const NetworkParams& params, const BenchmarkPhases& phases, int tau_max,
                          std::uint64_t seed) {
  return memory_capacity(simulate_benchmark(params, phases, seed), tau_max);
}

BooleanCapacityResult boolean_capacity(const BenchmarkRun& run, std::span<const BooleanRule> rules,
                                       int tau_max) {
  if (rules.empty()) throw ConfigError("rule set must not be empty");
  int max_arity = 1;
  for (const auto& r : rules) max_arity = std::max(max_arity, r.arity);
  check_run(run, tau_max, max_arity);

  const ReadoutBank bank(run);
  const std::span<const Bit> inputs(run.trace.inputs);

  BooleanCapacityResult out;
  out.score.per_delay.assign(static_cast<std::size_t>(tau_max), 0.0);
  out.score.per_delay_train.assign(static_cast<std::size_t>(tau_max), 0.0);
  const double inv_rules = 1.0 / static_cast<double>(rules.size());
  for (const auto& rule : rules) {
    const PhaseScores s =
        bank.score(target_matrix(inputs, rule, tau_max, run.learn_begin(), run.test_begin()),
                   target_matrix(inputs, rule, tau_max, run.test_begin(), run.test_end()));
    RuleScore rs;
    rs.rule = rule;
    rs.per_delay.resize(static_cast<std::size_t>(tau_max));
    rs.per_delay_train.resize(static_cast<std::size_t>(tau_max));
    for (int tau = 0; tau < tau_max; ++tau) {
      const auto k = static_cast<std::size_t>(tau);
      const auto col = k;
      rs.per_delay[k] = s.test[col];
      rs.per_delay_train[k] = s.train[col];
      rs.total += s.test[col];
      out.score.per_delay[k] += inv_rules * s.test[col];
      out.score.per_delay_train[k] += inv_rules * s.train[col];
      if (s.degenerate[col]) ++out.score.degenerate_targets;
    }
    out.per_rule.push_back(std::move(rs));
  }
  for (double v : out.score.per_delay) out.score.total += v;
  return out;
}

BooleanCapacityResult boolean_capacity(const NetworkParams& params, const BenchmarkPhases& phases,
                                       std::span<const BooleanRule> rules, int tau_max,
                                       std::uint64_t seed) {
  return boolean_capacity(simulate_benchmark(params, phases, seed), rules, tau_max);
}

}  // namespace rinfo
