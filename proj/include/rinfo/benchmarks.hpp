#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rinfo/network.hpp"

namespace rinfo {

/// Linear readout z(t) = weights . x(t) + offset.
struct ReadoutModel {
  Vector weights;
  double offset = 0.0;

  double predict(std::span<const Bit> x) const;
};

/// Boolean function of n lagged inputs. truth_table[v] is the output for the
/// input pattern v = (u(t-tau), ..., u(t-tau-n+1)) read as an n-bit number
/// with the most recent bit most significant. rule_id packs the table with
/// bit v = truth_table[v].
struct BooleanRule {
  int arity = 2;
  std::vector<Bit> truth_table;
  std::uint32_t rule_id = 0;
  bool separable = false;

  static BooleanRule from_id(int arity, std::uint32_t rule_id);
  Bit evaluate(std::uint32_t pattern) const { return truth_table[pattern]; }
};

struct BenchmarkPhases {
  std::int64_t washout = 50'000;
  std::int64_t learning = 1500;
  std::int64_t testing = 1500;

  void validate() const;
};

/// Per-delay determination coefficients for tau = 1..tau_max (index tau - 1).
struct TaskScore {
  std::vector<double> per_delay;
  std::vector<double> per_delay_train;
  double total = 0.0;
  /// Delays whose target was constant within a phase and were scored 0.
  int degenerate_targets = 0;
};

struct RuleScore {
  BooleanRule rule;
  std::vector<double> per_delay;
  std::vector<double> per_delay_train;
  double total = 0.0;
};

struct BooleanCapacityResult {
  TaskScore score;  // per_delay averaged over rules, total = BC
  std::vector<RuleScore> per_rule;
};

/// Least squares with an intercept; the minimum-norm solution when the
/// centered state matrix is rank deficient.
ReadoutModel train_readout(const Matrix& states, const Vector& target);

/// cov^2(z, y) / (var z var y); 0 when either variance is below 1e-12.
double determination_coefficient(std::span<const double> z, std::span<const double> y);

/// Non-constant rules of the given arity (2 or 3), tagged with separability.
std::vector<BooleanRule> enumerate_rules(int arity);

/// Exact threshold-function test by Fourier-Motzkin elimination over integers.
bool is_linearly_separable(const BooleanRule& rule);

/// f_tau(t) for every row t in [begin, end) of an input sequence.
std::vector<Bit> rule_target(const BooleanRule& rule, std::span<const Bit> inputs, int tau,
                             std::size_t begin, std::size_t end);

/// One shared simulation covering washout, learning and testing. Bias adapts
/// during washout and is frozen afterwards; weights never change.
struct BenchmarkRun {
  StateTrace trace;  // every row including washout
  BenchmarkPhases phases;

  std::size_t learn_begin() const { return static_cast<std::size_t>(phases.washout); }
  std::size_t test_begin() const {
    return static_cast<std::size_t>(phases.washout + phases.learning);
  }
  std::size_t test_end() const {
    return static_cast<std::size_t>(phases.washout + phases.learning + phases.testing);
  }
};

BenchmarkRun simulate_benchmark(const NetworkParams& params, const BenchmarkPhases& phases,
                                std::uint64_t seed);

TaskScore memory_capacity(const BenchmarkRun& run, int tau_max);
TaskScore memory_capacity(const NetworkParams& params, const BenchmarkPhases& phases, int tau_max,
                          std::uint64_t seed);

BooleanCapacityResult boolean_capacity(const BenchmarkRun& run, std::span<const BooleanRule> rules,
                                       int tau_max);
BooleanCapacityResult boolean_capacity(const NetworkParams& params, const BenchmarkPhases& phases,
                                       std::span<const BooleanRule> rules, int tau_max,
                                       std::uint64_t seed);

}  // namespace rinfo
