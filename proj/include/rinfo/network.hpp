#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rinfo/rng.hpp"

namespace rinfo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Bit = std::uint8_t;

/// Learnable state and fixed rates of a stochastic binary recurrent network.
///
/// w_recurrent(i, j) is the weight from neuron j to neuron i. Neurons are
/// 0-based here; in covariance statistics the input takes index 0 and neuron
/// i takes index i + 1.
struct NetworkParams {
  Matrix w_recurrent;
  Vector w_input;
  Vector bias;
  double p_max = 0.8;
  Vector p_bar;
  double p0_bar = 0.5;
  double epsilon = 0.01;
  /// Threshold dynamics x_i(t+1) = [U_i(t) > 0] with no sampling noise.
  /// Used for hand-built oracle networks only.
  bool deterministic = false;

  int n_neurons() const noexcept { return static_cast<int>(w_input.size()); }

  /// Throws ConfigError on shape mismatch, non-finite entries or rates out of range.
  void validate() const;

  bool operator==(const NetworkParams&) const = default;
};

struct NetworkState {
  std::vector<Bit> x;
  std::int64_t t = 0;

  static NetworkState zeros(int n_neurons) {
    return NetworkState{std::vector<Bit>(static_cast<std::size_t>(n_neurons), 0), 0};
  }
  bool operator==(const NetworkState&) const = default;
};

/// Time-indexed binary activity. Row k holds u(t) and x(t) for t = t_start + k,
/// where x(t) is the state on which the input u(t) acts.
struct StateTrace {
  std::vector<Bit> inputs;
  std::vector<Bit> states;  // row-major, length() x n_neurons
  int n_neurons = 0;
  std::int64_t t_start = 0;

  std::size_t length() const noexcept { return inputs.size(); }
  std::span<const Bit> row(std::size_t k) const {
    return {states.data() + k * static_cast<std::size_t>(n_neurons),
            static_cast<std::size_t>(n_neurons)};
  }
  /// Rows [begin, end) of the state matrix as doubles.
  Matrix state_block(std::size_t begin, std::size_t end) const;

  bool operator==(const StateTrace&) const = default;
};

/// Supplies u(t): i.i.d. Bernoulli draws from a private stream, or a replay
/// of a recorded sequence.
class InputSource {
 public:
  static InputSource bernoulli(double p_one, std::uint64_t seed);
  static InputSource replay(std::vector<Bit> bits);

  Bit next();
  bool exhausted() const noexcept;

 private:
  InputSource() = default;
  double p_one_ = 0.5;
  Rng rng_{0};
  std::optional<std::vector<Bit>> replay_;
  std::size_t cursor_ = 0;
};

/// Weights i.i.d. Gaussian(0, sigma2), zero bias, default constants.
NetworkParams init_network(int n_neurons, double sigma2, std::uint64_t seed);

/// U_i(t) = sum_j W_ij (x_j - p_bar_j) + W_i^in (u - p0_bar) - h_i.
Vector membrane_potential(const NetworkParams& params, std::span<const Bit> x, Bit u);

/// p_max / (1 + exp(-U)) elementwise.
Vector firing_probability(const NetworkParams& params, const Vector& potential);

/// Synchronous update: every x_i(t+1) is drawn from the potentials of the old state.
NetworkState step(const NetworkParams& params, const NetworkState& state, Bit u, Rng& rng);

/// h_i <- h_i + epsilon (x_i(t+1) - p_bar_i).
void update_bias(NetworkParams& params, const NetworkState& new_state);

struct PhaseOptions {
  bool adapt_bias = true;
  /// When false the returned trace is empty; the state still advances.
  bool record = true;
};

struct PhaseResult {
  StateTrace trace;
  NetworkParams params;
  NetworkState state;
};

/// Runs n_steps of step (+ update_bias when enabled) from `state`.
PhaseResult run_phase(NetworkParams params, NetworkState state, std::int64_t n_steps,
                      InputSource& input, Rng& rng, PhaseOptions options = {});

}  // namespace rinfo
