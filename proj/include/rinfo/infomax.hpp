#pragma once

#include <cstdint>

#include "rinfo/network.hpp"

namespace rinfo {

/// Centered same-time and one-step-lagged covariances of (u, x_1..x_N).
///
/// Index 0 is the input, index i >= 1 is neuron i - 1 of NetworkParams.
/// Centering uses the fixed target rates, not empirical means.
struct BlockStats {
  Matrix e_same;       // E_ij      = <z_i(t)   z_j(t)>
  Matrix e_next_same;  // E_{^i j}  = <z_i(t+1) z_j(t)>
  Matrix e_same_next;  // E_{i ^j}  = <z_i(t)   z_j(t+1)>, transpose of e_next_same
  Matrix e_next_next;  // E_{^i ^j} = <z_i(t+1) z_j(t+1)>
  std::int64_t n_samples = 0;

  int dim() const noexcept { return static_cast<int>(e_same.rows()); }
};

/// Centering constants (p0_bar, p_bar_1..p_bar_N).
Vector centering_rates(const NetworkParams& params);

/// Sums T = length - 1 consecutive pairs of the trace.
BlockStats accumulate_stats(const StateTrace& trace, const Vector& rates);

/// Sample-weighted average of two accumulations (associative).
BlockStats merge_stats(const BlockStats& a, const BlockStats& b);

struct MiReport {
  double mi = 0.0;  // nats
  double log_det_c = 0.0;
  double log_det_d = 0.0;
  double jitter_applied = 0.0;
};

/// The 2(N+1) square joint covariance [[E, E_{i^j}], [E_{^ij}, E_{^i^j}]].
Matrix assemble_joint(const BlockStats& stats);

/// Diagonal jitters tried in order after the unjittered factorization fails.
inline constexpr double kJitterLadder[] = {1e-12, 1e-10, 1e-8};

/// I = log|C| - 1/2 log|D| via Cholesky log-determinants.
MiReport gaussian_mi(const BlockStats& stats);

/// Approximate dI/dW as an N x (N+1) matrix. Row i is neuron i, column 0 is
/// the input weight, column j >= 1 is the weight from neuron j - 1.
struct GradientMatrix {
  Matrix g;
};

GradientMatrix mi_gradient(const BlockStats& stats, const Vector& rates);

struct RIConfig {
  double eta = 0.2;
  int input_multiplicity = 1;
  std::int64_t block_steps = 100'000;
  std::int64_t settle_steps = 50'000;
  int n_blocks = 1500;

  void validate() const;
};

/// W_ij += eta g_ij and W_i^in += eta K g_i0. Biases are untouched.
NetworkParams apply_ri_update(const NetworkParams& params, const GradientMatrix& grad,
                              const RIConfig& cfg);

/// Network after the simulated part of a block, with its measured statistics.
struct BlockSimulation {
  NetworkParams params;
  NetworkState state;
  BlockStats stats;
};

/// settle_steps with bias adaptation, then block_steps - settle_steps measured steps.
BlockSimulation simulate_block(const NetworkParams& params, const NetworkState& state,
                               const RIConfig& cfg, InputSource& input, Rng& rng);

struct RiBlockResult {
  NetworkParams params;
  NetworkState state;
  MiReport mi;
  BlockStats stats;
};

/// One full RI block: simulate, measure MI, take one gradient step.
RiBlockResult run_ri_block(const NetworkParams& params, const NetworkState& state,
                           const RIConfig& cfg, InputSource& input, Rng& rng);

}  // namespace rinfo
