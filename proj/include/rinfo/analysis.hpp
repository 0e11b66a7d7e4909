#pragma once

#include <vector>

#include "rinfo/network.hpp"

namespace rinfo {

/// One connection. src 0 is the input, src/dst i >= 1 is neuron i - 1.
struct ConnectionRecord {
  int src = 0;
  int dst = 1;
  double weight = 0.0;
  int abs_rank = 1;

  bool operator==(const ConnectionRecord&) const = default;
};

/// k largest |w| over recurrent and input weights, ties by (src, dst).
std::vector<ConnectionRecord> top_connections(const NetworkParams& params, int k = 50);

struct WeightSummary {
  double mean_abs_internal_top50 = 0.0;
  double mean_abs_input = 0.0;
  double mean_abs_internal_all = 0.0;
  /// Set when N^2 < 50 and every recurrent weight entered the top-50 mean.
  bool top50_truncated = false;
  int block = 0;
};

WeightSummary weight_summary(const NetworkParams& params, int block = 0);

/// Plug-in I(x_i(t); u(t-1)) in nats for every neuron.
std::vector<double> neuron_input_mi(const StateTrace& trace);

/// Plug-in mutual information of two binary sequences, in nats.
double binary_mutual_information(std::span<const Bit> a, std::span<const Bit> b);

}  // namespace rinfo
