#include "rinfo/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "rinfo/error.hpp"

namespace rinfo {

std::vector<ConnectionRecord> top_connections(const NetworkParams& params, int k) {
  const int n = params.n_neurons();
  const int total = n * (n + 1);
  if (k < 1 || k > total) throw ConfigError("k must lie in [1, N(N+1)]");
  std::vector<ConnectionRecord> all;
  all.reserve(static_cast<std::size_t>(total));
  for (int i = 0; i < n; ++i) {
    all.push_back({0, i + 1, params.w_input[i], 0});
    for (int j = 0; j < n; ++j) all.push_back({j + 1, i + 1, params.w_recurrent(i, j), 0});
  }
  auto order = [](const ConnectionRecord& a, const ConnectionRecord& b) {
    const double fa = std::abs(a.weight), fb = std::abs(b.weight);
    if (fa != fb) return fa > fb;
    if (a.src != b.src) return a.src < b.src;
    return a.dst < b.dst;
  };
  std::partial_sort(all.begin(), all.begin() + k, all.end(), order);
  all.resize(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) all[static_cast<std::size_t>(r)].abs_rank = r + 1;
  return all;
}

WeightSummary weight_summary(const NetworkParams& params, int block) {
  WeightSummary s;
  s.block = block;
  std::vector<double> mags(params.w_recurrent.data(),
                           params.w_recurrent.data() + params.w_recurrent.size());
  for (auto& m : mags) m = std::abs(m);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  const std::size_t top = std::min<std::size_t>(50, mags.size());
  s.top50_truncated = mags.size() < 50;
  double acc = 0.0;
  for (std::size_t k = 0; k < top; ++k) acc += mags[k];
  s.mean_abs_internal_top50 = top ? acc / static_cast<double>(top) : 0.0;
  s.mean_abs_internal_all = params.w_recurrent.cwiseAbs().mean();
  s.mean_abs_input = params.w_input.cwiseAbs().mean();
  return s;
}

double binary_mutual_information(std::span<const Bit> a, std::span<const Bit> b) {
  if (a.size() != b.size()) throw ConfigError("mutual information needs equal lengths");
  if (a.empty()) throw ConfigError("mutual information needs samples");
  double count[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t t = 0; t < a.size(); ++t) count[a[t] & 1][b[t] & 1] += 1.0;
  const double n = static_cast<double>(a.size());
  const double pa[2] = {(count[0][0] + count[0][1]) / n, (count[1][0] + count[1][1]) / n};
  const double pb[2] = {(count[0][0] + count[1][0]) / n, (count[0][1] + count[1][1]) / n};
  double mi = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double pxy = count[x][y] / n;
      if (pxy > 0.0 && pa[x] > 0.0 && pb[y] > 0.0) mi += pxy * std::log(pxy / (pa[x] * pb[y]));
    }
  }
  return std::max(0.0, mi);
}

std::vector<double> neuron_input_mi(const StateTrace& trace) {
  const std::size_t len = trace.length();
  if (len < 2) throw ConfigError("neuron-input MI needs a trace of at least 2 steps");
  const std::span<const Bit> lagged_input(trace.inputs.data(), len - 1);
  std::vector<Bit> column(len - 1);
  std::vector<double> out(static_cast<std::size_t>(trace.n_neurons));
  for (int i = 0; i < trace.n_neurons; ++i) {
    for (std::size_t t = 1; t < len; ++t) column[t - 1] = trace.row(t)[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = binary_mutual_information(column, lagged_input);
  }
  return out;
}

}  // namespace rinfo
