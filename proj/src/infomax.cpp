#include "rinfo/infomax.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rinfo/error.hpp"

namespace rinfo {

namespace {

constexpr std::size_t kChunkRows = 8192;

// Centered rows [begin, end) of (u, x) as an (end - begin) x (N + 1) matrix.
Matrix centered_rows(const StateTrace& trace, const Vector& rates, std::size_t begin,
                     std::size_t end) {
  const int m = trace.n_neurons + 1;
  Matrix z(static_cast<Eigen::Index>(end - begin), m);
  for (std::size_t k = begin; k < end; ++k) {
    const auto r = static_cast<Eigen::Index>(k - begin);
    z(r, 0) = static_cast<double>(trace.inputs[k]) - rates[0];
    const auto x = trace.row(k);
    for (int j = 0; j < trace.n_neurons; ++j) z(r, j + 1) = static_cast<double>(x[j]) - rates[j + 1];
  }
  return z;
}

void symmetrize_from_lower(Matrix& m) {
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose().triangularView<Eigen::StrictlyUpper>();
}

struct Factorized {
  Eigen::LLT<Matrix> c;
  Eigen::LLT<Matrix> d;
  double jitter = 0.0;
};

bool positive_definite(const Eigen::LLT<Matrix>& llt) {
  if (llt.info() != Eigen::Success) return false;
  const auto diag = llt.matrixLLT().diagonal();
  return (diag.array() > 0.0).all() && diag.allFinite();
}

Factorized factorize(const BlockStats& stats) {
  const Matrix c = stats.e_same;
  const Matrix d = assemble_joint(stats);
  Factorized f;
  double jitter = 0.0;
  for (std::size_t rung = 0;; ++rung) {
    f.c.compute(c + jitter * Matrix::Identity(c.rows(), c.cols()));
    f.d.compute(d + jitter * Matrix::Identity(d.rows(), d.cols()));
    const bool c_ok = positive_definite(f.c);
    const bool d_ok = positive_definite(f.d);
    if (c_ok && d_ok) {
      f.jitter = jitter;
      return f;
    }
    if (rung >= std::size(kJitterLadder)) {
      const std::string which = !c_ok ? "C" : "D";
      throw DegenerateStatsError(which, "covariance matrix " + which +
                                            " is not positive definite after jitter " +
                                            std::to_string(jitter));
    }
    jitter = kJitterLadder[rung];
  }
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

Vector centering_rates(const NetworkParams& params) {
  Vector r(params.n_neurons() + 1);
  r[0] = params.p0_bar;
  r.tail(params.n_neurons()) = params.p_bar;
  return r;
}

BlockStats accumulate_stats(const StateTrace& trace, const Vector& rates) {
  const std::size_t len = trace.length();
  if (len < 2) throw ConfigError("statistics need a trace of at least 2 steps");
  const int m = trace.n_neurons + 1;
  if (rates.size() != m) throw ConfigError("rates must have length N + 1");

  BlockStats s;
  s.e_same = Matrix::Zero(m, m);
  s.e_next_next = Matrix::Zero(m, m);
  s.e_next_same = Matrix::Zero(m, m);
  const std::size_t pairs = len - 1;
  for (std::size_t begin = 0; begin < pairs; begin += kChunkRows) {
    const std::size_t end = std::min(pairs, begin + kChunkRows);
    // Rows begin..end inclusive: `now` is rows [0, n), `next` rows [1, n + 1).
    const Matrix z = centered_rows(trace, rates, begin, end + 1);
    const auto n = static_cast<Eigen::Index>(end - begin);
    const auto now = z.topRows(n);
    const auto next = z.bottomRows(n);
    s.e_same.selfadjointView<Eigen::Lower>().rankUpdate(now.transpose());
    s.e_next_next.selfadjointView<Eigen::Lower>().rankUpdate(next.transpose());
    s.e_next_same.noalias() += next.transpose() * now;
  }
  const double inv = 1.0 / static_cast<double>(pairs);
  s.e_same *= inv;
  s.e_next_next *= inv;
  s.e_next_same *= inv;
  symmetrize_from_lower(s.e_same);
  symmetrize_from_lower(s.e_next_next);
  s.e_same_next = s.e_next_same.transpose();
  s.n_samples = static_cast<std::int64_t>(pairs);
  return s;
}

BlockStats merge_stats(const BlockStats& a, const BlockStats& b) {
  if (a.dim() != b.dim()) throw ConfigError("cannot merge statistics of different size");
  const double total = static_cast<double>(a.n_samples + b.n_samples);
  if (total <= 0.0) throw ConfigError("cannot merge empty statistics");
  const double wa = static_cast<double>(a.n_samples) / total;
  const double wb = static_cast<double>(b.n_samples) / total;
  BlockStats s;
  s.e_same = wa * a.e_same + wb * b.e_same;
  s.e_next_same = wa * a.e_next_same + wb * b.e_next_same;
  s.e_same_next = s.e_next_same.transpose();
  s.e_next_next = wa * a.e_next_next + wb * b.e_next_next;
  s.n_samples = a.n_samples + b.n_samples;
  return s;
}

Matrix assemble_joint(const BlockStats& stats) {
  const int m = stats.dim();
  Matrix d(2 * m, 2 * m);
  d.topLeftCorner(m, m) = stats.e_same;
  d.topRightCorner(m, m) = stats.e_same_next;
  d.bottomLeftCorner(m, m) = stats.e_next_same;
  d.bottomRightCorner(m, m) = stats.e_next_next;
  return d;
}

MiReport gaussian_mi(const BlockStats& stats) {
  const Factorized f = factorize(stats);
  MiReport r;
  r.log_det_c = log_det(f.c);
  r.log_det_d = log_det(f.d);
  r.mi = r.log_det_c - 0.5 * r.log_det_d;
  r.jitter_applied = f.jitter;
  return r;
}

// dI = sum_kl dE_kl (C^-1 - (P + R)/2)_lk - sum_kl dE_{^k l} (D^-1)_{l, k+M}
// with P, R the diagonal blocks of D^-1 and stationarity dE_{^k^l} = dE_kl.
// Sensitivities of the covariances to W_ij come from the pairwise (Gaussian)
// factorization of the fourth moments:
//   dE_kl/dW_ij     ~ E_{^i^k} E_{^l j} + E_{^i^l} E_{^k j}     (k != l; variances are
//                                                            pinned by homeostasis)
//   dE_{^k l}/dW_ij ~ [(1-2p_i)(1-2p_j) E_{^i j} + p_i p_j (1-p_i)(1-p_j)] at (k,l) = (i,j).
GradientMatrix mi_gradient(const BlockStats& stats, const Vector& rates) {
  const int m = stats.dim();
  if (rates.size() != m) throw ConfigError("rates must have length N + 1");
  const Factorized f = factorize(stats);
  const Matrix c_inv = f.c.solve(Matrix::Identity(m, m));
  const Matrix d_inv = f.d.solve(Matrix::Identity(2 * m, 2 * m));

  Matrix a = 2.0 * c_inv - d_inv.topLeftCorner(m, m) - d_inv.bottomRightCorner(m, m);
  a = 0.5 * (a + a.transpose()).eval();
  a.diagonal().setZero();

  const Matrix first = stats.e_next_next * a * stats.e_next_same;

  GradientMatrix grad;
  grad.g.resize(m - 1, m);
  for (int i = 1; i < m; ++i) {
    const double pi = rates[i];
    for (int j = 0; j < m; ++j) {
      const double pj = rates[j];
      const double lag_sens = (1.0 - 2.0 * pi) * (1.0 - 2.0 * pj) * stats.e_next_same(i, j) +
                              pi * pj * (1.0 - pi) * (1.0 - pj);
      const double second = -0.5 * lag_sens * (d_inv(j, i + m) + d_inv(i + m, j));
      grad.g(i - 1, j) = first(i, j) + second;
    }
  }
  if (!grad.g.allFinite()) throw DegenerateStatsError("D", "non-finite MI gradient");
  return grad;
}

void RIConfig::validate() const {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta must be finite and >= 0");
  if (input_multiplicity < 1) throw ConfigError("input multiplicity K must be >= 1");
  if (settle_steps < 0) throw ConfigError("settle_steps must be >= 0");
  if (block_steps - settle_steps < 2)
    throw ConfigError("block_steps must exceed settle_steps by at least 2");
  if (n_blocks < 0) throw ConfigError("n_blocks must be >= 0");
}

NetworkParams apply_ri_update(const NetworkParams& params, const GradientMatrix& grad,
                              const RIConfig& cfg) {
  const int n = params.n_neurons();
  if (grad.g.rows() != n || grad.g.cols() != n + 1)
    throw ConfigError("gradient shape must be N x (N + 1)");
  if (!grad.g.allFinite()) throw DegenerateStatsError("gradient", "non-finite gradient rejected");
  NetworkParams out = params;
  out.w_recurrent += cfg.eta * grad.g.rightCols(n);
  out.w_input += cfg.eta * static_cast<double>(cfg.input_multiplicity) * grad.g.col(0);
  return out;
}

BlockSimulation simulate_block(const NetworkParams& params, const NetworkState& state,
                               const RIConfig& cfg, InputSource& input, Rng& rng) {
  cfg.validate();
  NetworkParams p = params;
  NetworkState s = state;
  if (cfg.settle_steps > 0) {
    auto settled = run_phase(std::move(p), std::move(s), cfg.settle_steps, input, rng,
                             {.adapt_bias = true, .record = false});
    p = std::move(settled.params);
    s = std::move(settled.state);
  }
  auto measured = run_phase(std::move(p), std::move(s), cfg.block_steps - cfg.settle_steps, input,
                            rng, {.adapt_bias = true, .record = true});
  BlockSimulation out;
  out.stats = accumulate_stats(measured.trace, centering_rates(measured.params));
  out.params = std::move(measured.params);
  out.state = std::move(measured.state);
  return out;
}

RiBlockResult run_ri_block(const NetworkParams& params, const NetworkState& state,
                           const RIConfig& cfg, InputSource& input, Rng& rng) {
  BlockSimulation sim = simulate_block(params, state, cfg, input, rng);
  RiBlockResult r;
  r.mi = gaussian_mi(sim.stats);
  const GradientMatrix grad = mi_gradient(sim.stats, centering_rates(sim.params));
  r.params = apply_ri_update(sim.params, grad, cfg);
  r.state = std::move(sim.state);
  r.stats = std::move(sim.stats);
  return r;
}

}  // namespace rinfo
