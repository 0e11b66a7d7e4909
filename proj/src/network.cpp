#include "rinfo/network.hpp"

#include <cmath>
#include <string>

#include "rinfo/error.hpp"

namespace rinfo {

namespace {

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

// Potentials written into `out`; `centered` is scratch of length N.
void potentials_into(const NetworkParams& params, std::span<const Bit> x, Bit u, Vector& centered,
                     Vector& out) {
  const int n = params.n_neurons();
  for (int j = 0; j < n; ++j) centered[j] = static_cast<double>(x[j]) - params.p_bar[j];
  out.noalias() = params.w_recurrent * centered;
  out += params.w_input * (static_cast<double>(u) - params.p0_bar);
  out -= params.bias;
}

void sample_into(const NetworkParams& params, const Vector& potential, Rng& rng,
                 std::vector<Bit>& x) {
  const int n = params.n_neurons();
  if (params.deterministic) {
    for (int i = 0; i < n; ++i) x[i] = potential[i] > 0.0 ? 1 : 0;
    return;
  }
  for (int i = 0; i < n; ++i) {
    const double p = params.p_max / (1.0 + std::exp(-potential[i]));
    x[i] = uniform01(rng) < p ? 1 : 0;
  }
}

}  // namespace

void NetworkParams::validate() const {
  const auto n = w_input.size();
  if (n < 1) throw ConfigError("network must have at least one neuron");
  if (w_recurrent.rows() != n || w_recurrent.cols() != n)
    throw ConfigError("w_recurrent must be N x N with N = " + std::to_string(n));
  if (bias.size() != n) throw ConfigError("bias must have length N");
  if (p_bar.size() != n) throw ConfigError("p_bar must have length N");
  if (!all_finite(w_recurrent) || !w_input.allFinite() || !bias.allFinite())
    throw ConfigError("weights and biases must be finite");
  if (!(p_max > 0.0 && p_max <= 1.0)) throw ConfigError("p_max must lie in (0, 1]");
  if (!(p0_bar > 0.0 && p0_bar < 1.0)) throw ConfigError("p0_bar must lie in (0, 1)");
  if (!((p_bar.array() > 0.0).all() && (p_bar.array() < 1.0).all()))
    throw ConfigError("every p_bar entry must lie in (0, 1)");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be > 0");
}

Matrix StateTrace::state_block(std::size_t begin, std::size_t end) const {
  Matrix m(static_cast<Eigen::Index>(end - begin), n_neurons);
  for (std::size_t k = begin; k < end; ++k) {
    const auto r = row(k);
    for (int j = 0; j < n_neurons; ++j)
      m(static_cast<Eigen::Index>(k - begin), j) = static_cast<double>(r[j]);
  }
  return m;
}

InputSource InputSource::bernoulli(double p_one, std::uint64_t seed) {
  if (!(p_one >= 0.0 && p_one <= 1.0)) throw ConfigError("input probability must lie in [0, 1]");
  InputSource s;
  s.p_one_ = p_one;
  s.rng_.seed(seed);
  return s;
}

InputSource InputSource::replay(std::vector<Bit> bits) {
  InputSource s;
  s.replay_ = std::move(bits);
  return s;
}

Bit InputSource::next() {
  if (replay_) {
    if (cursor_ >= replay_->size()) throw ConfigError("replayed input stream exhausted");
    return (*replay_)[cursor_++] ? 1 : 0;
  }
  return uniform01(rng_) < p_one_ ? 1 : 0;
}

bool InputSource::exhausted() const noexcept { return replay_ && cursor_ >= replay_->size(); }

NetworkParams init_network(int n_neurons, double sigma2, std::uint64_t seed) {
  if (n_neurons < 1) throw ConfigError("n_neurons must be >= 1");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ConfigError("sigma2 must be > 0");
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2));
  NetworkParams p;
  p.w_recurrent.resize(n_neurons, n_neurons);
  for (int i = 0; i < n_neurons; ++i)
    for (int j = 0; j < n_neurons; ++j) p.w_recurrent(i, j) = gauss(rng);
  p.w_input.resize(n_neurons);
  for (int i = 0; i < n_neurons; ++i) p.w_input[i] = gauss(rng);
  p.bias = Vector::Zero(n_neurons);
  p.p_bar = Vector::Constant(n_neurons, 0.1);
  return p;
}

Vector membrane_potential(const NetworkParams& params, std::span<const Bit> x, Bit u) {
  const int n = params.n_neurons();
  if (static_cast<int>(x.size()) != n) throw ConfigError("state length does not match N");
  Vector centered(n), out(n);
  potentials_into(params, x, u, centered, out);
  return out;
}

Vector firing_probability(const NetworkParams& params, const Vector& potential) {
  return (params.p_max / (1.0 + (-potential.array()).exp())).matrix();
}

NetworkState step(const NetworkParams& params, const NetworkState& state, Bit u, Rng& rng) {
  const int n = params.n_neurons();
  if (static_cast<int>(state.x.size()) != n) throw ConfigError("state length does not match N");
  Vector centered(n), potential(n);
  potentials_into(params, state.x, u, centered, potential);
  NetworkState next{std::vector<Bit>(static_cast<std::size_t>(n)), state.t + 1};
  sample_into(params, potential, rng, next.x);
  return next;
}

void update_bias(NetworkParams& params, const NetworkState& new_state) {
  for (int i = 0; i < params.n_neurons(); ++i)
    params.bias[i] += params.epsilon * (static_cast<double>(new_state.x[i]) - params.p_bar[i]);
}

PhaseResult run_phase(NetworkParams params, NetworkState state, std::int64_t n_steps,
                      InputSource& input, Rng& rng, PhaseOptions options) {
  if (n_steps < 1) throw ConfigError("a phase needs at least one step");
  const int n = params.n_neurons();
  if (static_cast<int>(state.x.size()) != n) throw ConfigError("state length does not match N");

  PhaseResult out;
  out.trace.n_neurons = n;
  out.trace.t_start = state.t;
  if (options.record) {
    out.trace.inputs.reserve(static_cast<std::size_t>(n_steps));
    out.trace.states.reserve(static_cast<std::size_t>(n_steps) * static_cast<std::size_t>(n));
  }

  Vector centered(n), potential(n);
  std::vector<Bit> next(static_cast<std::size_t>(n));
  for (std::int64_t s = 0; s < n_steps; ++s) {
    const Bit u = input.next();
    if (options.record) {
      out.trace.inputs.push_back(u);
      out.trace.states.insert(out.trace.states.end(), state.x.begin(), state.x.end());
    }
    potentials_into(params, state.x, u, centered, potential);
    sample_into(params, potential, rng, next);
    state.x.swap(next);
    ++state.t;
    if (options.adapt_bias) {
      for (int i = 0; i < n; ++i)
        params.bias[i] += params.epsilon * (static_cast<double>(state.x[i]) - params.p_bar[i]);
    }
  }
  out.params = std::move(params);
  out.state = std::move(state);
  return out;
}

}  // namespace rinfo
