#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <set>

#include "rinfo/benchmarks.hpp"
#include "rinfo/error.hpp"

namespace rinfo {

namespace {

void check_arity(int arity) {
  if (arity != 2 && arity != 3) throw ConfigError("Boolean rules support arity 2 or 3 only");
}

// sum_k coef[k] y_k >= rhs, integer coefficients.
struct Inequality {
  std::vector<long long> coef;
  long long rhs = 0;
  auto operator<=>(const Inequality&) const = default;
};

void normalize(Inequality& q) {
  long long g = std::abs(q.rhs);
  for (auto c : q.coef) g = std::gcd(g, std::abs(c));
  if (g > 1) {
    for (auto& c : q.coef) c /= g;
    q.rhs /= g;
  }
}

bool feasible(std::vector<Inequality> system, int n_vars) {
  for (int var = 0; var < n_vars; ++var) {
    std::vector<Inequality> pos, neg;
    std::set<Inequality> next;
    for (auto& q : system) {
      if (q.coef[var] > 0)
        pos.push_back(q);
      else if (q.coef[var] < 0)
        neg.push_back(q);
      else
        next.insert(q);
    }
    for (const auto& p : pos) {
      for (const auto& m : neg) {
        const long long a = p.coef[var];
        const long long b = -m.coef[var];
        Inequality q;
        q.coef.resize(p.coef.size());
        for (std::size_t k = 0; k < q.coef.size(); ++k) q.coef[k] = b * p.coef[k] + a * m.coef[k];
        q.rhs = b * p.rhs + a * m.rhs;
        normalize(q);
        next.insert(std::move(q));
      }
    }
    system.assign(next.begin(), next.end());
  }
  // Only 0 >= rhs constraints remain.
  return std::all_of(system.begin(), system.end(), [](const Inequality& q) { return q.rhs <= 0; });
}

}  // namespace

BooleanRule BooleanRule::from_id(int arity, std::uint32_t rule_id) {
  check_arity(arity);
  const std::uint32_t rows = 1u << arity;
  if (rule_id >= (1u << rows)) throw ConfigError("rule id out of range for arity");
  BooleanRule r;
  r.arity = arity;
  r.rule_id = rule_id;
  r.truth_table.resize(rows);
  for (std::uint32_t v = 0; v < rows; ++v) r.truth_table[v] = (rule_id >> v) & 1u;
  r.separable = is_linearly_separable(r);
  return r;
}

bool is_linearly_separable(const BooleanRule& rule) {
  check_arity(rule.arity);
  const int n = rule.arity;
  const std::uint32_t rows = 1u << n;
  if (rule.truth_table.size() != rows) throw ConfigError("truth table size must be 2^arity");
  // Unknowns (w_1..w_n, theta). Bit (n-1-k) of the pattern is input k.
  std::vector<Inequality> system;
  for (std::uint32_t v = 0; v < rows; ++v) {
    Inequality q;
    q.coef.resize(n + 1);
    const long long sign = rule.truth_table[v] ? 1 : -1;
    for (int k = 0; k < n; ++k) q.coef[k] = sign * static_cast<long long>((v >> (n - 1 - k)) & 1u);
    q.coef[n] = -sign;
    q.rhs = 1;
    system.push_back(std::move(q));
  }
  return feasible(std::move(system), n + 1);
}

std::vector<BooleanRule> enumerate_rules(int arity) {
  check_arity(arity);
  const std::uint32_t all = 1u << (1u << arity);
  std::vector<BooleanRule> rules;
  rules.reserve(all - 2);
  for (std::uint32_t id = 1; id + 1 < all; ++id) rules.push_back(BooleanRule::from_id(arity, id));
  return rules;
}

std::vector<Bit> rule_target(const BooleanRule& rule, std::span<const Bit> inputs, int tau,
                             std::size_t begin, std::size_t end) {
  if (tau < 0) throw ConfigError("delay must be >= 0");
  const std::size_t lookback = static_cast<std::size_t>(tau + rule.arity - 1);
  if (begin < lookback) throw ConfigError("insufficient lookback for rule target");
  if (end > inputs.size() || end < begin) throw ConfigError("target range outside the input stream");
  std::vector<Bit> out;
  out.reserve(end - begin);
  for (std::size_t t = begin; t < end; ++t) {
    std::uint32_t pattern = 0;
    for (int k = 0; k < rule.arity; ++k)
      pattern = (pattern << 1) | (inputs[t - static_cast<std::size_t>(tau + k)] & 1u);
    out.push_back(rule.evaluate(pattern));
  }
  return out;
}

}  // namespace rinfo
