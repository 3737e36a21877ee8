#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "eqolab/mdp.hpp"

namespace testing_support {

using eqolab::MdpSpec;
using eqolab::Policy;
using eqolab::RewardModel;

// Random tabular instance with bounded rewards; v_max = H·range keeps every value in range.
inline MdpSpec random_bounded_mdp(std::mt19937_64& g, int S, int A, int H, double range = 0.5) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MdpSpec m;
  m.S = S;
  m.A = A;
  m.H = H;
  m.v_max = H * range;
  m.P.resize(static_cast<std::size_t>(S) * A * S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double total = 0.0;
      std::vector<double> w(S);
      for (int n = 0; n < S; ++n) total += (w[n] = u(g) + (u(g) < 0.3 ? 0.0 : 0.05));
      for (int n = 0; n < S; ++n) m.P[(static_cast<std::size_t>(s) * A + a) * S + n] = w[n] / total;
    }
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) m.rewards.push_back(RewardModel::bounded(range * u(g), range));
  return eqolab::build_mdp(m);
}

// Value of a deterministic policy from s at step h by summing over every state sequence.
inline double trajectory_value(const MdpSpec& m, const Policy& pi, int h0, int s0) {
  std::function<double(int, int, double)> go = [&](int h, int s, double prob) -> double {
    if (h == m.H || prob == 0.0) return 0.0;
    const int a = pi[static_cast<std::size_t>(h) * m.S + s];
    double total = prob * m.mean_reward(h, s, a);
    for (int n = 0; n < m.S; ++n) total += go(h + 1, n, prob * m.prob(s, a, n));
    return total;
  };
  return go(h0, s0, 1.0);
}

// All A^(S·H) deterministic policies.
inline std::vector<Policy> all_policies(const MdpSpec& m) {
  std::vector<Policy> out;
  const std::size_t len = static_cast<std::size_t>(m.S) * m.H;
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < len; ++i) total *= static_cast<std::uint64_t>(m.A);
  for (std::uint64_t code = 0; code < total; ++code) {
    Policy pi(len);
    std::uint64_t c = code;
    for (std::size_t i = 0; i < len; ++i) {
      pi[i] = static_cast<int>(c % static_cast<std::uint64_t>(m.A));
      c /= static_cast<std::uint64_t>(m.A);
    }
    out.push_back(pi);
  }
  return out;
}

// max over policies of the trajectory value at (h, s).
inline double enumerated_optimum(const MdpSpec& m, int h, int s) {
  double best = -HUGE_VAL;
  for (const auto& pi : all_policies(m)) best = std::max(best, trajectory_value(m, pi, h, s));
  return best;
}

// ln C(n, k) via lgamma.
inline double log_choose(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

// P(B ≤ j) for B ~ Bin(n, p) by direct term summation.
inline double binomial_cdf(int n, double p, int j) {
  if (j < 0) return 0.0;
  if (j >= n) return 1.0;
  double total = 0.0;
  for (int i = 0; i <= j; ++i) {
    if (p == 0.0) return 1.0;
    if (p == 1.0) return 0.0;
    total += std::exp(log_choose(n, i) + i * std::log(p) + (n - i) * std::log1p(-p));
  }
  return std::min(total, 1.0);
}

}  // namespace testing_support
