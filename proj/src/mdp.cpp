#include "eqolab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "eqolab/error.hpp"

namespace eqolab {

namespace {

constexpr double kRowRepairTolerance = 1e-9;
constexpr double kRowAssertTolerance = 1e-12;
constexpr double kValueSlack = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string where(int s, int a) { return "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")"; }

// Iterates all A^(S·H) deterministic policies in odometer order.
template <typename Fn>
void for_each_policy(const MdpSpec& mdp, Fn&& fn) {
  Policy pi(static_cast<std::size_t>(mdp.H) * mdp.S, 0);
  while (true) {
    fn(pi);
    std::size_t i = 0;
    while (i < pi.size()) {
      if (++pi[i] < mdp.A) break;
      pi[i] = 0;
      ++i;
    }
    if (i == pi.size()) return;
  }
}

void require_enumerable(const MdpSpec& mdp, const char* what) {
  const auto count = deterministic_policy_count(mdp);
  if (count > kBruteForcePolicyCap) {
    fail(ErrorKind::BruteForceTooLarge, std::string(what) + " needs " + std::to_string(count) +
                                            " policies, cap is " + std::to_string(kBruteForcePolicyCap));
  }
}

// Var of V_{h+1}(s') under P(·|s,a).
double next_value_variance(const MdpSpec& mdp, const double* v_next, int s, int a) {
  const double* p = mdp.row(s, a);
  double m1 = 0.0, m2 = 0.0;
  for (int n = 0; n < mdp.S; ++n) {
    m1 += p[n] * v_next[n];
    m2 += p[n] * v_next[n] * v_next[n];
  }
  return std::max(0.0, m2 - m1 * m1);
}

double kind_v_alpha(const RewardModel& r, const MdpSpec& mdp) {
  const double carry = mdp.H > 1 ? mdp.v_max : 0.0;
  switch (r.kind) {
    case RewardKind::BoundedBernoulliScaled: return 2.0 * mdp.v_max;
    case RewardKind::Gaussian:
    case RewardKind::Degenerate: return carry;
    case RewardKind::ExponentialShifted: return std::max(r.certificate().alpha, carry);
  }
  return carry;
}

}  // namespace

std::string_view reward_kind_name(RewardKind kind) {
  switch (kind) {
    case RewardKind::BoundedBernoulliScaled: return "bounded-bernoulli-scaled";
    case RewardKind::Gaussian: return "gaussian";
    case RewardKind::ExponentialShifted: return "exponential-shifted";
    case RewardKind::Degenerate: return "degenerate";
  }
  return "unknown";
}

RewardKind parse_reward_kind(std::string_view name) {
  if (name == "bounded-bernoulli-scaled") return RewardKind::BoundedBernoulliScaled;
  if (name == "gaussian") return RewardKind::Gaussian;
  if (name == "exponential-shifted") return RewardKind::ExponentialShifted;
  if (name == "degenerate") return RewardKind::Degenerate;
  fail(ErrorKind::InvalidArgument, "unknown reward kind: " + std::string(name));
}

RewardModel RewardModel::bounded(double mean, double range) {
  RewardModel r;
  r.kind = RewardKind::BoundedBernoulliScaled;
  r.mean = mean;
  r.range = range;
  return r;
}

RewardModel RewardModel::gaussian(double mean, double variance) {
  RewardModel r;
  r.kind = RewardKind::Gaussian;
  r.mean = mean;
  r.variance = variance;
  return r;
}

RewardModel RewardModel::exponential(double mean, double rate) {
  RewardModel r;
  r.kind = RewardKind::ExponentialShifted;
  r.mean = mean;
  r.rate = rate;
  return r;
}

RewardModel RewardModel::degenerate(double mean) {
  RewardModel r;
  r.kind = RewardKind::Degenerate;
  r.mean = mean;
  return r;
}

double RewardModel::noise_variance() const {
  switch (kind) {
    case RewardKind::BoundedBernoulliScaled: return mean * (range - mean);
    case RewardKind::Gaussian: return variance;
    case RewardKind::ExponentialShifted: return 1.0 / (rate * rate);
    case RewardKind::Degenerate: return 0.0;
  }
  return 0.0;
}

SubExpCertificate RewardModel::certificate() const {
  switch (kind) {
    case RewardKind::BoundedBernoulliScaled:
      return {2.0 * (std::exp(1.0) - 2.0) * noise_variance(), range};
    case RewardKind::Gaussian: return {variance, 0.0};
    case RewardKind::ExponentialShifted:
      return {8.0 * (std::log(2.0) - 0.5) / (rate * rate), 2.0 / rate};
    case RewardKind::Degenerate: return {0.0, 0.0};
  }
  return {};
}

double RewardModel::sample(Rng& rng) const {
  switch (kind) {
    case RewardKind::BoundedBernoulliScaled:
      return uniform01(rng) * range < mean ? range : 0.0;
    case RewardKind::Gaussian: {
      std::normal_distribution<double> n(0.0, 1.0);
      return mean + std::sqrt(variance) * n(rng);
    }
    case RewardKind::ExponentialShifted: {
      std::exponential_distribution<double> e(rate);
      return mean - 1.0 / rate + e(rng);
    }
    case RewardKind::Degenerate: return mean;
  }
  return mean;
}

MdpSpec MdpSpec::bandit(const std::vector<RewardModel>& arms, double v_max) {
  MdpSpec m;
  m.S = 1;
  m.H = 1;
  m.A = static_cast<int>(arms.size());
  m.v_max = v_max;
  m.P.assign(arms.size(), 1.0);
  m.rewards = arms;
  return build_mdp(std::move(m));
}

MdpSpec build_mdp(MdpSpec m) {
  if (m.S < 1 || m.A < 1 || m.H < 1) fail(ErrorKind::InvalidArgument, "S, A, H must be ≥ 1");
  if (!(m.v_max > 0.0) || !std::isfinite(m.v_max)) fail(ErrorKind::InvalidArgument, "v_max must be positive and finite");
  const std::size_t sa = static_cast<std::size_t>(m.S) * m.A;
  if (m.P.size() != sa * m.S) {
    fail(ErrorKind::InvalidArgument, "transition tensor has " + std::to_string(m.P.size()) +
                                         " entries, expected " + std::to_string(sa * m.S));
  }
  if (m.rewards.size() == sa) {
    std::vector<RewardModel> expanded;
    expanded.reserve(sa * m.H);
    for (int h = 0; h < m.H; ++h) expanded.insert(expanded.end(), m.rewards.begin(), m.rewards.end());
    m.rewards = std::move(expanded);
    m.rewards_shared = true;
  } else if (m.rewards.size() == sa * m.H) {
    m.rewards_shared = m.H == 1;
  } else {
    fail(ErrorKind::InvalidArgument, "reward table must have S·A or H·S·A entries");
  }
  if (m.initial_states.empty()) fail(ErrorKind::InvalidArgument, "at least one initial state required");
  for (int s0 : m.initial_states) {
    if (s0 < 0 || s0 >= m.S) fail(ErrorKind::InvalidArgument, "initial state out of range: " + std::to_string(s0));
  }

  for (int s = 0; s < m.S; ++s) {
    for (int a = 0; a < m.A; ++a) {
      double* p = m.P.data() + m.sa_index(s, a) * m.S;
      double sum = 0.0;
      for (int n = 0; n < m.S; ++n) {
        if (!std::isfinite(p[n])) fail(ErrorKind::NonStochasticRow, "non-finite probability at " + where(s, a));
        if (p[n] < 0.0) fail(ErrorKind::NegativeProbability, "negative probability at " + where(s, a));
        sum += p[n];
      }
      if (std::abs(sum - 1.0) > kRowRepairTolerance) {
        fail(ErrorKind::NonStochasticRow, "row " + where(s, a) + " sums to " + std::to_string(sum));
      }
      if (sum != 1.0) {
        for (int n = 0; n < m.S; ++n) p[n] /= sum;
        double check = 0.0;
        for (int n = 0; n < m.S; ++n) check += p[n];
        if (std::abs(check - 1.0) > kRowAssertTolerance) {
          fail(ErrorKind::NonStochasticRow, "row " + where(s, a) + " could not be renormalized");
        }
      }
    }
  }

  for (const auto& r : m.rewards) {
    if (!std::isfinite(r.mean)) fail(ErrorKind::InvalidArgument, "non-finite reward mean");
    switch (r.kind) {
      case RewardKind::BoundedBernoulliScaled:
        if (!(r.range > 0.0) || r.range > m.v_max) {
          fail(ErrorKind::ValueRangeViolation, "bounded reward range must lie in (0, v_max]");
        }
        if (r.mean < 0.0 || r.mean > r.range) fail(ErrorKind::ValueRangeViolation, "bounded reward mean outside [0, range]");
        break;
      case RewardKind::Gaussian:
        if (!(r.variance >= 0.0) || !std::isfinite(r.variance)) fail(ErrorKind::InvalidArgument, "gaussian variance must be ≥ 0");
        break;
      case RewardKind::ExponentialShifted:
        if (!(r.rate > 0.0) || !std::isfinite(r.rate)) fail(ErrorKind::InvalidArgument, "exponential rate must be > 0");
        break;
      case RewardKind::Degenerate: break;
    }
  }

  // The extremes of V^π over deterministic policies are the max and min backward inductions.
  const auto hi = optimal_values(m).v_star;
  const auto lo = minimum_values(m);
  for (std::size_t i = 0; i < hi.size(); ++i) {
    if (hi[i] > m.v_max + kValueSlack || lo[i] < -kValueSlack) {
      fail(ErrorKind::ValueRangeViolation, "some policy value leaves [0, v_max]");
    }
  }
  return m;
}

ValueTables optimal_values(const MdpSpec& mdp) {
  ValueTables vt;
  vt.H = mdp.H;
  vt.S = mdp.S;
  vt.A = mdp.A;
  const std::size_t S = mdp.S;
  vt.v_star.assign((mdp.H + 1) * S, 0.0);
  vt.q_star.assign(static_cast<std::size_t>(mdp.H) * S * mdp.A, 0.0);
  vt.gap.assign(vt.q_star.size(), 0.0);
  vt.pi_star.assign(static_cast<std::size_t>(mdp.H) * S, 0);
  const double tie = kGapTolerance * std::max(1.0, mdp.v_max);
  double gmin = kInf;
  for (int h = mdp.H - 1; h >= 0; --h) {
    const double* v_next = vt.v_star.data() + (h + 1) * S;
    for (int s = 0; s < mdp.S; ++s) {
      double best = -kInf;
      int best_a = 0;
      for (int a = 0; a < mdp.A; ++a) {
        const double* p = mdp.row(s, a);
        double q = mdp.mean_reward(h, s, a);
        for (int n = 0; n < mdp.S; ++n) q += p[n] * v_next[n];
        vt.q_star[mdp.hsa_index(h, s, a)] = q;
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      vt.v_star[h * S + s] = best;
      vt.pi_star[h * S + s] = best_a;
      for (int a = 0; a < mdp.A; ++a) {
        double g = best - vt.q_star[mdp.hsa_index(h, s, a)];
        if (g < tie) g = 0.0;
        vt.gap[mdp.hsa_index(h, s, a)] = g;
        if (g > 0.0) gmin = std::min(gmin, g);
      }
    }
  }
  if (gmin < kInf) vt.gap_min = gmin;
  return vt;
}

std::vector<double> policy_value(const MdpSpec& mdp, const Policy& pi) {
  const std::size_t S = mdp.S;
  if (pi.size() != static_cast<std::size_t>(mdp.H) * S) fail(ErrorKind::InvalidArgument, "policy has wrong size");
  std::vector<double> v((mdp.H + 1) * S, 0.0);
  for (int h = mdp.H - 1; h >= 0; --h) {
    const double* v_next = v.data() + (h + 1) * S;
    for (int s = 0; s < mdp.S; ++s) {
      const int a = pi[h * S + s];
      const double* p = mdp.row(s, a);
      double q = mdp.mean_reward(h, s, a);
      for (int n = 0; n < mdp.S; ++n) q += p[n] * v_next[n];
      v[h * S + s] = q;
    }
  }
  return v;
}

std::vector<double> minimum_values(const MdpSpec& mdp) {
  const std::size_t S = mdp.S;
  std::vector<double> v((mdp.H + 1) * S, 0.0);
  for (int h = mdp.H - 1; h >= 0; --h) {
    const double* v_next = v.data() + (h + 1) * S;
    for (int s = 0; s < mdp.S; ++s) {
      double worst = kInf;
      for (int a = 0; a < mdp.A; ++a) {
        const double* p = mdp.row(s, a);
        double q = mdp.mean_reward(h, s, a);
        for (int n = 0; n < mdp.S; ++n) q += p[n] * v_next[n];
        worst = std::min(worst, q);
      }
      v[h * S + s] = worst;
    }
  }
  return v;
}

std::uint64_t deterministic_policy_count(const MdpSpec& mdp) {
  constexpr std::uint64_t kSaturate = std::uint64_t{1} << 63;
  std::uint64_t count = 1;
  const long long slots = static_cast<long long>(mdp.S) * mdp.H;
  for (long long i = 0; i < slots; ++i) {
    if (count > kSaturate / static_cast<std::uint64_t>(mdp.A)) return kSaturate;
    count *= static_cast<std::uint64_t>(mdp.A);
  }
  return count;
}

std::string_view proxy_mode_name(ProxyMode mode) {
  return mode == ProxyMode::Table1Bound ? "table1-bound" : "brute-force-exact";
}

ProxyMode parse_proxy_mode(std::string_view name) {
  if (name == "table1-bound") return ProxyMode::Table1Bound;
  if (name == "brute-force-exact") return ProxyMode::BruteForceExact;
  fail(ErrorKind::InvalidArgument, "unknown proxy mode: " + std::string(name));
}

GaussianWStar parse_gaussian_w_star(std::string_view name) {
  if (name == "table") return GaussianWStar::Table;
  if (name == "derivation") return GaussianWStar::Derivation;
  fail(ErrorKind::InvalidArgument, "unknown gaussian w_star choice: " + std::string(name));
}

VarianceProxyTables variance_proxy(const MdpSpec& mdp, const ValueTables& vt, ProxyMode mode,
                                   GaussianWStar gaussian_w_star) {
  VarianceProxyTables out;
  out.mode = mode;
  const std::size_t S = mdp.S;
  out.sigma_exp2.assign(static_cast<std::size_t>(mdp.H) * S * mdp.A, 0.0);

  bool all_bounded = true;
  bool all_gaussian = true;
  double max_gauss_var = 0.0;
  for (int h = 0; h < mdp.H; ++h) {
    const double* v_next = vt.v_star.data() + (h + 1) * S;
    for (int s = 0; s < mdp.S; ++s) {
      for (int a = 0; a < mdp.A; ++a) {
        const RewardModel& r = mdp.reward(h, s, a);
        const double var_next = next_value_variance(mdp, v_next, s, a);
        double sig2 = 0.0;
        switch (r.kind) {
          case RewardKind::BoundedBernoulliScaled:
            sig2 = 2.0 * (r.noise_variance() + var_next);
            all_gaussian = false;
            break;
          case RewardKind::Gaussian:
          case RewardKind::Degenerate:
            sig2 = r.noise_variance() + 2.0 * var_next;
            max_gauss_var = std::max(max_gauss_var, r.noise_variance());
            all_bounded = false;
            break;
          case RewardKind::ExponentialShifted:
            sig2 = r.certificate().sigma2 + 2.0 * var_next;
            all_bounded = false;
            all_gaussian = false;
            break;
        }
        out.sigma_exp2[mdp.hsa_index(h, s, a)] = sig2;
        out.v_alpha = std::max(out.v_alpha, kind_v_alpha(r, mdp));
      }
    }
  }

  const double v2 = mdp.v_max * mdp.v_max;
  if (mode == ProxyMode::Table1Bound) {
    if (all_bounded) {
      out.w_star = 2.0 * v2;
      out.w_diff_star = 2.0 * v2;
    } else if (all_gaussian && mdp.is_bandit()) {
      out.w_star = max_gauss_var;
      out.w_diff_star = 0.0;
    } else if (all_gaussian) {
      const double head = gaussian_w_star == GaussianWStar::Table ? max_gauss_var * mdp.H
                                                                   : 0.5 * max_gauss_var * mdp.H;
      out.w_star = head + v2;
      out.w_diff_star = v2;
    } else {
      // No tabulated row: sum of per-step maxima bounds every W^π_h(s).
      double w = 0.0;
      for (int h = 0; h < mdp.H; ++h) {
        double m = 0.0;
        for (int s = 0; s < mdp.S; ++s)
          for (int a = 0; a < mdp.A; ++a) m = std::max(m, out.sigma_exp2[mdp.hsa_index(h, s, a)]);
        w += 0.5 * m;
      }
      out.w_star = w;
      out.w_diff_star = w;
    }
  } else {
    require_enumerable(mdp, "brute-force variance proxy");
    std::vector<double> w((mdp.H + 1) * S, 0.0);
    double w_star = 0.0, w_diff = 0.0;
    for_each_policy(mdp, [&](const Policy& pi) {
      for (int h = mdp.H - 1; h >= 0; --h) {
        double lo = kInf, hi = -kInf;
        for (int s = 0; s < mdp.S; ++s) {
          const int a = pi[h * S + s];
          const double* p = mdp.row(s, a);
          double x = 0.5 * out.sigma_exp2[mdp.hsa_index(h, s, a)];
          for (int n = 0; n < mdp.S; ++n) x += p[n] * w[(h + 1) * S + n];
          w[h * S + s] = x;
          lo = std::min(lo, x);
          hi = std::max(hi, x);
        }
        w_star = std::max(w_star, hi);
        w_diff = std::max(w_diff, hi - lo);
      }
    });
    out.w_star = w_star;
    out.w_diff_star = w_diff;
  }

  double max_sig = 0.0;
  for (double x : out.sigma_exp2) max_sig = std::max(max_sig, std::sqrt(x));
  out.sigma_max = std::max(2.0 * max_sig, std::sqrt(2.0 * out.v_alpha * mdp.v_max));
  return out;
}

EffectiveGaps effective_gap(const MdpSpec& mdp, const ValueTables& vt, GapChoice choice) {
  EffectiveGaps out;
  if (!vt.gap_min) return out;
  out.empty = false;
  const double gmin = *vt.gap_min;
  const std::size_t S = mdp.S;
  const std::size_t n = static_cast<std::size_t>(mdp.H) * S * mdp.A;
  out.per_step.assign(n, kInf);

  if (choice == GapChoice::HalfGapOrMin) {
    for (std::size_t i = 0; i < n; ++i) out.per_step[i] = std::max(0.5 * vt.gap[i], gmin / (2.0 * mdp.H));
  } else {
    require_enumerable(mdp, "return gap");
    std::vector<double> ret(n, kInf);
    std::vector<double> p(S), g(S), p_next(S), g_next(S);
    for_each_policy(mdp, [&](const Policy& pi) {
      for (int s0 : mdp.initial_states) {
        std::fill(p.begin(), p.end(), 0.0);
        std::fill(g.begin(), g.end(), 0.0);
        p[s0] = 1.0;
        for (int h = 0; h < mdp.H; ++h) {
          std::fill(p_next.begin(), p_next.end(), 0.0);
          std::fill(g_next.begin(), g_next.end(), 0.0);
          for (int s = 0; s < mdp.S; ++s) {
            if (p[s] <= 0.0) continue;
            const int a = pi[h * S + s];
            const std::size_t idx = mdp.hsa_index(h, s, a);
            const double mass = g[s] + p[s] * vt.gap[idx];
            const double conditional = mass / p[s];
            if (conditional > 0.0) ret[idx] = std::min(ret[idx], conditional / (2.0 * mdp.H));
            const double* row = mdp.row(s, a);
            for (int t = 0; t < mdp.S; ++t) {
              p_next[t] += p[s] * row[t];
              g_next[t] += mass * row[t];
            }
          }
          std::swap(p, p_next);
          std::swap(g, g_next);
        }
      }
    });
    for (std::size_t i = 0; i < n; ++i) out.per_step[i] = std::max(0.5 * vt.gap[i], ret[i]);
  }

  out.per_pair.assign(S * mdp.A, kInf);
  for (int h = 0; h < mdp.H; ++h)
    for (int s = 0; s < mdp.S; ++s)
      for (int a = 0; a < mdp.A; ++a) {
        double& slot = out.per_pair[mdp.sa_index(s, a)];
        slot = std::min(slot, out.per_step[mdp.hsa_index(h, s, a)]);
      }

  // v_gap: smallest positive gap reachable after a prefix of zero-gap actions.
  std::vector<char> reach(S, 0), reach_next(S, 0);
  for (int s0 : mdp.initial_states) reach[s0] = 1;
  double vg = kInf;
  for (int h = 0; h < mdp.H; ++h) {
    std::fill(reach_next.begin(), reach_next.end(), 0);
    for (int s = 0; s < mdp.S; ++s) {
      if (!reach[s]) continue;
      for (int a = 0; a < mdp.A; ++a) {
        const double gp = vt.gap[mdp.hsa_index(h, s, a)];
        if (gp > 0.0) {
          vg = std::min(vg, gp);
          continue;
        }
        const double* row = mdp.row(s, a);
        for (int t = 0; t < mdp.S; ++t)
          if (row[t] > 0.0) reach_next[t] = 1;
      }
    }
    std::swap(reach, reach_next);
  }
  out.v_gap = vg < kInf ? vg : gmin;
  return out;
}

int sample_next_state(const MdpSpec& mdp, int s, int a, Rng& rng) {
  const double* p = mdp.row(s, a);
  const double u = uniform01(rng);
  double acc = 0.0;
  int last = 0;
  for (int n = 0; n < mdp.S; ++n) {
    if (p[n] <= 0.0) continue;
    last = n;
    acc += p[n];
    if (u < acc) return n;
  }
  return last;
}

StepSample sample_step(const MdpSpec& mdp, int h, int s, int a, Rng& rng) {
  StepSample out;
  out.reward = mdp.reward(h, s, a).sample(rng);
  out.next_state = sample_next_state(mdp, s, a, rng);
  return out;
}

}  // namespace eqolab
