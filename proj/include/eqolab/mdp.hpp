#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eqolab/rng.hpp"

namespace eqolab {

enum class RewardKind { BoundedBernoulliScaled, Gaussian, ExponentialShifted, Degenerate };

std::string_view reward_kind_name(RewardKind kind);
RewardKind parse_reward_kind(std::string_view name);

// (σ², α) such that the centered variable is (σ, α)-sub-exponential.
struct SubExpCertificate {
  double sigma2 = 0.0;
  double alpha = 0.0;
};

struct RewardModel {
  RewardKind kind = RewardKind::Degenerate;
  double mean = 0.0;
  double range = 1.0;     // bounded: samples are range·Bernoulli(mean/range)
  double variance = 0.0;  // gaussian
  double rate = 1.0;      // exponential: mean − 1/rate + Exp(rate)

  static RewardModel bounded(double mean, double range);
  static RewardModel gaussian(double mean, double variance);
  static RewardModel exponential(double mean, double rate);
  static RewardModel degenerate(double mean);

  double noise_variance() const;
  SubExpCertificate certificate() const;
  double sample(Rng& rng) const;
};

// Tabular episodic MDP. Steps are indexed h = 0..H-1 throughout the library.
struct MdpSpec {
  int S = 1;
  int A = 1;
  int H = 1;
  double v_max = 1.0;
  std::vector<double> P;              // [s][a][s'] flattened, size S·A·S
  std::vector<RewardModel> rewards;   // [h][s][a] flattened, size H·S·A
  bool rewards_shared = true;         // true when every step uses the same per-(s,a) model
  std::vector<int> initial_states{0}; // used cyclically over episodes

  std::size_t sa_index(int s, int a) const { return static_cast<std::size_t>(s) * A + a; }
  std::size_t hsa_index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * S + s) * A + a;
  }
  const double* row(int s, int a) const { return P.data() + sa_index(s, a) * S; }
  double prob(int s, int a, int next) const { return row(s, a)[next]; }
  const RewardModel& reward(int h, int s, int a) const { return rewards[hsa_index(h, s, a)]; }
  double mean_reward(int h, int s, int a) const { return reward(h, s, a).mean; }
  // Initial state of episode k (k ≥ 1).
  int initial_state(std::int64_t k) const {
    return initial_states[static_cast<std::size_t>((k - 1) % static_cast<std::int64_t>(initial_states.size()))];
  }
  bool is_bandit() const { return S == 1 && H == 1; }

  static MdpSpec bandit(const std::vector<RewardModel>& arms, double v_max);
};

// Validates and repairs a raw MDP description. Rewards given per (s,a) of size S·A are
// expanded over the horizon.
MdpSpec build_mdp(MdpSpec raw);

// Deterministic policy: action for (h, s), flattened as h·S + s.
using Policy = std::vector<int>;

struct ValueTables {
  int H = 0, S = 0, A = 0;
  std::vector<double> v_star;  // (H+1)·S, row H is zero
  std::vector<double> q_star;  // H·S·A
  std::vector<double> gap;     // H·S·A
  std::optional<double> gap_min;
  Policy pi_star;              // H·S

  double v(int h, int s) const { return v_star[static_cast<std::size_t>(h) * S + s]; }
  double q(int h, int s, int a) const { return q_star[(static_cast<std::size_t>(h) * S + s) * A + a]; }
  double gap_at(int h, int s, int a) const { return gap[(static_cast<std::size_t>(h) * S + s) * A + a]; }
};

// Gaps below this are treated as exact ties.
inline constexpr double kGapTolerance = 1e-12;

ValueTables optimal_values(const MdpSpec& mdp);
// V^π_h(s) for h = 0..H, flattened (H+1)·S with row H zero.
std::vector<double> policy_value(const MdpSpec& mdp, const Policy& pi);
// Pointwise minimum of V^π over all deterministic policies.
std::vector<double> minimum_values(const MdpSpec& mdp);

// Number of deterministic policies A^(S·H), saturating at 2^63.
std::uint64_t deterministic_policy_count(const MdpSpec& mdp);
inline constexpr std::uint64_t kBruteForcePolicyCap = 4096;

enum class ProxyMode { Table1Bound, BruteForceExact };
enum class GaussianWStar { Table, Derivation };

std::string_view proxy_mode_name(ProxyMode mode);
ProxyMode parse_proxy_mode(std::string_view name);
GaussianWStar parse_gaussian_w_star(std::string_view name);

struct VarianceProxyTables {
  std::vector<double> sigma_exp2;  // H·S·A
  double w_star = 0.0;
  double w_diff_star = 0.0;
  double v_alpha = 0.0;
  double sigma_max = 0.0;
  ProxyMode mode = ProxyMode::Table1Bound;
};

VarianceProxyTables variance_proxy(const MdpSpec& mdp, const ValueTables& vt, ProxyMode mode,
                                   GaussianWStar gaussian_w_star = GaussianWStar::Table);

enum class GapChoice { HalfGapOrMin, ReturnGap };

struct EffectiveGaps {
  bool empty = true;               // all actions optimal
  std::vector<double> per_step;    // H·S·A, +inf where irrelevant
  std::vector<double> per_pair;    // S·A, minimum over steps
  std::optional<double> v_gap;
  double per_pair_at(int s, int a, int A) const { return per_pair[static_cast<std::size_t>(s) * A + a]; }
};

EffectiveGaps effective_gap(const MdpSpec& mdp, const ValueTables& vt, GapChoice choice);

struct StepSample {
  double reward = 0.0;
  int next_state = 0;
};

StepSample sample_step(const MdpSpec& mdp, int h, int s, int a, Rng& rng);
int sample_next_state(const MdpSpec& mdp, int s, int a, Rng& rng);

}  // namespace eqolab
