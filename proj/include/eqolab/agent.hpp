#pragma once

#include <cstdint>
#include <vector>

#include "eqolab/extended_real.hpp"
#include "eqolab/mdp.hpp"
#include "eqolab/rng.hpp"
#include "eqolab/schedule.hpp"

namespace eqolab {

// min(c1/n, c2/√n) with ∞ absorbed by the min. n = 0 returns ∞, which forces Q to v_max.
ExtReal bonus(ExtReal c1, ExtReal c2, std::int64_t n);

// Visit statistics. Reward means are kept as (sum, count) and divided on read.
class AgentState {
 public:
  AgentState() = default;
  AgentState(int S, int A);

  int S() const { return S_; }
  int A() const { return A_; }
  std::int64_t episode() const { return episode_; }  // index k of the next episode to plan
  void set_episode(std::int64_t k) { episode_ = k; }

  std::int64_t count(int s, int a) const { return counts_[idx(s, a)]; }
  double reward_sum(int s, int a) const { return reward_sums_[idx(s, a)]; }
  std::int64_t transition_count(int s, int a, int next) const { return trans_[idx(s, a) * S_ + next]; }

  void record(int s, int a, double reward, int next);
  // Direct write access for tests and tools that construct states by hand.
  void set_counts(int s, int a, std::int64_t n, double reward_sum, const std::vector<std::int64_t>& next_counts);
  void check_consistent() const;

 private:
  std::size_t idx(int s, int a) const { return static_cast<std::size_t>(s) * A_ + a; }
  int S_ = 0, A_ = 0;
  std::int64_t episode_ = 1;
  std::vector<std::int64_t> counts_;
  std::vector<double> reward_sums_;
  std::vector<std::int64_t> trans_;
};

struct MdpDims {
  int S = 1, A = 1, H = 1;
  double v_max = 1.0;
  static MdpDims of(const MdpSpec& m) { return {m.S, m.A, m.H, m.v_max}; }
};

struct EpisodePlan {
  std::vector<double> Q;  // H·S·A
  std::vector<double> V;  // (H+1)·S
  Policy pi;              // H·S
};

EpisodePlan plan_episode(const AgentState& state, const MdpDims& dims, ExtReal c1, ExtReal c2);
EpisodePlan plan_episode(const AgentState& state, const MdpDims& dims, const BonusSchedule& schedule);
void plan_episode_into(const AgentState& state, const MdpDims& dims, ExtReal c1, ExtReal c2, EpisodePlan& out);

struct Transition {
  int h = 0, s = 0, a = 0;
  double reward = 0.0;
  int next_state = 0;
};

struct EpisodeTrace {
  std::int64_t k = 0;
  int initial_state = 0;
  std::vector<Transition> steps;
  double regret = 0.0;          // V*_1(s₁) − V^{π^k}_1(s₁)
  double estimate = 0.0;        // V^k_1(s₁)
  double optimal = 0.0;         // V*_1(s₁)
};

// One EQO+ learner on a fixed MDP with reusable workspaces.
class EqoAgent {
 public:
  EqoAgent(const MdpSpec& mdp, const ValueTables& vt, BonusSchedule schedule);

  const AgentState& state() const { return state_; }
  AgentState& state() { return state_; }
  const EpisodePlan& last_plan() const { return plan_; }

  // Plans episode k = state().episode(), executes it, then updates statistics.
  const EpisodeTrace& run_episode(Rng& rng);

 private:
  const MdpSpec* mdp_;
  const ValueTables* vt_;
  BonusSchedule schedule_;
  AgentState state_;
  EpisodePlan plan_;
  EpisodeTrace trace_;
  std::vector<double> policy_v_;
};

EpisodeTrace run_episode(const MdpSpec& mdp, const ValueTables& vt, AgentState& state,
                         const BonusSchedule& schedule, Rng& rng);

// Algorithm for bandits: round-robin for t ≤ A, then argmax of r̂ + bonus.
class BanditState {
 public:
  explicit BanditState(int A = 1);
  int A() const { return static_cast<int>(counts_.size()); }
  std::int64_t count(int a) const { return counts_[static_cast<std::size_t>(a)]; }
  double reward_sum(int a) const { return sums_[static_cast<std::size_t>(a)]; }
  void record(int a, double reward);
  int select(const BonusSchedule& schedule, std::int64_t t) const;

 private:
  std::vector<std::int64_t> counts_;
  std::vector<double> sums_;
};

struct BanditStepResult {
  int arm = 0;
  double reward = 0.0;
};

BanditStepResult bandit_step(BanditState& state, const MdpSpec& bandit, const BonusSchedule& schedule,
                             std::int64_t t, Rng& rng);

}  // namespace eqolab
