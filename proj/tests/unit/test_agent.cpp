#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "eqolab/agent.hpp"
#include "eqolab/error.hpp"
#include "eqolab/mdp.hpp"
#include "eqolab/schedule.hpp"
#include "eqolab/ucb.hpp"
#include "support.hpp"

using namespace eqolab;
using namespace testing_support;

namespace {

const ExtReal kInf = ExtReal::infinity();

MdpSpec small_mdp() {
  MdpSpec m;
  m.S = 2;
  m.A = 2;
  m.H = 2;
  m.v_max = 1.0;
  m.P = {0.5, 0.5, 0.8, 0.2, 0.3, 0.7, 0.6, 0.4};
  m.rewards = {RewardModel::bounded(0.45, 0.5), RewardModel::bounded(0.05, 0.5), RewardModel::bounded(0.05, 0.5),
               RewardModel::bounded(0.45, 0.5)};
  return build_mdp(m);
}

// Reference learner keyed by (s, a) maps; bonus is c1/N when c2 = ∞ and c2/√N when c1 = ∞.
class ReferenceLearner {
 public:
  ReferenceLearner(const MdpSpec& m, bool c1_only) : m_(m), c1_only_(c1_only) {}

  std::vector<int> plan(double c) const {
    std::vector<double> v_next(m_.S, 0.0);
    std::vector<int> pi(static_cast<std::size_t>(m_.H) * m_.S);
    for (int h = m_.H - 1; h >= 0; --h) {
      std::vector<double> v(m_.S);
      for (int s = 0; s < m_.S; ++s) {
        double best = -1;
        for (int a = 0; a < m_.A; ++a) {
          double q = m_.v_max;
          auto it = n_.find({s, a});
          if (it != n_.end()) {
            const double n = it->second;
            double est = sum_.at({s, a}) / n;
            for (int t = 0; t < m_.S; ++t) {
              auto jt = next_.find({s, a, t});
              if (jt != next_.end()) est += jt->second / n * v_next[t];
            }
            const double b = c1_only_ ? c / n : c / std::sqrt(n);
            q = std::min((est > 0 ? est : 0.0) + b, m_.v_max);
          }
          if (q > best) {
            best = q;
            pi[h * m_.S + s] = a;
          }
        }
        v[s] = best;
      }
      v_next = v;
    }
    return pi;
  }

  void record(int s, int a, double r, int next) {
    n_[{s, a}] += 1;
    sum_[{s, a}] += r;
    next_[{s, a, next}] += 1;
  }

 private:
  const MdpSpec& m_;
  bool c1_only_;
  std::map<std::pair<int, int>, double> n_, sum_;
  std::map<std::tuple<int, int, int>, double> next_;
};

void expect_recovery(bool c1_only) {
  const MdpSpec m = small_mdp();
  const ValueTables vt = optimal_values(m);
  const double c = 0.7;
  const int K = 400;
  InstanceDims d{m.S, m.A, m.H, m.v_max, K, 0, 0};
  const BonusSchedule sched = make_schedule(
      "constant", c1_only ? Json{{"c1", c}, {"c2", "inf"}} : Json{{"c1", "inf"}, {"c2", c}}, d);
  EqoAgent agent(m, vt, sched);
  ReferenceLearner ref(m, c1_only);
  Rng rng_agent(99), rng_ref(99);
  for (int k = 1; k <= K; ++k) {
    const auto pi = ref.plan(c);
    const EpisodeTrace& tr = agent.run_episode(rng_agent);
    int s = m.initial_state(k);
    for (int h = 0; h < m.H; ++h) {
      const int a = pi[h * m.S + s];
      ASSERT_EQ(tr.steps[h].a, a) << "k=" << k << " h=" << h;
      const StepSample x = sample_step(m, h, s, a, rng_ref);
      ref.record(s, a, x.reward, x.next_state);
      s = x.next_state;
    }
  }
}

}  // namespace

TEST(Bonus, Examples) {
  EXPECT_DOUBLE_EQ(bonus(10, kInf, 5).value(), 2.0);
  EXPECT_DOUBLE_EQ(bonus(kInf, 4, 16).value(), 1.0);
  EXPECT_DOUBLE_EQ(bonus(9, 3, 9).value(), 1.0);
  EXPECT_TRUE(bonus(kInf, kInf, 3).is_infinite());
  EXPECT_TRUE(bonus(1, 1, 0).is_infinite());
  EXPECT_THROW(bonus(1, 1, -1), Error);
}

TEST(PlanEpisode, FirstEpisodeIsOptimisticEverywhere) {
  const MdpSpec m = small_mdp();
  const AgentState st(m.S, m.A);
  const EpisodePlan p = plan_episode(st, MdpDims::of(m), 1.0, kInf);
  for (double q : p.Q) EXPECT_EQ(q, m.v_max);
  for (int h = 0; h < m.H; ++h)
    for (int s = 0; s < m.S; ++s) {
      EXPECT_EQ(p.V[h * m.S + s], m.v_max);
      EXPECT_EQ(p.pi[h * m.S + s], 0);
    }
}

TEST(PlanEpisode, ClipsAtVmax) {
  const MdpSpec m = small_mdp();
  AgentState st(m.S, m.A);
  st.set_counts(0, 1, 4, 3.6, {2, 2});
  const EpisodePlan p = plan_episode(st, MdpDims::of(m), 1.0, kInf);
  EXPECT_EQ(p.Q[(1 * m.S + 0) * m.A + 1], m.v_max);
  for (double q : p.Q) {
    EXPECT_GE(q, 0.0);
    EXPECT_LE(q, m.v_max);
  }
}

TEST(PlanEpisode, RejectsInconsistentCounts) {
  const MdpSpec m = small_mdp();
  AgentState st(m.S, m.A);
  st.set_counts(0, 0, 3, 1.0, {1, 1});
  try {
    plan_episode(st, MdpDims::of(m), 1.0, kInf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InconsistentCounts);
  }
}

TEST(PlanEpisode, SingleStateRecursionByHand) {
  const int H = 4, A = 3;
  const double v_max = 4.0;
  AgentState st(1, A);
  const std::int64_t n[] = {3, 7, 12};
  const double sums[] = {-0.6, 2.1, 5.5};
  for (int a = 0; a < A; ++a) st.set_counts(0, a, n[a], sums[a], {n[a]});
  const double c1 = 1.3, c2 = 0.9;
  const EpisodePlan p = plan_episode(st, MdpDims{1, A, H, v_max}, c1, c2);
  double v = 0.0;
  for (int h = H - 1; h >= 0; --h) {
    double best = -1;
    for (int a = 0; a < A; ++a) {
      const double nd = static_cast<double>(n[a]);
      const double b = std::min(c1 / nd, c2 / std::sqrt(nd));
      const double q = std::min(std::max(sums[a] / nd + v, 0.0) + b, v_max);
      EXPECT_NEAR(p.Q[h * A + a], q, 1e-12);
      best = std::max(best, q);
    }
    v = best;
    EXPECT_NEAR(p.V[h], v, 1e-12);
    EXPECT_EQ(p.Q[h * A + p.pi[h]], p.V[h]);
  }
}

TEST(RunEpisode, DeterministicInstanceFollowsPlan) {
  MdpSpec m;
  m.S = 2;
  m.A = 2;
  m.H = 3;
  m.v_max = 3.0;
  m.P = {0, 1, 1, 0, 1, 0, 0, 1};
  m.rewards = {RewardModel::degenerate(1.0), RewardModel::degenerate(0.0), RewardModel::degenerate(0.2),
               RewardModel::degenerate(0.9)};
  m = build_mdp(m);
  const ValueTables vt = optimal_values(m);
  InstanceDims d{m.S, m.A, m.H, m.v_max, 50, 0, 0};
  EqoAgent agent(m, vt, make_schedule("constant", Json{{"c1", 0.01}, {"c2", "inf"}}, d));
  Rng rng(1);
  double cumulative = 0.0, independent = 0.0;
  for (int k = 1; k <= 50; ++k) {
    const EpisodeTrace tr = agent.run_episode(rng);
    ASSERT_EQ(tr.steps.size(), 3u);
    int s = tr.initial_state;
    for (const auto& step : tr.steps) {
      EXPECT_EQ(step.s, s);
      EXPECT_EQ(step.a, agent.last_plan().pi[step.h * m.S + s]);
      EXPECT_EQ(step.reward, m.mean_reward(step.h, s, step.a));
      EXPECT_EQ(step.next_state, step.a == 0 ? 1 - s : s);
      s = step.next_state;
    }
    EXPECT_GE(tr.regret, -1e-9);
    bool optimal = true;
    for (std::size_t i = 0; i < vt.pi_star.size(); ++i)
      if (agent.last_plan().pi[i] != vt.pi_star[i]) optimal = false;
    if (optimal) EXPECT_EQ(tr.regret, 0.0);
    const auto v = policy_value(m, agent.last_plan().pi);
    EXPECT_NEAR(tr.regret, vt.v(0, tr.initial_state) - v[tr.initial_state], 1e-12);
    cumulative += tr.regret;
    independent += vt.v(0, tr.initial_state) - trajectory_value(m, agent.last_plan().pi, 0, tr.initial_state);
  }
  EXPECT_NEAR(cumulative, independent, 1e-9);
}

TEST(RunEpisode, StatisticsMatchRecount) {
  std::mt19937_64 g(5);
  const MdpSpec m = random_bounded_mdp(g, 3, 2, 3);
  const ValueTables vt = optimal_values(m);
  InstanceDims d{m.S, m.A, m.H, m.v_max, 300, 0, 0};
  EqoAgent agent(m, vt, make_schedule("constant", Json{{"c1", 0.5}, {"c2", 1.0}}, d));
  Rng rng(8);
  AgentState recount(m.S, m.A);
  for (int k = 0; k < 300; ++k) {
    const EpisodeTrace tr = agent.run_episode(rng);
    for (const auto& t : tr.steps) recount.record(t.s, t.a, t.reward, t.next_state);
    for (int s = 0; s < m.S; ++s)
      for (int a = 0; a < m.A; ++a) {
        ASSERT_EQ(agent.state().count(s, a), recount.count(s, a));
        ASSERT_EQ(agent.state().reward_sum(s, a), recount.reward_sum(s, a));
        for (int n = 0; n < m.S; ++n) ASSERT_EQ(agent.state().transition_count(s, a, n), recount.transition_count(s, a, n));
      }
    for (double q : agent.last_plan().Q) {
      ASSERT_GE(q, 0.0);
      ASSERT_LE(q, m.v_max);
    }
    for (int h = 0; h < m.H; ++h)
      for (int s = 0; s < m.S; ++s) {
        const int a = agent.last_plan().pi[h * m.S + s];
        for (int b = 0; b < m.A; ++b) ASSERT_GE(agent.last_plan().Q[(h * m.S + s) * m.A + a], agent.last_plan().Q[(h * m.S + s) * m.A + b]);
      }
  }
  EXPECT_EQ(agent.state().episode(), 301);
  agent.state().check_consistent();
}

TEST(ParameterRecovery, OnlyFirstParameterMatchesReference) { expect_recovery(true); }
TEST(ParameterRecovery, OnlySecondParameterMatchesReference) { expect_recovery(false); }

TEST(Bandit, RoundRobinThenGreedy) {
  InstanceDims d{1, 3, 1, 1.0, 10, 0, 0};
  const BonusSchedule s = make_schedule("constant", Json{{"c1", 0.01}, {"c2", "inf"}}, d);
  BanditState st(3);
  for (int t = 1; t <= 3; ++t) EXPECT_EQ(st.select(s, t), t - 1);
  st.record(0, 1.0);
  st.record(1, 0.0);
  st.record(2, 0.0);
  EXPECT_EQ(st.select(s, 4), 0);
}

TEST(Bandit, TieBreaksToLowestIndex) {
  InstanceDims d{1, 2, 1, 1.0, 10, 0, 0};
  const BonusSchedule s = make_schedule("constant", Json{{"c1", 1.0}, {"c2", "inf"}}, d);
  BanditState st(2);
  st.record(0, 0.5);
  st.record(1, 0.5);
  EXPECT_EQ(st.select(s, 3), 0);
}

TEST(Bandit, OptimismUnderTightUcb) {
  const MdpSpec m = build_mdp(MdpSpec::bandit({RewardModel::gaussian(0.5, 1.0), RewardModel::gaussian(0.2, 1.0)}, 1.0));
  const int T = 2000, R = 2000, A = 2;
  InstanceDims d{1, A, 1, 1.0, T, 0, 0};
  const DeltaRule rule = DeltaRule::power(2);
  const BonusSchedule s = make_schedule("tight-ucb-c2", Json{{"sigma", 1.0}, {"delta_rule", "power"}, {"delta_param", 2.0}}, d);
  const double delta_small = 0.01;
  const std::int64_t tau = tau2_scan(rule, delta_small, T);
  int any_after_init = 0, any_after_tau = 0;
  for (int r = 0; r < R; ++r) {
    Rng rng(derive_seed(31, r));
    BanditState st(A);
    bool v1 = false, v2 = false;
    for (std::int64_t t = 1; t <= T; ++t) {
      if (t > A) {
        const double lcb_gap = st.reward_sum(0) / st.count(0) + s.c2_at(t).value() / std::sqrt(st.count(0)) - 0.5;
        if (lcb_gap < 0) {
          v1 = true;
          if (t > tau) v2 = true;
        }
      }
      bandit_step(st, m, s, t, rng);
    }
    any_after_init += v1;
    any_after_tau += v2;
  }
  const double d1 = rule.at(A + 1);
  EXPECT_LE(any_after_init / static_cast<double>(R), d1 + 3.0 * std::sqrt(d1 / R));
  EXPECT_LE(any_after_tau / static_cast<double>(R), delta_small + 3.0 * std::sqrt(delta_small / R));
}
