#include "eqolab/agent.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eqolab/error.hpp"

namespace eqolab {

ExtReal bonus(ExtReal c1, ExtReal c2, std::int64_t n) {
  if (n < 0) fail(ErrorKind::NegativeCount, "visit count " + std::to_string(n));
  if (n == 0) return ExtReal::infinity();
  const double nd = static_cast<double>(n);
  const ExtReal first = c1.is_infinite() ? c1 : ExtReal(c1.value() / nd);
  const ExtReal second = c2.is_infinite() ? c2 : ExtReal(c2.value() / std::sqrt(nd));
  return ext_min(first, second);
}

AgentState::AgentState(int S, int A)
    : S_(S),
      A_(A),
      counts_(static_cast<std::size_t>(S) * A, 0),
      reward_sums_(static_cast<std::size_t>(S) * A, 0.0),
      trans_(static_cast<std::size_t>(S) * A * S, 0) {}

void AgentState::record(int s, int a, double reward, int next) {
  const auto i = idx(s, a);
  counts_[i] += 1;
  reward_sums_[i] += reward;
  trans_[i * S_ + next] += 1;
}

void AgentState::set_counts(int s, int a, std::int64_t n, double reward_sum, const std::vector<std::int64_t>& next_counts) {
  if (static_cast<int>(next_counts.size()) != S_) fail(ErrorKind::InvalidArgument, "next-state counts need S entries");
  const auto i = idx(s, a);
  counts_[i] = n;
  reward_sums_[i] = reward_sum;
  std::copy(next_counts.begin(), next_counts.end(), trans_.begin() + static_cast<std::ptrdiff_t>(i * S_));
}

void AgentState::check_consistent() const {
  for (int s = 0; s < S_; ++s) {
    for (int a = 0; a < A_; ++a) {
      const auto i = idx(s, a);
      if (counts_[i] < 0) fail(ErrorKind::NegativeCount, "negative visit count");
      std::int64_t total = 0;
      for (int n = 0; n < S_; ++n) total += trans_[i * S_ + n];
      if (total != counts_[i]) {
        fail(ErrorKind::InconsistentCounts, "N(s,a) ≠ Σ N(s,a,s') at s=" + std::to_string(s) + ", a=" + std::to_string(a));
      }
    }
  }
}

void plan_episode_into(const AgentState& st, const MdpDims& d, ExtReal c1, ExtReal c2, EpisodePlan& out) {
  if (st.S() != d.S || st.A() != d.A) fail(ErrorKind::InvalidArgument, "agent state dimensions do not match the MDP");
  st.check_consistent();
  const std::size_t S = d.S;
  out.Q.assign(static_cast<std::size_t>(d.H) * S * d.A, 0.0);
  out.V.assign((d.H + 1) * S, 0.0);
  out.pi.assign(static_cast<std::size_t>(d.H) * S, 0);
  for (int h = d.H - 1; h >= 0; --h) {
    const double* v_next = out.V.data() + (h + 1) * S;
    for (int s = 0; s < d.S; ++s) {
      double best = -HUGE_VAL;
      int best_a = 0;
      for (int a = 0; a < d.A; ++a) {
        const std::int64_t n = st.count(s, a);
        double q = d.v_max;
        if (n > 0) {
          const double nd = static_cast<double>(n);
          double pv = 0.0;
          for (int t = 0; t < d.S; ++t) {
            const std::int64_t m = st.transition_count(s, a, t);
            if (m != 0) pv += static_cast<double>(m) * v_next[t];
          }
          const double mean = st.reward_sum(s, a) / nd + pv / nd;
          const ExtReal b = bonus(c1, c2, n);
          if (b.is_finite()) q = std::min(std::max(mean, 0.0) + b.value(), d.v_max);
        }
        out.Q[(static_cast<std::size_t>(h) * S + s) * d.A + a] = q;
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      out.V[h * S + s] = best;
      out.pi[h * S + s] = best_a;
    }
  }
}

EpisodePlan plan_episode(const AgentState& st, const MdpDims& d, ExtReal c1, ExtReal c2) {
  EpisodePlan out;
  plan_episode_into(st, d, c1, c2, out);
  return out;
}

EpisodePlan plan_episode(const AgentState& st, const MdpDims& d, const BonusSchedule& schedule) {
  if (st.episode() < 1) fail(ErrorKind::InvalidArgument, "episode index must be ≥ 1");
  return plan_episode(st, d, schedule.c1_at(st.episode()), schedule.c2_at(st.episode()));
}

EqoAgent::EqoAgent(const MdpSpec& mdp, const ValueTables& vt, BonusSchedule schedule)
    : mdp_(&mdp), vt_(&vt), schedule_(std::move(schedule)), state_(mdp.S, mdp.A) {
  trace_.steps.reserve(static_cast<std::size_t>(mdp.H));
  policy_v_.assign(static_cast<std::size_t>(mdp.S) * 2, 0.0);
}

const EpisodeTrace& EqoAgent::run_episode(Rng& rng) {
  const MdpSpec& m = *mdp_;
  const std::int64_t k = state_.episode();
  plan_episode_into(state_, MdpDims::of(m), schedule_.c1_at(k), schedule_.c2_at(k), plan_);

  const int s1 = m.initial_state(k);
  trace_.k = k;
  trace_.initial_state = s1;
  trace_.steps.clear();
  int s = s1;
  for (int h = 0; h < m.H; ++h) {
    const int a = plan_.pi[static_cast<std::size_t>(h) * m.S + s];
    const StepSample x = sample_step(m, h, s, a, rng);
    trace_.steps.push_back({h, s, a, x.reward, x.next_state});
    s = x.next_state;
  }

  // Exact value of π^k at s₁ by backward induction with two rolling rows.
  const std::size_t S = m.S;
  double* next = policy_v_.data();
  double* cur = policy_v_.data() + S;
  std::fill(next, next + S, 0.0);
  for (int h = m.H - 1; h >= 0; --h) {
    for (int st = 0; st < m.S; ++st) {
      const int a = plan_.pi[static_cast<std::size_t>(h) * S + st];
      const double* p = m.row(st, a);
      double q = m.mean_reward(h, st, a);
      for (int n = 0; n < m.S; ++n) q += p[n] * next[n];
      cur[st] = q;
    }
    std::swap(cur, next);
  }
  trace_.optimal = vt_->v(0, s1);
  trace_.estimate = plan_.V[static_cast<std::size_t>(s1)];
  trace_.regret = trace_.optimal - next[s1];

  for (const Transition& t : trace_.steps) state_.record(t.s, t.a, t.reward, t.next_state);
  state_.set_episode(k + 1);
  return trace_;
}

EpisodeTrace run_episode(const MdpSpec& mdp, const ValueTables& vt, AgentState& state,
                         const BonusSchedule& schedule, Rng& rng) {
  EqoAgent agent(mdp, vt, schedule);
  agent.state() = state;
  EpisodeTrace trace = agent.run_episode(rng);
  state = agent.state();
  return trace;
}

BanditState::BanditState(int A) : counts_(static_cast<std::size_t>(A), 0), sums_(static_cast<std::size_t>(A), 0.0) {}

void BanditState::record(int a, double reward) {
  counts_[static_cast<std::size_t>(a)] += 1;
  sums_[static_cast<std::size_t>(a)] += reward;
}

int BanditState::select(const BonusSchedule& schedule, std::int64_t t) const {
  if (t < 1) fail(ErrorKind::InvalidArgument, "bandit round must be ≥ 1");
  if (t <= A()) return static_cast<int>(t - 1);
  const ExtReal c1 = schedule.c1_at(t);
  const ExtReal c2 = schedule.c2_at(t);
  double best = -HUGE_VAL;
  int best_a = 0;
  for (int a = 0; a < A(); ++a) {
    const std::int64_t n = count(a);
    const ExtReal b = bonus(c1, c2, n);
    const double index = b.is_infinite() ? HUGE_VAL : reward_sum(a) / static_cast<double>(n) + b.value();
    if (index > best) {
      best = index;
      best_a = a;
    }
  }
  return best_a;
}

BanditStepResult bandit_step(BanditState& state, const MdpSpec& bandit, const BonusSchedule& schedule,
                             std::int64_t t, Rng& rng) {
  BanditStepResult r;
  r.arm = state.select(schedule, t);
  r.reward = bandit.reward(0, 0, r.arm).sample(rng);
  state.record(r.arm, r.reward);
  return r;
}

}  // namespace eqolab
