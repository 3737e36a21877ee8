#include <gtest/gtest.h>

#include <cmath>

#include "eqolab/bounds.hpp"
#include "eqolab/error.hpp"
#include "eqolab/harness.hpp"
#include "eqolab/mdp_json.hpp"

using namespace eqolab;

namespace {

const std::string kSmallMdp = std::string(EQOLAB_SOURCE_DIR) + "/fixtures/small_mdp.json";

struct RlSetup {
  Instance inst;
  RlBoundInputs in;
  LambdaIota li(double delta) const {
    return lambda_iota(inst.schedule.c1_values(), delta, inst.proxies.w_diff_star, inst.proxies.v_alpha, in.lf);
  }
};

RlSetup rl_setup(const MdpSpec& m, const std::string& schedule, const Json& params, std::int64_t K) {
  RlSetup s{build_instance(m, schedule, params, K), {}};
  s.in.schedule = &s.inst.schedule;
  s.in.dims = MdpDims::of(s.inst.mdp);
  s.in.proxies = &s.inst.proxies;
  s.in.lf = s.inst.dims.log_factors();
  return s;
}

// Rebinds the pointers after a copy or move.
void rebind(RlSetup& s) {
  s.in.schedule = &s.inst.schedule;
  s.in.proxies = &s.inst.proxies;
}

MdpSpec gaussian_two_state(double v_max) {
  MdpSpec m = load_mdp(kSmallMdp);
  for (auto& r : m.rewards) r = RewardModel::gaussian(r.mean, 0.04);
  m.v_max = v_max;
  return build_mdp(m);
}

// E[√(a + X)] for X ~ Exp(1) by composite Simpson on [0, 80].
double expected_sqrt_shifted_exponential(double a) {
  const int n = 200000;
  const double hi = 80.0, h = hi / n;
  auto f = [&](double x) { return std::sqrt(a + x) * std::exp(-x); };
  double s = f(0) + f(hi);
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST(BanditBound, ConstantC1Example) {
  const double lg = std::log(40.0);
  const BoundPoint p = bandit_bound_thm1(200, 0.1, 10, 1, {0.0, 0.3});
  EXPECT_NEAR(p.total, 10 * lg + 10 + 2 * std::sqrt(400 * lg) + 0.3, 1e-10);
  EXPECT_NEAR(p.component("variance_term"), 10 * lg, 1e-12);
}

TEST(BanditBound, DoublingFirstParameter) {
  const BoundPoint a = bandit_bound_thm1(500, 0.05, 3, 1.5, {0.0, 0.2, 0.4});
  const BoundPoint b = bandit_bound_thm1(500, 0.05, 6, 1.5, {0.0, 0.2, 0.4});
  EXPECT_DOUBLE_EQ(b.component("variance_term"), a.component("variance_term") / 2);
  EXPECT_DOUBLE_EQ(b.component("bonus_term"), a.component("bonus_term") * 2);
}

TEST(BanditBound, RejectsDeltaAboveOne) {
  EXPECT_THROW(bandit_bound_thm1(200, 4.0, 10, 1, {0.0, 0.3}), Error);
}

TEST(BanditBound, DisplayEqualsStatementFormWithFullBonusCount) {
  // With c₁ = σ√(T/A) the display equals the statement form with c₁A in place of c₁(A−1).
  for (double A : {2.0, 3.0, 5.0}) {
    for (double delta : {1.0, 0.3, 1e-3, 1e-8}) {
      const double T = 2000, sigma = 1.7;
      std::vector<double> gaps(static_cast<std::size_t>(A), 0.1);
      gaps[0] = 0.0;
      const double c1 = sigma * std::sqrt(T / A);
      const BoundPoint st = bandit_bound_thm1(T, delta, c1, sigma, gaps, BanditBoundForm::Statement);
      const double display = bandit_bound_minimax_display(T, delta, sigma, gaps);
      EXPECT_NEAR(display, st.total + c1, 1e-9 * display);
    }
  }
}

TEST(BanditBound, IntegralsAgainstExpectedBound) {
  const double T = 2000, sigma = 1.0, A = 2;
  const std::vector<double> gaps{0.0, 0.3};
  const double c1 = sigma * std::sqrt(T / A);
  const auto grid = log_delta_grid();
  BoundCurve formal, statement, display;
  for (double d : grid) {
    formal.points.push_back(bandit_bound_thm1(T, d, c1, sigma, gaps, BanditBoundForm::Formal));
    statement.points.push_back(bandit_bound_thm1(T, d, c1, sigma, gaps, BanditBoundForm::Statement));
    BoundPoint p;
    p.delta = d;
    p.add("display", bandit_bound_minimax_display(T, d, sigma, gaps));
    p.finish();
    display.points.push_back(p);
  }
  const double root = sigma * std::sqrt(A * T);
  const double es = expected_sqrt_shifted_exponential(std::log(4.0));
  const double exact_formal = 0.5 * root * (std::log(4.0) + 1) + c1 * (A - 1) + 2 * root * es + 0.3;
  const double exact_statement = 0.5 * root * (std::log(4.0) + 1) + c1 * (A - 1) + root * es + 0.3;
  const auto f = expected_bound_via_integral(formal);
  const auto s = expected_bound_via_integral(statement);
  const auto dsp = expected_bound_via_integral(display);
  EXPECT_NEAR(f.value, exact_formal, 1e-3 * exact_formal);
  EXPECT_NEAR(s.value, exact_statement, 1e-3 * exact_statement);
  const double expected_bound = bandit_expected_bound(T, sigma, gaps);
  EXPECT_DOUBLE_EQ(expected_bound, 4 * root + 0.3);
  EXPECT_LE(s.value, expected_bound);
  EXPECT_LE(dsp.value, expected_bound);
  // The factor-2 deviation term pushes the formal curve's integral above 4σ√(AT).
  EXPECT_GT(f.value, expected_bound);
}

TEST(BanditBound, TightUcbBoundStructure) {
  const DeltaRule rule = DeltaRule::power(2);
  const std::vector<double> gaps{0.0, 0.3};
  const BoundPoint p = bandit_bound_thm2(2000, 1e-4, rule, 1.0, gaps);
  EXPECT_EQ(p.component("tau2_term"), 99.0);
  const double c2 = tight_ucb(2000, rule.at(2000), 1.0, 2);
  const double u = tight_ucb(2000, 1e-4, 1.0, 2);
  EXPECT_NEAR(p.component("ucb_term"), (c2 + u) * (c2 + u) / 0.3, 1e-9);
  const BoundPoint top = bandit_bound_thm2(2000, 1.0, rule, 1.0, gaps);
  EXPECT_EQ(top.component("tau2_term"), 0.0);
  EXPECT_EQ(bandit_bound_thm2(50, 1e-4, rule, 1.0, gaps).component("tau2_term"), 50.0);
}

TEST(BanditBound, MonotoneInDeltaAndHorizon) {
  const auto grid = log_delta_grid();
  const std::vector<double> gaps{0.0, 0.3};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_GE(bandit_bound_thm1(2000, grid[i - 1], 31.6, 1, gaps).total, bandit_bound_thm1(2000, grid[i], 31.6, 1, gaps).total);
    EXPECT_GE(bandit_bound_thm2(2000, grid[i - 1], DeltaRule::power(2), 1, gaps).total,
              bandit_bound_thm2(2000, grid[i], DeltaRule::power(2), 1, gaps).total);
  }
  for (std::int64_t T = 10; T < 5000; T *= 2) {
    EXPECT_LE(bandit_bound_thm1(T, 0.1, 5, 1, gaps).total, bandit_bound_thm1(2 * T, 0.1, 5, 1, gaps).total);
    EXPECT_LE(bandit_bound_thm2(T, 0.1, DeltaRule::power(2), 1, gaps).total,
              bandit_bound_thm2(2 * T, 0.1, DeltaRule::power(2), 1, gaps).total);
  }
}

TEST(Kappa, ConstantFirstParameterAboveAndBelowThreshold) {
  const MdpSpec m = load_mdp(kSmallMdp);
  const std::int64_t K = 300;
  for (double delta : {1.0, 0.1}) {
    RlSetup probe = rl_setup(m, "constant", Json{{"c1", 1.0}, {"c2", "inf"}}, K);
    const double thr = probe.li(delta).threshold;
    RlSetup above = rl_setup(m, "constant", Json{{"c1", 1.5 * thr}, {"c2", "inf"}}, K);
    rebind(above);
    const auto ka = kappa(above.inst.schedule, delta, above.inst.proxies, above.li(delta), above.in.lf, K);
    EXPECT_EQ(ka.k, 0);
    EXPECT_FALSE(ka.saturated);
    RlSetup below = rl_setup(m, "constant", Json{{"c1", 0.5 * thr}, {"c2", "inf"}}, K);
    rebind(below);
    const auto kb = kappa(below.inst.schedule, delta, below.inst.proxies, below.li(delta), below.in.lf, K);
    EXPECT_EQ(kb.k, K);
    EXPECT_TRUE(kb.saturated);
  }
}

TEST(Kappa, PowerScheduleMatchesLinearScan) {
  const MdpSpec m = load_mdp(kSmallMdp);
  const std::int64_t K = 20000;
  RlSetup s = rl_setup(m, "power", Json{{"c1", 1.0}, {"c2", 1.0}, {"alpha", 0.5}, {"beta", 0.5}}, K);
  rebind(s);
  const double delta = 0.01;
  const LambdaIota li = s.li(delta);
  const auto& px = s.inst.proxies;
  const LogFactors& lf = s.in.lf;
  std::int64_t scan = 0;
  for (std::int64_t k = 1; k <= K; ++k) {
    const double c1 = s.inst.schedule.c1_at(k).value();
    const double c2 = s.inst.schedule.c2_at(k).value();
    const bool first = c1 < std::max(2.0 * std::sqrt(13.0 * px.w_diff_star), 2.0 * px.v_alpha) * lf.l1(1, delta);
    const bool second = c2 < (px.sigma_max + 6.0 * px.w_diff_star * lf.l1(li.iota_at(k), delta) / c1) * std::sqrt(lf.l2(k, delta));
    if (first || second) scan = k;
  }
  const auto kp = kappa(s.inst.schedule, delta, px, li, lf, K);
  EXPECT_EQ(kp.k, scan);
}

TEST(Kappa, MonotoneInDeltaAndGap) {
  const MdpSpec m = load_mdp(kSmallMdp);
  const std::int64_t K = 20000;
  RlSetup s = rl_setup(m, "power", Json{{"c1", 1.0}, {"c2", 1.0}, {"alpha", 0.5}, {"beta", 0.5}}, K);
  rebind(s);
  std::int64_t prev = 0;
  for (double delta : {1.0, 0.3, 0.1, 0.01, 1e-4, 1e-8}) {
    const LambdaIota li = s.li(delta);
    const auto k = kappa(s.inst.schedule, delta, s.inst.proxies, li, s.in.lf, K).k;
    EXPECT_GE(k, prev);
    prev = k;
    std::int64_t prev_gap = K + 1;
    for (double gap : {0.01, 0.05, 0.1, 0.5, 1.0, 10.0}) {
      const auto kg = kappa_gap(s.inst.schedule, gap, delta, s.inst.proxies.w_star, li, s.in.lf, K);
      EXPECT_LE(kg.k, prev_gap);
      std::int64_t scan = 0;
      for (std::int64_t j = 1; j <= K; ++j)
        if (s.inst.schedule.c1_at(j).value() < 36.0 * s.inst.proxies.w_star * s.in.lf.l1(li.iota_at(j), delta) / gap) scan = j;
      EXPECT_EQ(kg.k, scan);
      prev_gap = kg.k;
    }
  }
  const LambdaIota li = s.li(0.1);
  EXPECT_THROW(kappa_gap(s.inst.schedule, 0.0, 0.1, 1.0, li, s.in.lf, K), Error);
}

TEST(RlBound, ConstantScheduleSumIsExact) {
  const MdpSpec m = gaussian_two_state(4.0);
  const std::int64_t K = 500;
  RlSetup probe = rl_setup(m, "constant", Json{{"c1", 1.0}, {"c2", "inf"}}, K);
  const double delta = 0.1;
  const double c = 2.0 * probe.li(delta).threshold + 1.0;
  RlSetup s = rl_setup(m, "constant", Json{{"c1", c}, {"c2", "inf"}}, K);
  rebind(s);
  const LambdaIota li = s.li(delta);
  const BoundPoint p = rl_bound_gap_independent(K, delta, s.in, li);
  EXPECT_EQ(p.component("kappa_term"), 0.0);
  EXPECT_NEAR(p.component("c1_sum"), K * 18.0 * s.inst.proxies.w_star * s.in.lf.l1(1, delta) / c, 1e-9 * p.component("c1_sum"));
  EXPECT_NEAR(p.component("min_term"), 16.0 * c * 4 * std::log(K * 2.0), 1e-9);
}

TEST(RlBound, SaturatedKappaGivesLinearTerm) {
  const MdpSpec m = load_mdp(kSmallMdp);
  const std::int64_t K = 200;
  RlSetup s = rl_setup(m, "constant", Json{{"c1", 0.01}, {"c2", "inf"}}, K);
  rebind(s);
  const BoundPoint p = rl_bound_gap_independent(K, 0.1, s.in, s.li(0.1));
  EXPECT_EQ(p.component("kappa_term"), m.v_max * K);
  EXPECT_EQ(p.component("c1_sum"), 0.0);
}

TEST(RlBound, SqrtGrowthTermByTerm) {
  const MdpSpec m = load_mdp(kSmallMdp);
  const std::int64_t K = 10000;
  const double delta = 0.1;
  RlSetup s = rl_setup(m, "sqrt-growth", Json{{"c1", 2.1213203435596424}}, K);
  rebind(s);
  const LambdaIota li = s.li(delta);
  const BoundPoint p = rl_bound_gap_independent(K, delta, s.in, li);
  // Independent evaluation.
  const auto& px = s.inst.proxies;
  const double H = 2, S = 2, A = 2, V = 1;
  auto l1 = [&](double i, double d) { return std::log(32 * H * S * A * i * i / d); };
  auto l2 = [&](double k, double d) {
    const double in = std::log(std::exp(2.0) * k * H);
    return std::log(32 * H * S * A * in * in / d);
  };
  std::int64_t kap = 0;
  const double thr = std::max(2 * std::sqrt(13 * px.w_diff_star), 2 * px.v_alpha) * l1(1, delta);
  for (std::int64_t k = 1; k <= K; ++k)
    if (s.inst.schedule.c1_at(k).value() < thr) kap = k;
  double sum = 0.0;
  for (std::int64_t k = K; k > kap; --k) sum += l1(li.iota_at(k), delta) / s.inst.schedule.c1_at(k).value();
  const double expected = V * kap + 18 * px.w_star * sum + 16 * s.inst.schedule.c1_at(K).value() * S * A * std::log(K * H) +
                          72 * V * S * S * A * l2(K, delta) * std::log(2 * K * H);
  EXPECT_NEAR(p.total, expected, 1e-9 * expected);
}

TEST(RlBound, MonotoneInDeltaAndHorizon) {
  const MdpSpec m = load_mdp(kSmallMdp);
  const std::int64_t K = 4000;
  RlSetup s = rl_setup(m, "sqrt-growth", Json{{"c1", 2.0}}, K);
  rebind(s);
  double prev = 0.0;
  for (double delta : {1.0, 0.5, 0.1, 0.01, 1e-4, 1e-8}) {
    const LambdaIota li = s.li(delta);
    const double v = rl_bound_gap_independent(K, delta, s.in, li).total;
    EXPECT_GE(v, prev);
    prev = v;
    const double dep = rl_bound_gap_dependent(K, delta, s.in, li, s.inst.gaps, s.inst.vt).total;
    double prev_k = 0.0;
    for (std::int64_t k = 250; k <= K; k *= 2) {
      const double at_k = rl_bound_gap_independent(k, delta, s.in, li).total;
      EXPECT_GE(at_k, prev_k);
      prev_k = at_k;
    }
    EXPECT_GT(dep, 0.0);
  }
}

TEST(GapBound, InfiniteFirstParameterUsesSecondBranch) {
  const MdpSpec m = load_mdp(kSmallMdp);
  const std::int64_t K = 1000;
  RlSetup s = rl_setup(m, "constant", Json{{"c1", "inf"}, {"c2", 3.0}}, K);
  rebind(s);
  const double delta = 0.1;
  const BoundPoint p = rl_bound_gap_dependent(K, delta, s.in, s.li(delta), s.inst.gaps, s.inst.vt);
  double expected = 0.0;
  for (int st = 0; st < 2; ++st)
    for (int a = 0; a < 2; ++a) {
      const double g = s.inst.gaps.per_pair_at(st, a, 2);
      if (std::isfinite(g)) expected += 2048.0 * 9.0 / g;
    }
  EXPECT_NEAR(p.component("gap_sum"), expected, 1e-9 * expected);
  EXPECT_EQ(p.component("c1_sum"), 0.0);
}

TEST(GapBound, LogBranchClampsAtZero) {
  const MdpSpec m = load_mdp(kSmallMdp);
  const std::int64_t K = 100;
  RlSetup s = rl_setup(m, "constant", Json{{"c1", 0.001}, {"c2", "inf"}}, K);
  rebind(s);
  EffectiveGaps huge = s.inst.gaps;
  for (auto& g : huge.per_pair) g = 1.0;
  const BoundPoint p = rl_bound_gap_dependent(K, 0.1, s.in, s.li(0.1), huge, s.inst.vt);
  EXPECT_EQ(p.component("gap_sum"), 0.0);
  for (const auto& c : p.components) EXPECT_GE(c.value, 0.0);
  EffectiveGaps zero = s.inst.gaps;
  zero.per_pair[0] = 0.0;
  try {
    rl_bound_gap_dependent(K, 0.1, s.in, s.li(0.1), zero, s.inst.vt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonPositiveEffectiveGap);
  }
}

TEST(GapBound, FixtureTermByTerm) {
  const MdpSpec m = load_mdp(kSmallMdp);
  const std::int64_t K = 5000;
  const double delta = 0.05;
  RlSetup s = rl_setup(m, "eqo-plus-hoeffding", Json{{"c1", 2.0}, {"c2", 2.0}}, K);
  rebind(s);
  const LambdaIota li = s.li(delta);
  const BoundPoint p = rl_bound_gap_dependent(K, delta, s.in, li, s.inst.gaps, s.inst.vt);
  const auto& px = s.inst.proxies;
  const double c1K = s.inst.schedule.c1_at(K).value(), c2K = s.inst.schedule.c2_at(K).value();
  double pairs = 0.0;
  for (double g : s.inst.gaps.per_pair) {
    if (!std::isfinite(g)) continue;
    pairs += std::min(2048 * c2K * c2K / g, 64 * c1K * std::max(0.0, std::log(32 * c1K / g)));
  }
  EXPECT_NEAR(p.component("gap_sum"), pairs, 1e-9 * pairs);
  const std::int64_t kap = kappa(s.inst.schedule, delta, px, li, s.in.lf, K).k;
  std::int64_t kg = 0;
  for (std::int64_t k = 1; k <= K; ++k)
    if (s.inst.schedule.c1_at(k).value() < 36 * px.w_star * s.in.lf.l1(li.iota_at(k), delta) / *s.inst.gaps.v_gap) kg = k;
  double sum = 0.0;
  for (std::int64_t k = kap + 1; k <= kg; ++k) sum += s.in.lf.l1(li.iota_at(k), delta) / s.inst.schedule.c1_at(k).value();
  EXPECT_NEAR(p.component("c1_sum"), 144 * px.w_star * sum, 1e-9 * (1 + sum));
  const BoundPoint main = rl_bound_gap_dependent(K, delta, s.in, li, s.inst.gaps, s.inst.vt, GapBoundVariant::MainText);
  EXPECT_EQ(main.component("lower_order"), p.component("lower_order"));
}

TEST(Corollary, PowerWorstCaseHeadTermExponent) {
  const MdpSpec m = load_mdp(kSmallMdp);
  const std::int64_t K = 1000;
  RlSetup s = rl_setup(m, "power", Json{{"c1", 1.0}, {"c2", 3.0}, {"alpha", 0.5}, {"beta", 0.5}}, K);
  rebind(s);
  CorollaryParams cp;
  cp.c1 = 1.0;
  cp.c2 = 3.0;
  const double delta = 0.1;
  const BoundPoint p = corollary_bound(CorollaryForm::PowerWorstCase, cp, K, delta, s.in, s.li(delta), s.inst.gaps);
  const double l2 = s.in.lf.l2(K, delta);
  EXPECT_NEAR(p.component("kappa2_term"), std::pow(2.0 / 3.0, 4) * l2 * l2, 1e-12);
  cp.beta = 0.25;
  const BoundPoint q = corollary_bound(CorollaryForm::PowerWorstCase, cp, K, delta, s.in, s.li(delta), s.inst.gaps);
  EXPECT_NEAR(q.component("kappa2_term"), std::pow(2.0 / 3.0, 8) * std::pow(l2, 4), 1e-9);
}

TEST(Corollary, SqrtGrowthAtUnitDelta) {
  const MdpSpec m = load_mdp(kSmallMdp);
  const std::int64_t K = 3000;
  const double c1 = 2.0;
  RlSetup s = rl_setup(m, "sqrt-growth", Json{{"c1", c1}}, K);
  rebind(s);
  CorollaryParams cp;
  cp.c1 = c1;
  const BoundPoint p = corollary_bound(CorollaryForm::SqrtGrowth, cp, K, 1.0, s.in, s.li(1.0), s.inst.gaps);
  const LambdaIota* unit = s.inst.schedule.unit_lambda_iota();
  const double lead = std::sqrt(K * 4.0 * s.in.lf.l1(unit->iota_at(K), 1.0) * std::log(K * 2.0));
  EXPECT_NEAR(p.component("leading_term"), (36.0 / c1 + 8.0 * c1) * lead, 1e-9 * lead);
}

TEST(Corollary, ParameterConstraints) {
  const MdpSpec m = load_mdp(kSmallMdp);
  const std::int64_t K = 100;
  RlSetup s = rl_setup(m, "eqo-plus-hoeffding", Json{{"c1", 2.0}, {"c2", 2.0}}, K);
  rebind(s);
  auto kind = [&](CorollaryForm f, CorollaryParams cp) {
    try {
      corollary_bound(f, cp, K, 0.1, s.in, s.li(0.1), s.inst.gaps);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;
  };
  CorollaryParams cp;
  cp.c2 = 1.5;
  EXPECT_EQ(kind(CorollaryForm::EqoPlusHoeffding, cp), ErrorKind::ParameterConstraintViolation);
  cp.c2 = 2.0;
  // Bounded rewards give σ_max² ≥ 4V_max², so the variance precondition fails.
  EXPECT_EQ(kind(CorollaryForm::EqoPlusHoeffding, cp), ErrorKind::ParameterConstraintViolation);
  cp.alpha = 0.3;
  EXPECT_EQ(kind(CorollaryForm::PowerWorstCase, cp), ErrorKind::ParameterConstraintViolation);
  cp.alpha = 0.5;
  cp.beta = 0.75;
  EXPECT_EQ(kind(CorollaryForm::PowerInstance, cp), ErrorKind::ParameterConstraintViolation);
}

TEST(Corollary, EqoPlusHoeffdingOnSlackGaussianInstance) {
  const MdpSpec m = gaussian_two_state(4.0);
  const std::int64_t K = 2000;
  RlSetup s = rl_setup(m, "eqo-plus-hoeffding", Json{{"c1", 2.0}, {"c2", 2.0}}, K);
  rebind(s);
  // The gaussian row has V_α = V_max, so the precondition holds with equality.
  ASSERT_NEAR(s.inst.proxies.sigma_max * s.inst.proxies.sigma_max, 2.0 * m.v_max * m.v_max, 1e-12);
  CorollaryParams cp;
  cp.c1 = 2.0;
  cp.c2 = 2.0;
  const double delta = 0.01;
  const LambdaIota li = s.li(delta);
  const BoundPoint p = corollary_bound(CorollaryForm::EqoPlusHoeffding, cp, K, delta, s.in, li, s.inst.gaps);
  std::int64_t k2 = 0;
  for (std::int64_t k = 1; k <= K; ++k)
    if (std::log(k) - 2 * std::log(2 + std::log(2.0 * k)) < 4.0 / 4.0 * std::log(1 / delta)) k2 = k;
  EXPECT_EQ(kappa2_explicit(K, 2, 2.0, 4.0, delta), k2);
  EXPECT_GE(p.component("kappa_residual"), m.v_max * k2);
  const double l2 = s.in.lf.l2(K, delta);
  EXPECT_NEAR(p.component("lower_order"), 288 * 4.0 * 8 * l2 * std::log(2.0 * K * 2), 1e-9 * p.component("lower_order"));
  double pairs = 0.0;
  const double c1K = s.inst.schedule.c1_at(K).value(), c2K = s.inst.schedule.c2_at(K).value();
  for (double g : s.inst.gaps.per_pair)
    if (std::isfinite(g)) pairs += std::min(2048 * c2K * c2K / g, 64 * c1K * std::max(0.0, std::log(32 * c1K / g)));
  EXPECT_NEAR(p.component("gap_sum"), pairs, 1e-9 * pairs);
  for (const auto& c : p.components) EXPECT_GE(c.value, 0.0);
}

TEST(Integral, ClosedFormCurves) {
  const auto grid = log_delta_grid();
  ASSERT_EQ(grid.size(), 200u);
  EXPECT_EQ(grid.front(), 1e-8);
  EXPECT_EQ(grid.back(), 1.0);
  std::vector<double> c(grid.size(), 3.5), lg, lin;
  for (double d : grid) {
    lg.push_back(std::log(1.0 / d));
    lin.push_back(2.0 + 3.0 * std::log(1.0 / d));
  }
  EXPECT_NEAR(integrate_over_delta(grid, c).value, 3.5, 1e-5);
  EXPECT_NEAR(integrate_over_delta(grid, lg).value, 1.0, 1e-4);
  EXPECT_NEAR(integrate_over_delta(grid, lin).value, 5.0, 5e-4);
}

TEST(Integral, CoarseGridRejected) {
  const std::vector<double> d{0.01, 0.1, 1.0};
  std::vector<double> v;
  for (double x : d) v.push_back(std::log(1.0 / x) * std::log(1.0 / x) * 10);
  try {
    integrate_over_delta(d, v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::GridTooCoarse);
  }
}

TEST(BoundConstants, HashIsStable) {
  EXPECT_EQ(bound_constants_hash(), bound_constants_hash());
  EXPECT_EQ(bound_constants()["gap_dependent"]["c2_branch"].get<int>(), 2048);
}
