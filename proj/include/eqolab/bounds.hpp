#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eqolab/agent.hpp"
#include "eqolab/json_fwd.hpp"
#include "eqolab/log_factors.hpp"
#include "eqolab/mdp.hpp"
#include "eqolab/schedule.hpp"
#include "eqolab/ucb.hpp"

namespace eqolab {

struct KappaResult {
  std::int64_t k = 0;
  bool saturated = false;  // the predicate still holds at k_max
};

// Largest k ≤ k_max at which the bonus parameters are still too small for the bound to engage.
KappaResult kappa(const BonusSchedule& schedule, double delta, const VarianceProxyTables& proxies,
                  const LambdaIota& li, const LogFactors& lf, std::int64_t k_max);
bool kappa_predicate(const BonusSchedule& schedule, std::int64_t k, double delta, const VarianceProxyTables& proxies,
                     const LambdaIota& li, const LogFactors& lf);

// max{k ≤ k_max : c₁,k < 36·w_star·ℓ₁(ι_k,δ)/gap}.
KappaResult kappa_gap(const BonusSchedule& schedule, double gap, double delta, double w_star, const LambdaIota& li,
                      const LogFactors& lf, std::int64_t k_max);

struct BoundComponent {
  std::string name;
  double value = 0.0;
};

struct BoundPoint {
  double delta = 1.0;
  double total = 0.0;
  std::vector<BoundComponent> components;
  bool vacuous = false;  // total is +∞

  double component(const std::string& name) const;
  void add(std::string name, double value);
  void finish();
};

struct BoundCurve {
  std::string theorem;
  Json parameters = Json::object();
  std::int64_t horizon = 0;  // K episodes or T rounds
  std::vector<BoundPoint> points;
};

// Log-spaced grid from lo to hi inclusive, ascending.
std::vector<double> log_delta_grid(double lo = 1e-8, double hi = 1.0, int points = 200);

// Bandit bound with constant c₁. Formal: σ²T·log(4/δ)/(2c₁) + c₁(A−1) + 2σ√(AT·log(4/δ)) + Σgap.
// Statement: the same with σ√(AT·log(4/δ)). Simplified: σ²T·log(4/δ)/c₁ + 1.5·c₁A + Σgap.
enum class BanditBoundForm { Formal, Statement, Simplified };
BoundPoint bandit_bound_thm1(double T, double delta, double c1, double sigma, const std::vector<double>& gaps,
                             BanditBoundForm form = BanditBoundForm::Formal);
// ½σ√(AT)·log(4e²/δ) + σ√(AT·log(4/δ)) + Σgap
double bandit_bound_minimax_display(double T, double delta, double sigma, const std::vector<double>& gaps);
// 4σ√(AT) + Σgap
double bandit_expected_bound(double T, double sigma, const std::vector<double>& gaps);

// τ₂(δ) ∧ T + Σgap + Σ_{gap≠0} (c₂,T + u(T,δ))²/gap with c₂,t = u(t, δ_t).
BoundPoint bandit_bound_thm2(std::int64_t T, double delta, const DeltaRule& rule, double sigma,
                             const std::vector<double>& gaps);

struct RlBoundInputs {
  const BonusSchedule* schedule = nullptr;
  MdpDims dims;
  const VarianceProxyTables* proxies = nullptr;
  LogFactors lf;
};

// V(κ∧K) + 18𝕎*·Σ_{k>κ} ℓ₁(ι_k,δ)/c₁,k + min(16c₁,K·SA·log KH, 16√2·c₂,K·√(HSAK)) + 72V·S²A·ℓ₂(K,δ)·log 2KH
BoundPoint rl_bound_gap_independent(std::int64_t K, double delta, const RlBoundInputs& in, const LambdaIota& li);

enum class GapBoundVariant { EffectiveGap, MainText };
BoundPoint rl_bound_gap_dependent(std::int64_t K, double delta, const RlBoundInputs& in, const LambdaIota& li,
                                  const EffectiveGaps& gaps, const ValueTables& vt,
                                  GapBoundVariant variant = GapBoundVariant::EffectiveGap);

enum class CorollaryForm { SqrtGrowth, EqoPlusHoeffding, PowerWorstCase, PowerInstance };
std::string_view corollary_name(CorollaryForm form);
CorollaryForm parse_corollary(std::string_view name);

struct CorollaryParams {
  double c1 = 1.0;
  double c2 = 2.0;
  double alpha = 0.5;
  double beta = 0.5;
  double kappa2_constant = 4.0;  // constant C in log k − 2 log(2 + log kH) < (C/c₂²)·log(1/δ)
};

BoundPoint corollary_bound(CorollaryForm form, const CorollaryParams& params, std::int64_t K, double delta,
                           const RlBoundInputs& in, const LambdaIota& li_delta, const EffectiveGaps& gaps);

// Largest k ≤ K with log k − 2·log(2 + log kH) < (C/c₂²)·log(1/δ).
std::int64_t kappa2_explicit(std::int64_t K, int H, double c2, double C, double delta);

struct IntegralResult {
  double value = 0.0;
  double error_estimate = 0.0;
  double tail = 0.0;
};

// ∫₀¹ f(δ)dδ from samples on a log grid: trapezoid in log δ with one Richardson step and a
// fitted a + b·log(1/δ) tail below the smallest grid point.
IntegralResult integrate_over_delta(const std::vector<double>& deltas, const std::vector<double>& values);
IntegralResult expected_bound_via_integral(const BoundCurve& curve);

// Digest of the numeric constants used by the bound evaluators.
const Json& bound_constants();
std::string bound_constants_hash();

}  // namespace eqolab
