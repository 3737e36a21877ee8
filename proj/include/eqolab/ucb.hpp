#pragma once

#include <cstdint>
#include <string>

namespace eqolab {

// σ·√(2(1 + 1/log(1+t))·(log(1/δ) + log A + 6·log log(1+t) + 8))
double tight_ucb(double t, double delta, double sigma, double A);

// Decreasing confidence schedule δ_t, clamped to at most 1.
struct DeltaRule {
  enum class Kind { TLogT, Power, ExpBeta };
  Kind kind = Kind::Power;
  double param = 2.0;  // p for Power, β for ExpBeta

  static DeltaRule t_log_t() { return {Kind::TLogT, 0.0}; }
  static DeltaRule power(double p) { return {Kind::Power, p}; }
  static DeltaRule exp_beta(double beta) { return {Kind::ExpBeta, beta}; }

  double at(std::int64_t t) const;
  std::string name() const;
};

DeltaRule parse_delta_rule(const std::string& name, double param);

// max{t ≥ 1 : δ_t > δ} by linear scan, 0 when empty; stops at t_max.
std::int64_t tau2_scan(const DeltaRule& rule, double delta, std::int64_t t_max);
// Same quantity from the inverse of the rule, adjusted to integers.
std::int64_t tau2_closed_form(const DeltaRule& rule, double delta);

}  // namespace eqolab
