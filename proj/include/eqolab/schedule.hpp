#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "eqolab/extended_real.hpp"
#include "eqolab/json_fwd.hpp"
#include "eqolab/log_factors.hpp"

namespace eqolab {

struct InstanceDims {
  int S = 1, A = 1, H = 1;
  double v_max = 1.0;
  std::int64_t k_max = 1;  // episodes (or bandit rounds) the schedule is tabulated for
  double w_diff = 0.0;
  double v_alpha = 0.0;

  LogFactors log_factors() const { return LogFactors{H, S, A, false}; }
};

// Bonus parameter sequences c₁,k and c₂,k for k = 1..k_max, immutable and cheap to copy.
class BonusSchedule {
 public:
  BonusSchedule() = default;
  BonusSchedule(std::string name, Json params, std::vector<ExtReal> c1, std::vector<ExtReal> c2);

  const std::string& name() const { return name_; }
  const Json& params() const { return *params_; }
  std::int64_t k_max() const { return static_cast<std::int64_t>(c1_->size()); }

  ExtReal c1_at(std::int64_t k) const;
  ExtReal c2_at(std::int64_t k) const;
  const std::vector<ExtReal>& c1_values() const { return *c1_; }
  const std::vector<ExtReal>& c2_values() const { return *c2_; }

  bool nondecreasing() const;

  // For schedules built on an index construction at δ = 1.
  const LambdaIota* unit_lambda_iota() const { return unit_li_.get(); }
  void set_unit_lambda_iota(LambdaIota li) { unit_li_ = std::make_shared<const LambdaIota>(std::move(li)); }

 private:
  std::string name_;
  std::shared_ptr<const Json> params_ = std::make_shared<const Json>(Json::object());
  std::shared_ptr<const std::vector<ExtReal>> c1_ = std::make_shared<const std::vector<ExtReal>>();
  std::shared_ptr<const std::vector<ExtReal>> c2_ = std::make_shared<const std::vector<ExtReal>>();
  std::shared_ptr<const LambdaIota> unit_li_;
};

// Named constructors:
//   "constant"           c1, c2 (numbers or "inf")
//   "constant-c1"        c1, or sigma + T (+ multiplier) for c1 = multiplier·σ√(T/A); c2 = ∞
//   "tight-ucb-c2"       sigma, delta_rule ∈ {t-log-t, power, exp-beta}, delta_param; c1 = ∞
//   "sqrt-growth"        c1, known_K
//   "eqo-plus-hoeffding" c1, c2, known_K
//   "power"              c1, c2, alpha, beta
BonusSchedule make_schedule(const std::string& name, const Json& params, const InstanceDims& dims);

// Reads a number or the string "inf" from a JSON value.
ExtReal ext_real_from_json(const Json& j);

}  // namespace eqolab
