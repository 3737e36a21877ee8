#include "eqolab/schedule.hpp"

#include <cmath>
#include <set>

#include "eqolab/error.hpp"
#include "eqolab/ucb.hpp"

namespace eqolab {

namespace {

const Json& require(const Json& params, const char* key, const std::string& schedule) {
  if (!params.contains(key)) fail(ErrorKind::ScheduleConstructionError, schedule + " needs parameter '" + key + "'");
  return params.at(key);
}

double positive(const Json& params, const char* key, const std::string& schedule) {
  const double v = require(params, key, schedule).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::NonPositiveConstant, schedule + ": " + key + " must be positive");
  return v;
}

void reject_unknown(const Json& params, std::initializer_list<const char*> keys, const std::string& schedule) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : params.items()) {
    if (!allowed.count(item.key())) fail(ErrorKind::ScheduleConstructionError, schedule + ": unknown parameter '" + item.key() + "'");
  }
}

double log_kh(double k, int H) { return std::log(std::max(k * H, 2.0)); }

// c₁,k = c·V·√(k·ℓ₁(ι_k,1)/(SA·log kH)) with ι_k built alongside, or the known-K constant.
std::vector<ExtReal> sqrt_growth_c1(double c1, bool known_k, const InstanceDims& d, LambdaIota* li_out) {
  const auto n = static_cast<std::size_t>(d.k_max);
  std::vector<ExtReal> out;
  out.reserve(n);
  const LogFactors lf = d.log_factors();
  const double sa = static_cast<double>(d.S) * d.A;
  LambdaIotaBuilder builder(lf, 1.0, d.w_diff, d.v_alpha);
  if (known_k) {
    const double lhsa = std::log(static_cast<double>(d.H) * d.S * d.A);
    if (!(lhsa > 0.0)) fail(ErrorKind::NonPositiveConstant, "sqrt-growth known-K needs HSA > 1");
    const double K = static_cast<double>(d.k_max);
    const double c = c1 * d.v_max * std::sqrt(K * lhsa / (sa * log_kh(K, d.H)));
    for (std::size_t k = 0; k < n; ++k) {
      out.emplace_back(c);
      builder.push(c);
    }
  } else {
    for (std::size_t k = 1; k <= n; ++k) {
      const double kd = static_cast<double>(k);
      out.push_back(builder.push_with([&](int iota) {
        return ExtReal(c1 * d.v_max * std::sqrt(kd * lf.l1(iota, 1.0) / (sa * log_kh(kd, d.H))));
      }));
    }
  }
  *li_out = std::move(builder).finish();
  return out;
}

}  // namespace

BonusSchedule::BonusSchedule(std::string name, Json params, std::vector<ExtReal> c1, std::vector<ExtReal> c2)
    : name_(std::move(name)),
      params_(std::make_shared<const Json>(std::move(params))),
      c1_(std::make_shared<const std::vector<ExtReal>>(std::move(c1))),
      c2_(std::make_shared<const std::vector<ExtReal>>(std::move(c2))) {
  if (c1_->size() != c2_->size()) fail(ErrorKind::ScheduleConstructionError, "c1 and c2 tables differ in length");
}

ExtReal BonusSchedule::c1_at(std::int64_t k) const {
  if (k < 1 || k > k_max()) fail(ErrorKind::InvalidArgument, "episode " + std::to_string(k) + " outside the schedule table");
  return (*c1_)[static_cast<std::size_t>(k - 1)];
}

ExtReal BonusSchedule::c2_at(std::int64_t k) const {
  if (k < 1 || k > k_max()) fail(ErrorKind::InvalidArgument, "episode " + std::to_string(k) + " outside the schedule table");
  return (*c2_)[static_cast<std::size_t>(k - 1)];
}

bool BonusSchedule::nondecreasing() const {
  for (std::size_t i = 1; i < c1_->size(); ++i) {
    if ((*c1_)[i].value() < (*c1_)[i - 1].value()) return false;
    if ((*c2_)[i].value() < (*c2_)[i - 1].value()) return false;
  }
  return true;
}

ExtReal ext_real_from_json(const Json& j) {
  if (j.is_string()) return parse_ext_real(j.get<std::string>());
  if (j.is_number()) {
    const double v = j.get<double>();
    if (std::isnan(v)) fail(ErrorKind::InvalidArgument, "NaN is not a valid constant");
    return ExtReal(v);
  }
  fail(ErrorKind::InvalidArgument, "expected a number or \"inf\"");
}

BonusSchedule make_schedule(const std::string& name, const Json& params, const InstanceDims& d) {
  if (d.k_max < 1) fail(ErrorKind::ScheduleConstructionError, "schedule horizon must be ≥ 1");
  const auto n = static_cast<std::size_t>(d.k_max);
  const ExtReal inf = ExtReal::infinity();
  const double SA = static_cast<double>(d.S) * d.A;

  if (name == "constant") {
    reject_unknown(params, {"c1", "c2"}, name);
    const ExtReal c1 = ext_real_from_json(require(params, "c1", name));
    const ExtReal c2 = ext_real_from_json(require(params, "c2", name));
    if (!(c1.value() > 0.0) || !(c2.value() > 0.0)) fail(ErrorKind::NonPositiveConstant, "constant: c1 and c2 must be positive or inf");
    return BonusSchedule(name, params, std::vector<ExtReal>(n, c1), std::vector<ExtReal>(n, c2));
  }
  if (name == "constant-c1") {
    reject_unknown(params, {"c1", "sigma", "T", "multiplier"}, name);
    double c1 = 0.0;
    if (params.contains("c1")) {
      c1 = positive(params, "c1", name);
    } else {
      const double sigma = positive(params, "sigma", name);
      const double T = positive(params, "T", name);
      const double mult = params.contains("multiplier") ? positive(params, "multiplier", name) : 1.0;
      c1 = mult * sigma * std::sqrt(T / d.A);
    }
    return BonusSchedule(name, params, std::vector<ExtReal>(n, ExtReal(c1)), std::vector<ExtReal>(n, inf));
  }
  if (name == "tight-ucb-c2") {
    reject_unknown(params, {"sigma", "delta_rule", "delta_param"}, name);
    const double sigma = positive(params, "sigma", name);
    const DeltaRule rule = parse_delta_rule(params.value("delta_rule", std::string("power")), params.value("delta_param", 2.0));
    std::vector<ExtReal> c2;
    c2.reserve(n);
    for (std::size_t t = 1; t <= n; ++t) {
      c2.emplace_back(tight_ucb(static_cast<double>(t), rule.at(static_cast<std::int64_t>(t)), sigma, d.A));
    }
    return BonusSchedule(name, params, std::vector<ExtReal>(n, inf), std::move(c2));
  }
  if (name == "sqrt-growth" || name == "eqo-plus-hoeffding") {
    const bool hoeffding = name == "eqo-plus-hoeffding";
    if (hoeffding) {
      reject_unknown(params, {"c1", "c2", "known_K"}, name);
    } else {
      reject_unknown(params, {"c1", "known_K"}, name);
    }
    const double c1 = positive(params, "c1", name);
    const bool known_k = params.value("known_K", false);
    LambdaIota li;
    auto c1_values = sqrt_growth_c1(c1, known_k, d, &li);
    std::vector<ExtReal> c2(n, inf);
    if (hoeffding) {
      const double c2c = positive(params, "c2", name);
      for (std::size_t k = 1; k <= n; ++k) {
        c2[k - 1] = ExtReal(c2c * d.v_max * std::sqrt(std::log(32.0 * d.H * SA * static_cast<double>(k))));
      }
    }
    BonusSchedule out(name, params, std::move(c1_values), std::move(c2));
    out.set_unit_lambda_iota(std::move(li));
    return out;
  }
  if (name == "power") {
    reject_unknown(params, {"c1", "c2", "alpha", "beta"}, name);
    const double c1 = positive(params, "c1", name);
    const double c2 = positive(params, "c2", name);
    const double alpha = require(params, "alpha", name).get<double>();
    const double beta = require(params, "beta", name).get<double>();
    if (!(alpha >= 0.5 && alpha <= 1.0)) fail(ErrorKind::InvalidExponents, "power schedule needs α ∈ [½,1], got " + std::to_string(alpha));
    if (!(beta > 0.0 && beta <= alpha)) fail(ErrorKind::InvalidExponents, "power schedule needs 0 < β ≤ α, got β = " + std::to_string(beta));
    std::vector<ExtReal> v1, v2;
    v1.reserve(n);
    v2.reserve(n);
    for (std::size_t k = 1; k <= n; ++k) {
      const double kd = static_cast<double>(k);
      v1.emplace_back(c1 * d.v_max * std::pow(kd / SA, alpha));
      v2.emplace_back(c2 * std::sqrt(std::pow(kd, beta)));
    }
    return BonusSchedule(name, params, std::move(v1), std::move(v2));
  }
  fail(ErrorKind::ScheduleConstructionError, "unknown schedule: " + name);
}

}  // namespace eqolab
