#include "eqolab/ucb.hpp"

#include <boost/math/special_functions/lambert_w.hpp>
#include <cmath>

#include "eqolab/error.hpp"

namespace eqolab {

double tight_ucb(double t, double delta, double sigma, double A) {
  if (!(t >= 1.0)) fail(ErrorKind::InvalidArgument, "tight_ucb requires t ≥ 1");
  if (!(delta > 0.0 && delta <= 1.0)) fail(ErrorKind::InvalidArgument, "tight_ucb requires δ ∈ (0, 1]");
  const double lt = std::log1p(t);
  const double inner = std::log(1.0 / delta) + std::log(A) + 6.0 * std::log(lt) + 8.0;
  return sigma * std::sqrt(2.0 * (1.0 + 1.0 / lt) * inner);
}

double DeltaRule::at(std::int64_t t) const {
  const double x = static_cast<double>(t);
  double d = 1.0;
  switch (kind) {
    case Kind::TLogT: d = t <= 1 ? 1.0 : 1.0 / (x * std::log(x)); break;
    case Kind::Power: d = std::pow(x, -param); break;
    case Kind::ExpBeta: d = std::exp(-std::pow(x, param)); break;
  }
  return std::min(d, 1.0);
}

std::string DeltaRule::name() const {
  switch (kind) {
    case Kind::TLogT: return "t-log-t";
    case Kind::Power: return "power";
    case Kind::ExpBeta: return "exp-beta";
  }
  return "unknown";
}

DeltaRule parse_delta_rule(const std::string& name, double param) {
  if (name == "t-log-t") return DeltaRule::t_log_t();
  if (name == "power") {
    if (!(param > 0.0)) fail(ErrorKind::NonPositiveConstant, "power rule needs p > 0");
    return DeltaRule::power(param);
  }
  if (name == "exp-beta") {
    if (!(param > 0.0)) fail(ErrorKind::NonPositiveConstant, "exp-beta rule needs β > 0");
    return DeltaRule::exp_beta(param);
  }
  fail(ErrorKind::InvalidArgument, "unknown δ_t rule: " + name);
}

std::int64_t tau2_scan(const DeltaRule& rule, double delta, std::int64_t t_max) {
  std::int64_t last = 0;
  for (std::int64_t t = 1; t <= t_max; ++t) {
    if (rule.at(t) > delta) {
      last = t;
    } else {
      break;
    }
  }
  return last;
}

std::int64_t tau2_closed_form(const DeltaRule& rule, double delta) {
  if (!(delta > 0.0)) fail(ErrorKind::InvalidArgument, "δ must be positive");
  if (delta >= 1.0) return 0;
  double x = 1.0;
  switch (rule.kind) {
    case DeltaRule::Kind::Power: x = std::pow(delta, -1.0 / rule.param); break;
    case DeltaRule::Kind::ExpBeta: x = std::pow(std::log(1.0 / delta), 1.0 / rule.param); break;
    case DeltaRule::Kind::TLogT: {
      const double y = 1.0 / delta;
      x = y / boost::math::lambert_w0(y);
      break;
    }
  }
  auto t = static_cast<std::int64_t>(std::ceil(x)) - 1;
  if (t < 0) t = 0;
  while (rule.at(t + 1) > delta) ++t;
  while (t >= 1 && !(rule.at(t) > delta)) --t;
  return t;
}

}  // namespace eqolab
