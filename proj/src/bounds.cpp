#include "eqolab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "eqolab/error.hpp"
#include "eqolab/format.hpp"
#include "eqolab/minmax.hpp"

namespace eqolab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) fail(ErrorKind::InvalidArgument, "δ must lie in (0, 1], got " + format_double(delta));
}

void check_li(const LambdaIota& li, double delta, std::int64_t k_max) {
  if (li.delta != delta) fail(ErrorKind::InvalidArgument, "λ/ι construction was built for a different δ");
  if (li.k_max() < k_max) fail(ErrorKind::InvalidArgument, "λ/ι construction is shorter than the horizon");
}

// ℓ₁(ι_k,δ)/c₁,k, zero when c₁,k is infinite.
double l1_over_c1(const BonusSchedule& sch, const LambdaIota& li, const LogFactors& lf, std::int64_t k, double delta) {
  const ExtReal c = sch.c1_at(k);
  if (c.is_infinite()) return 0.0;
  return lf.l1(li.iota_at(k), delta) / c.value();
}

double sum_l1_over_c1(const BonusSchedule& sch, const LambdaIota& li, const LogFactors& lf, std::int64_t from,
                      std::int64_t to, double delta) {
  double total = 0.0;
  for (std::int64_t k = std::max<std::int64_t>(from, 1); k <= to; ++k) total += l1_over_c1(sch, li, lf, k, delta);
  return total;
}

double lower_order(double coef, std::int64_t K, double delta, const RlBoundInputs& in) {
  const MdpDims& d = in.dims;
  return coef * d.v_max * d.S * d.S * d.A * in.lf.l2(static_cast<double>(K), delta) *
         std::log(2.0 * static_cast<double>(K) * d.H);
}

// (c₂ branch) ∧ (c₁ log branch), with the log clamped at zero and ∞ absorbed.
double pair_term(double c2_coef, double log_coef, double log_scale, ExtReal c1, ExtReal c2, double g) {
  if (!(g > 0.0)) fail(ErrorKind::NonPositiveEffectiveGap, "effective gap must be positive");
  if (std::isinf(g)) return 0.0;
  const double first = c2.is_infinite() ? kInf : c2_coef * c2.value() * c2.value() / g;
  const double second = c1.is_infinite() ? kInf : log_coef * c1.value() * positive_part(std::log(log_scale * c1.value() / g));
  return std::min(first, second);
}

double min_alpha_log(double alpha, std::int64_t K) {
  const double lk = std::log(static_cast<double>(K));
  return alpha >= 1.0 ? lk : std::min(1.0 / (1.0 - alpha), lk);
}

void require_proxies(const RlBoundInputs& in) {
  if (in.schedule == nullptr || in.proxies == nullptr) fail(ErrorKind::InvalidArgument, "bound inputs need a schedule and proxies");
}

}  // namespace

bool kappa_predicate(const BonusSchedule& sch, std::int64_t k, double delta, const VarianceProxyTables& px,
                     const LambdaIota& li, const LogFactors& lf) {
  const ExtReal c1 = sch.c1_at(k);
  const ExtReal c2 = sch.c2_at(k);
  if (c1.is_finite() && c1.value() < li.threshold) return true;
  if (c2.is_infinite()) return false;
  const double extra = c1.is_infinite() ? 0.0 : 6.0 * px.w_diff_star * lf.l1(li.iota_at(k), delta) / c1.value();
  return c2.value() < (px.sigma_max + extra) * std::sqrt(lf.l2(static_cast<double>(k), delta));
}

KappaResult kappa(const BonusSchedule& sch, double delta, const VarianceProxyTables& px, const LambdaIota& li,
                  const LogFactors& lf, std::int64_t k_max) {
  check_delta(delta);
  check_li(li, delta, k_max);
  KappaResult r;
  for (std::int64_t k = k_max; k >= 1; --k) {
    if (kappa_predicate(sch, k, delta, px, li, lf)) {
      r.k = k;
      r.saturated = k == k_max;
      return r;
    }
  }
  return r;
}

KappaResult kappa_gap(const BonusSchedule& sch, double gap, double delta, double w_star, const LambdaIota& li,
                      const LogFactors& lf, std::int64_t k_max) {
  if (!(gap > 0.0)) fail(ErrorKind::NonPositiveGap, "κ_gap needs gap > 0");
  check_delta(delta);
  check_li(li, delta, k_max);
  KappaResult r;
  for (std::int64_t k = k_max; k >= 1; --k) {
    const ExtReal c = sch.c1_at(k);
    if (c.is_finite() && c.value() < 36.0 * w_star * lf.l1(li.iota_at(k), delta) / gap) {
      r.k = k;
      r.saturated = k == k_max;
      return r;
    }
  }
  return r;
}

double BoundPoint::component(const std::string& name) const {
  for (const auto& c : components)
    if (c.name == name) return c.value;
  fail(ErrorKind::InvalidArgument, "no bound component named " + name);
}

void BoundPoint::add(std::string name, double value) { components.push_back({std::move(name), value}); }

void BoundPoint::finish() {
  total = 0.0;
  for (const auto& c : components) total += c.value;
  vacuous = std::isinf(total);
}

std::vector<double> log_delta_grid(double lo, double hi, int points) {
  if (!(lo > 0.0 && lo < hi && hi <= 1.0) || points < 2) fail(ErrorKind::InvalidArgument, "bad δ grid");
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

BoundPoint bandit_bound_thm1(double T, double delta, double c1, double sigma, const std::vector<double>& gaps,
                             BanditBoundForm form) {
  check_delta(delta);
  if (!(c1 > 0.0)) fail(ErrorKind::NonPositiveConstant, "c₁ must be positive");
  const double A = static_cast<double>(gaps.size());
  const double lg = std::log(4.0 / delta);
  double gap_sum = 0.0;
  for (double g : gaps) gap_sum += g;
  BoundPoint p;
  p.delta = delta;
  switch (form) {
    case BanditBoundForm::Formal:
    case BanditBoundForm::Statement:
      p.add("variance_term", sigma * sigma * T * lg / (2.0 * c1));
      p.add("bonus_term", c1 * (A - 1.0));
      p.add("deviation_term", (form == BanditBoundForm::Formal ? 2.0 : 1.0) * sigma * std::sqrt(A * T * lg));
      break;
    case BanditBoundForm::Simplified:
      p.add("variance_term", sigma * sigma * T * lg / c1);
      p.add("bonus_term", 1.5 * c1 * A);
      break;
  }
  p.add("gap_sum", gap_sum);
  p.finish();
  return p;
}

double bandit_bound_minimax_display(double T, double delta, double sigma, const std::vector<double>& gaps) {
  check_delta(delta);
  const double A = static_cast<double>(gaps.size());
  double gap_sum = 0.0;
  for (double g : gaps) gap_sum += g;
  return 0.5 * sigma * std::sqrt(A * T) * std::log(4.0 * std::exp(2.0) / delta) +
         sigma * std::sqrt(A * T * std::log(4.0 / delta)) + gap_sum;
}

double bandit_expected_bound(double T, double sigma, const std::vector<double>& gaps) {
  double gap_sum = 0.0;
  for (double g : gaps) gap_sum += g;
  return 4.0 * sigma * std::sqrt(static_cast<double>(gaps.size()) * T) + gap_sum;
}

BoundPoint bandit_bound_thm2(std::int64_t T, double delta, const DeltaRule& rule, double sigma,
                             const std::vector<double>& gaps) {
  check_delta(delta);
  const double A = static_cast<double>(gaps.size());
  const std::int64_t tau2 = tau2_scan(rule, delta, T + 1);
  const double c2T = tight_ucb(static_cast<double>(T), rule.at(T), sigma, A);
  const double u = tight_ucb(static_cast<double>(T), delta, sigma, A);
  double gap_sum = 0.0, ucb_sum = 0.0;
  for (double g : gaps) {
    gap_sum += g;
    if (g != 0.0) ucb_sum += (c2T + u) * (c2T + u) / g;
  }
  BoundPoint p;
  p.delta = delta;
  p.add("tau2_term", static_cast<double>(std::min(tau2, T)));
  p.add("gap_sum", gap_sum);
  p.add("ucb_term", ucb_sum);
  p.finish();
  return p;
}

BoundPoint rl_bound_gap_independent(std::int64_t K, double delta, const RlBoundInputs& in, const LambdaIota& li) {
  require_proxies(in);
  const BonusSchedule& sch = *in.schedule;
  const MdpDims& d = in.dims;
  const KappaResult kap = kappa(sch, delta, *in.proxies, li, in.lf, K);
  const double Kd = static_cast<double>(K);
  BoundPoint p;
  p.delta = delta;
  p.add("kappa_term", d.v_max * static_cast<double>(std::min(kap.k, K)));
  p.add("c1_sum", 18.0 * in.proxies->w_star * sum_l1_over_c1(sch, li, in.lf, kap.k + 1, K, delta));
  const ExtReal c1K = sch.c1_at(K), c2K = sch.c2_at(K);
  const double sa = static_cast<double>(d.S) * d.A;
  const double first = c1K.is_infinite() ? kInf : 16.0 * c1K.value() * sa * std::log(Kd * d.H);
  const double second = c2K.is_infinite() ? kInf : 16.0 * std::sqrt(2.0) * c2K.value() * std::sqrt(d.H * sa * Kd);
  p.add("min_term", std::min(first, second));
  p.add("lower_order", lower_order(72.0, K, delta, in));
  p.finish();
  return p;
}

BoundPoint rl_bound_gap_dependent(std::int64_t K, double delta, const RlBoundInputs& in, const LambdaIota& li,
                                  const EffectiveGaps& gaps, const ValueTables& vt, GapBoundVariant variant) {
  require_proxies(in);
  const BonusSchedule& sch = *in.schedule;
  const MdpDims& d = in.dims;
  const KappaResult kap = kappa(sch, delta, *in.proxies, li, in.lf, K);
  BoundPoint p;
  p.delta = delta;
  p.add("kappa_term", d.v_max * static_cast<double>(std::min(kap.k, K)));
  const ExtReal c1K = sch.c1_at(K), c2K = sch.c2_at(K);
  double pair_sum = 0.0;
  double c1_sum = 0.0;
  if (!gaps.empty && vt.gap_min) {
    const double gmin = *vt.gap_min;
    double kgap_gap = 0.0;
    if (variant == GapBoundVariant::EffectiveGap) {
      for (int s = 0; s < d.S; ++s)
        for (int a = 0; a < d.A; ++a) pair_sum += pair_term(2048.0, 64.0, 32.0, c1K, c2K, gaps.per_pair_at(s, a, d.A));
      kgap_gap = gaps.v_gap.value_or(gmin);
    } else {
      for (int s = 0; s < d.S; ++s)
        for (int a = 0; a < d.A; ++a) {
          double g = kInf;
          for (int h = 0; h < d.H; ++h) g = std::min(g, vt.gap_at(h, s, a));
          pair_sum += pair_term(4096.0, 64.0, 64.0, c1K, c2K, vee(g, gmin / d.H));
        }
      kgap_gap = gmin;
    }
    const KappaResult kg = kappa_gap(sch, kgap_gap, delta, in.proxies->w_star, li, in.lf, K);
    c1_sum = 144.0 * in.proxies->w_star * sum_l1_over_c1(sch, li, in.lf, kap.k + 1, std::min(kg.k, K), delta);
  }
  p.add("gap_sum", pair_sum);
  p.add("c1_sum", c1_sum);
  p.add("lower_order", lower_order(288.0, K, delta, in));
  p.finish();
  return p;
}

std::string_view corollary_name(CorollaryForm form) {
  switch (form) {
    case CorollaryForm::SqrtGrowth: return "sqrt-growth";
    case CorollaryForm::EqoPlusHoeffding: return "eqo-plus-hoeffding";
    case CorollaryForm::PowerWorstCase: return "power-worst-case";
    case CorollaryForm::PowerInstance: return "power-instance";
  }
  return "unknown";
}

CorollaryForm parse_corollary(std::string_view name) {
  if (name == "sqrt-growth") return CorollaryForm::SqrtGrowth;
  if (name == "eqo-plus-hoeffding") return CorollaryForm::EqoPlusHoeffding;
  if (name == "power-worst-case") return CorollaryForm::PowerWorstCase;
  if (name == "power-instance") return CorollaryForm::PowerInstance;
  fail(ErrorKind::InvalidArgument, "unknown corollary form: " + std::string(name));
}

std::int64_t kappa2_explicit(std::int64_t K, int H, double c2, double C, double delta) {
  check_delta(delta);
  const double rhs = C / (c2 * c2) * std::log(1.0 / delta);
  std::int64_t best = 0;
  for (std::int64_t k = 1; k <= K; ++k) {
    const double kd = static_cast<double>(k);
    if (std::log(kd) - 2.0 * std::log(2.0 + std::log(kd * H)) < rhs) best = k;
  }
  return best;
}

BoundPoint corollary_bound(CorollaryForm form, const CorollaryParams& cp, std::int64_t K, double delta,
                           const RlBoundInputs& in, const LambdaIota& li, const EffectiveGaps& gaps) {
  require_proxies(in);
  check_delta(delta);
  const MdpDims& d = in.dims;
  const VarianceProxyTables& px = *in.proxies;
  const double V = d.v_max;
  const double Kd = static_cast<double>(K);
  const double SA = static_cast<double>(d.S) * d.A;
  const LogFactors& lf = in.lf;
  BoundPoint p;
  p.delta = delta;

  auto check_power = [&] {
    if (!(cp.alpha >= 0.5 && cp.alpha <= 1.0)) {
      fail(ErrorKind::ParameterConstraintViolation, "α ∈ [½,1] violated: α = " + format_double(cp.alpha));
    }
    if (!(cp.beta > 0.0 && cp.beta <= cp.alpha)) {
      fail(ErrorKind::ParameterConstraintViolation, "0 < β ≤ α violated: β = " + format_double(cp.beta));
    }
    if (!(cp.c1 > 0.0) || !(cp.c2 > 0.0)) fail(ErrorKind::ParameterConstraintViolation, "c₁ > 0 and c₂ > 0 required");
  };
  auto head_term = [&] {
    return V * std::pow(2.0 * V / cp.c2, 2.0 / cp.beta) * std::pow(lf.l2(Kd, delta), 1.0 / cp.beta);
  };

  switch (form) {
    case CorollaryForm::SqrtGrowth: {
      if (!(cp.c1 > 0.0)) fail(ErrorKind::ParameterConstraintViolation, "c₁ > 0 required");
      const LambdaIota* unit = in.schedule->unit_lambda_iota();
      if (unit == nullptr || unit->k_max() < K) fail(ErrorKind::InvalidArgument, "sqrt-growth corollary needs a sqrt-growth schedule");
      const double coef = 36.0 * std::log(1.0 / delta) / (cp.c1 * lf.l1(1, 1.0)) + 36.0 / cp.c1 + 8.0 * cp.c1;
      const double lead = V * std::sqrt(Kd * SA * lf.l1(unit->iota_at(K), 1.0) * std::log(Kd * d.H));
      p.add("leading_term", coef * lead);
      p.add("lower_order", lower_order(72.0, K, delta, in));
      break;
    }
    case CorollaryForm::EqoPlusHoeffding: {
      if (!(cp.c2 >= 2.0)) fail(ErrorKind::ParameterConstraintViolation, "c₂ ≥ 2 violated: c₂ = " + format_double(cp.c2));
      if (!(px.sigma_max * px.sigma_max <= 2.0 * V * V * (1.0 + 1e-12))) {
        fail(ErrorKind::ParameterConstraintViolation, "σ_max² ≤ 2V_max² violated");
      }
      const BonusSchedule& sch = *in.schedule;
      const KappaResult kap = kappa(sch, delta, px, li, lf, K);
      const std::int64_t kk = std::min(kap.k, K);
      std::int64_t kappa1 = 0;
      for (std::int64_t k = 1; k <= K; ++k) {
        const ExtReal c = sch.c1_at(k);
        if (c.is_infinite()) continue;
        if (18.0 * px.w_star * lf.l1(li.iota_at(k), delta) / V < c.value() && c.value() < li.threshold) kappa1 = k;
      }
      const std::int64_t kappa2 = kappa2_explicit(K, d.H, cp.c2, cp.kappa2_constant, delta);
      p.add("kappa_head_sum", 18.0 * px.w_star * sum_l1_over_c1(sch, li, lf, 1, kk, delta));
      p.add("kappa_residual", V * static_cast<double>(std::min(std::max(kappa1, kappa2), K)));
      double pair_sum = 0.0, c1_sum = 0.0;
      if (!gaps.empty) {
        const ExtReal c1K = sch.c1_at(K), c2K = sch.c2_at(K);
        for (int s = 0; s < d.S; ++s)
          for (int a = 0; a < d.A; ++a) pair_sum += pair_term(2048.0, 64.0, 32.0, c1K, c2K, gaps.per_pair_at(s, a, d.A));
        const double vg = *gaps.v_gap;
        const KappaResult kg = kappa_gap(sch, vg, delta, px.w_star, li, lf, K);
        c1_sum = 144.0 * px.w_star * sum_l1_over_c1(sch, li, lf, kap.k + 1, std::min(kg.k, K), delta);
      }
      p.add("gap_sum", pair_sum);
      p.add("c1_sum", c1_sum);
      p.add("lower_order", lower_order(288.0, K, delta, in));
      break;
    }
    case CorollaryForm::PowerWorstCase: {
      check_power();
      const double l1K = lf.l1(li.iota_at(K), delta);
      p.add("kappa2_term", head_term());
      p.add("c1_sum", 36.0 * V / cp.c1 * min_alpha_log(cp.alpha, K) * std::pow(Kd, 1.0 - cp.alpha) *
                          std::pow(SA, cp.alpha) * l1K);
      const double first = 16.0 * cp.c1 * V * std::pow(Kd, cp.alpha) * std::pow(SA, 1.0 - cp.alpha) * std::log(Kd * d.H);
      const double second = 16.0 * std::sqrt(2.0) * cp.c2 * std::sqrt(d.H * SA) * std::pow(Kd, cp.beta + 0.5);
      p.add("min_term", std::min(first, second));
      p.add("lower_order", lower_order(72.0, K, delta, in));
      break;
    }
    case CorollaryForm::PowerInstance: {
      check_power();
      const double l1K = lf.l1(li.iota_at(K), delta);
      const double inv_alpha = 1.0 / cp.alpha;
      p.add("kappa2_term", head_term());
      const double thr_coef = std::max(2.0 * std::sqrt(13.0 * px.w_diff_star), 2.0 * px.v_alpha);
      p.add("kappa1_term", V * SA * std::pow(thr_coef * l1K / (cp.c1 * V), inv_alpha));
      double gap_c1 = 0.0, pair_sum = 0.0;
      if (!gaps.empty) {
        gap_c1 = 4.0 * SA * min_alpha_log(cp.alpha, K) * std::pow(36.0 * px.w_star * l1K / (cp.c1 * V), inv_alpha) *
                 std::pow(1.0 / *gaps.v_gap, inv_alpha - 1.0);
        for (int s = 0; s < d.S; ++s)
          for (int a = 0; a < d.A; ++a) {
            const double g = gaps.per_pair_at(s, a, d.A);
            if (!(g > 0.0)) fail(ErrorKind::NonPositiveEffectiveGap, "effective gap must be positive");
            if (std::isfinite(g)) pair_sum += 2048.0 * cp.c2 * cp.c2 * std::pow(Kd, cp.beta) / g;
          }
      }
      p.add("c1_sum", gap_c1);
      p.add("gap_sum", pair_sum);
      p.add("lower_order", lower_order(288.0, K, delta, in));
      break;
    }
  }
  p.finish();
  return p;
}

IntegralResult integrate_over_delta(const std::vector<double>& deltas, const std::vector<double>& values) {
  if (deltas.size() != values.size() || deltas.size() < 3) fail(ErrorKind::GridTooCoarse, "need at least three grid points");
  std::vector<std::size_t> order(deltas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return deltas[a] < deltas[b]; });
  std::vector<double> u, g, f;
  for (std::size_t i : order) {
    if (!(deltas[i] > 0.0 && deltas[i] <= 1.0)) fail(ErrorKind::InvalidArgument, "grid δ outside (0, 1]");
    if (!u.empty() && std::log(deltas[i]) == u.back()) continue;
    u.push_back(std::log(deltas[i]));
    f.push_back(values[i]);
    g.push_back(values[i] * deltas[i]);
  }
  const std::size_t n = u.size();
  if (n < 3) fail(ErrorKind::GridTooCoarse, "need at least three distinct grid points");
  if (std::abs(u.back()) > 1e-12) fail(ErrorKind::GridTooCoarse, "grid must reach δ = 1");
  for (double x : f)
    if (!std::isfinite(x)) fail(ErrorKind::InvalidArgument, "cannot integrate a vacuous curve");

  double fine = 0.0;
  for (std::size_t i = 1; i < n; ++i) fine += 0.5 * (u[i] - u[i - 1]) * (g[i] + g[i - 1]);
  // Pair intervals from δ = 1 downward so an unpaired one lands where δ·f is smallest.
  double coarse = 0.0;
  std::size_t i = n - 1;
  for (; i >= 2; i -= 2) coarse += 0.5 * (u[i] - u[i - 2]) * (g[i] + g[i - 2]);
  if (i == 1) coarse += 0.5 * (u[1] - u[0]) * (g[1] + g[0]);
  const double richardson = (fine - coarse) / 3.0;

  // f ≈ a + b·log(1/δ) below the grid.
  const double d0 = std::exp(u[0]);
  const double L0 = -u[0], L1 = -u[1];
  double slope = (f[0] - f[1]) / (L0 - L1);
  if (!(slope > 0.0)) slope = 0.0;
  const double tail = d0 * (f[0] + slope);

  IntegralResult r;
  r.tail = tail;
  r.value = fine + richardson + tail;
  r.error_estimate = std::abs(richardson) + d0 * slope;
  if (r.error_estimate > 0.01 * std::abs(r.value)) {
    fail(ErrorKind::GridTooCoarse, "estimated quadrature error " + format_double(r.error_estimate) +
                                       " exceeds 1% of " + format_double(r.value));
  }
  return r;
}

IntegralResult expected_bound_via_integral(const BoundCurve& curve) {
  std::vector<double> d, v;
  for (const auto& p : curve.points) {
    d.push_back(p.delta);
    v.push_back(p.total);
  }
  return integrate_over_delta(d, v);
}

const Json& bound_constants() {
  static const Json constants = Json::parse(R"json({
    "log_factor_scale": 32,
    "threshold": {"w_diff_root": 13, "v_alpha": 2},
    "kappa": {"w_diff": 6},
    "kappa_gap": 36,
    "gap_independent": {"c1_sum": 18, "c1_term": 16, "c2_term": "16*sqrt(2)", "lower_order": 72},
    "gap_dependent": {"c2_branch": 2048, "c1_branch": 64, "log_scale": 32, "c1_sum": 144, "lower_order": 288},
    "gap_dependent_main_text": {"c2_branch": 4096, "c1_branch": 64, "log_scale": 64, "c1_sum": 144, "lower_order": 288},
    "sqrt_growth_corollary": {"log_delta": 36, "inverse_c1": 36, "c1": 8},
    "bandit_constant_c1": {"log_scale": 4, "variance_divisor": 2, "deviation": 2},
    "tight_ucb": {"loglog": 6, "offset": 8}
  })json");
  return constants;
}

std::string bound_constants_hash() { return fnv1a_hex(bound_constants().dump()); }

}  // namespace eqolab
