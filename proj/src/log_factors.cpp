#include "eqolab/log_factors.hpp"

#include <cmath>
#include <string>

#include "eqolab/error.hpp"

namespace eqolab {

double LogFactors::l1(double i, double delta) const {
  const double x = 32.0 * H * S * A * i * i / delta;
  return raw_form ? x : std::log(x);
}

double LogFactors::l2(double k, double delta) const {
  const double inner = std::log(std::exp(2.0) * k * H);
  const double x = 32.0 * H * S * A * inner * inner / delta;
  return raw_form ? x : std::log(x);
}

double solve_lambda(const LogFactors& lf, double c, int i, double delta, double w_diff, double v_alpha) {
  const double li = lf.l1(i, delta);
  const double quad = 13.0 * w_diff * lf.l1(1, delta);
  double lambda = 0.0;
  if (quad == 0.0) {
    lambda = li / c;
  } else {
    const double disc = c * c - 4.0 * quad * li;
    if (disc < 0.0) {
      fail(ErrorKind::NoRoot, "c = " + std::to_string(c) + " is below the root threshold for index " + std::to_string(i));
    }
    lambda = 2.0 * li / (c + std::sqrt(disc));
  }
  // Nudge upward until the defining inequality holds in floating point with a few ulps to spare.
  auto lhs = [&](double l) { return li / l + quad * l; };
  const double peak = quad > 0.0 ? std::sqrt(li / quad) : HUGE_VAL;
  for (int it = 0; it < 256 && lhs(lambda) > c * (1.0 - 4e-16); ++it) {
    const double next = lambda * (1.0 + 1e-15);
    if (next > peak) break;
    lambda = next;
  }
  if (v_alpha > 0.0 && lambda > 1.0 / v_alpha) {
    lambda = 1.0 / v_alpha;
    if (lhs(lambda) > c) {
      fail(ErrorKind::NoRoot, "no λ ≤ 1/V_α satisfies the condition for c = " + std::to_string(c));
    }
  }
  return lambda;
}

LambdaIotaBuilder::LambdaIotaBuilder(const LogFactors& lf, double delta, double w_diff, double v_alpha) : lf_(lf) {
  if (!(delta > 0.0 && delta <= 1.0)) fail(ErrorKind::InvalidArgument, "δ must lie in (0, 1]");
  if (w_diff < 0.0 || v_alpha < 0.0) fail(ErrorKind::InvalidArgument, "w_diff and v_alpha must be ≥ 0");
  out_.delta = delta;
  out_.w_diff = w_diff;
  out_.v_alpha = v_alpha;
  out_.threshold = std::max(2.0 * std::sqrt(13.0 * w_diff), 2.0 * v_alpha) * lf.l1(1, delta);
}

bool LambdaIotaBuilder::covered(double c) const {
  const int i = current();
  return c <= 4.0 * lf_.l1(i, out_.delta) / out_.lambda.back();
}

void LambdaIotaBuilder::open_index(double c) {
  out_.lambda.push_back(solve_lambda(lf_, c, current() + 1, out_.delta, out_.w_diff, out_.v_alpha));
}

int LambdaIotaBuilder::push(ExtReal c) {
  const int i = current();
  int iota = 1;
  if (c.is_infinite()) {
    iota = i == 0 ? 1 : i;
  } else if (c.value() < out_.threshold) {
    iota = 1;
  } else if (i == 0) {
    open_index(c.value());
    iota = 1;
  } else if (covered(c.value())) {
    iota = i;
  } else {
    open_index(c.value());
    iota = i + 1;
  }
  out_.iota.push_back(iota);
  return iota;
}

LambdaIota LambdaIotaBuilder::finish() && { return std::move(out_); }

LambdaIota lambda_iota(const std::vector<ExtReal>& c1, double delta, double w_diff, double v_alpha,
                       const LogFactors& lf) {
  LambdaIotaBuilder b(lf, delta, w_diff, v_alpha);
  double prev = 0.0;
  for (const ExtReal c : c1) {
    if (!(c.value() > 0.0)) fail(ErrorKind::NonPositiveConstant, "c₁ values must be positive");
    if (c.value() < prev) fail(ErrorKind::InvalidArgument, "c₁ sequence must be nondecreasing");
    prev = c.value();
    b.push(c);
  }
  return std::move(b).finish();
}

}  // namespace eqolab
