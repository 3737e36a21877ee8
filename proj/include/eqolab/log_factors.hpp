#pragma once

#include <cstdint>
#include <vector>

#include "eqolab/extended_real.hpp"

namespace eqolab {

struct LogFactors {
  int H = 1, S = 1, A = 1;
  bool raw_form = false;  // compatibility: drop the outer logarithm

  double l1(double i, double delta) const;
  double l2(double k, double delta) const;
};

// Sequence λ_1 > λ_2 > ... and the episode-to-index map ι_k covering a nondecreasing c₁ sequence.
struct LambdaIota {
  double delta = 1.0;
  double w_diff = 0.0;
  double v_alpha = 0.0;
  double threshold = 0.0;           // c₁ values below this get ι = 1 and no λ
  std::vector<double> lambda;       // lambda[i-1] = λ_i
  std::vector<std::int32_t> iota;   // iota[k-1] = ι_k

  std::int64_t k_max() const { return static_cast<std::int64_t>(iota.size()); }
  int iota_at(std::int64_t k) const { return iota[static_cast<std::size_t>(k - 1)]; }
  double lambda_at(int i) const { return lambda[static_cast<std::size_t>(i - 1)]; }
};

// Builds a LambdaIota one episode at a time. push_with handles sequences whose value depends on
// the current index itself.
class LambdaIotaBuilder {
 public:
  LambdaIotaBuilder(const LogFactors& lf, double delta, double w_diff, double v_alpha);

  int push(ExtReal c);
  template <typename F>
  ExtReal push_with(F&& c_of_iota);

  LambdaIota finish() &&;
  double threshold() const { return out_.threshold; }

 private:
  int current() const { return static_cast<int>(out_.lambda.size()); }
  bool covered(double c) const;
  void open_index(double c);

  LogFactors lf_;
  LambdaIota out_;
};

// Smallest λ with ℓ₁(i,δ)/λ + 13·λ·w_diff·ℓ₁(1,δ) ≤ c, capped at 1/v_alpha.
double solve_lambda(const LogFactors& lf, double c, int i, double delta, double w_diff, double v_alpha);

LambdaIota lambda_iota(const std::vector<ExtReal>& c1, double delta, double w_diff, double v_alpha,
                       const LogFactors& lf);

template <typename F>
ExtReal LambdaIotaBuilder::push_with(F&& c_of_iota) {
  const int i = current();
  ExtReal c = c_of_iota(i == 0 ? 1 : i);
  if (c.is_infinite() || c.value() < out_.threshold || i == 0 || covered(c.value())) {
    push(c);
    return c;
  }
  ExtReal bumped = c_of_iota(i + 1);
  if (bumped.is_infinite()) {
    push(bumped);
    return bumped;
  }
  open_index(bumped.value());
  out_.iota.push_back(i + 1);
  return bumped;
}

}  // namespace eqolab
