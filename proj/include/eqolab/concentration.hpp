#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eqolab/mdp.hpp"
#include "eqolab/rng.hpp"

namespace eqolab {

// (λ/2)·Σσ² + log(1/δ)/λ, valid for 0 < λ ≤ 1/α (α = 0 means no upper limit).
double ville_threshold(double lambda, double sigma2_sum, double delta, double alpha = 0.0);
// σ√(2n·log(1/δ))
double hoeffding_threshold(double n, double sigma, double delta);
// 2(σ ∨ √(αc/2))·√(log(2(log e²n)²/δ)/n), bound for the running mean clipped at c.
double clipped_timeuniform_threshold(double n, double sigma, double alpha, double c, double delta);
// √(2(1+η)n·log(4(2+log(1/η))²(1+(2e/η)log n)²/δ))
double peeling_threshold(double n, double eta, double delta);

// g(x) = (eˣ − 1 − x)/x², g(0) = ½.
double subexp_g(double x);
// Certificate for a centered variable bounded by c with variance V at scale α.
SubExpCertificate bounded_subexp_cert(double c, double variance, double alpha);

enum class GeneratorKind { Gaussian, BoundedCentered, ExponentialCentered };
std::string_view generator_name(GeneratorKind kind);
GeneratorKind parse_generator(std::string_view name);

// i.i.d. zero-mean increments: N(0, scale²), ±scale with equal probability, or Exp(1/scale) − scale.
struct MartingaleSpec {
  GeneratorKind kind = GeneratorKind::Gaussian;
  double scale = 1.0;
  std::int64_t n_max = 10000;

  SubExpCertificate certificate() const;
  // Sub-Gaussian parameter when the increments have one.
  std::optional<double> sub_gaussian() const;
  double variance() const;
};

// Draws increments for one sequence; keeps distribution state between calls.
class IncrementSampler {
 public:
  explicit IncrementSampler(const MartingaleSpec& spec);
  double operator()(Rng& rng);

 private:
  MartingaleSpec spec_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::exponential_distribution<double> exponential_{1.0};
};

enum class LemmaId { Ville, Hoeffding, ClippedTimeUniform, Peeling };
std::string_view lemma_name(LemmaId id);

// δ + 3√(δ(1−δ)/R)
double violation_band(double delta, std::int64_t R);

struct CertificationConfig {
  std::int64_t replications = 100000;
  std::int64_t n_max = 10000;
  std::vector<double> deltas{0.1, 0.05, 0.01};
  std::vector<GeneratorKind> generators{GeneratorKind::Gaussian, GeneratorKind::BoundedCentered,
                                        GeneratorKind::ExponentialCentered};
  std::vector<LemmaId> lemmas{LemmaId::Ville, LemmaId::Hoeffding, LemmaId::ClippedTimeUniform, LemmaId::Peeling};
  std::uint64_t seed = 20240601;
  double eta = 0.5;
  double clip = 1.0;
  std::int64_t ville_reference_n = 1000;  // λ tuned so the Ville boundary is tightest near this n
  int workers = 1;
};

struct CertificationCell {
  LemmaId lemma = LemmaId::Ville;
  GeneratorKind generator = GeneratorKind::Gaussian;
  double delta = 0.1;
  std::string params;
  bool in_certificate = true;  // false when a sub-Gaussian lemma runs on increments without that property
  std::int64_t violations = 0;
  std::int64_t replications = 0;
  double rate = 0.0;
  double band = 0.0;
  bool pass = false;
};

std::vector<CertificationCell> run_certification(const CertificationConfig& config);

}  // namespace eqolab
