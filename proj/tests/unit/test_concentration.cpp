#include <gtest/gtest.h>

#include <cmath>

#include "eqolab/concentration.hpp"
#include "eqolab/error.hpp"
#include "eqolab/rng.hpp"

using namespace eqolab;

TEST(Thresholds, VilleExamples) {
  EXPECT_NEAR(ville_threshold(1.0, 10.0, std::exp(-1.0)), 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(ville_threshold(0.4, 10.0, 1.0), 2.0);
  EXPECT_THROW(ville_threshold(0.0, 1.0, 0.1), Error);
  try {
    ville_threshold(2.0, 1.0, 0.1, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::LambdaOutOfRange);
  }
}

TEST(Thresholds, HoeffdingExamples) {
  EXPECT_NEAR(hoeffding_threshold(2, 1, std::exp(-1.0)), 2.0, 1e-12);
  EXPECT_EQ(hoeffding_threshold(2, 1, 1.0), 0.0);
}

TEST(Thresholds, ClippedCoefficientWithoutScale) {
  const double n = 50, delta = 0.05;
  const double inner = std::log(std::exp(2.0) * n);
  EXPECT_NEAR(clipped_timeuniform_threshold(n, 1.3, 0.0, 1.0, delta),
              2 * 1.3 * std::sqrt(std::log(2 * inner * inner / delta) / n), 1e-12);
  EXPECT_THROW(clipped_timeuniform_threshold(1, 1, 0, 1, 8.0), Error);
}

TEST(Thresholds, PeelingLimitRatio) {
  const double n = 1e6, eta = 0.5;
  double prev_gap = HUGE_VAL;
  for (double e : {10.0, 50.0, 200.0, 700.0}) {
    const double ratio = peeling_threshold(n, eta, std::exp(-e)) / std::sqrt(2 * n * e);
    const double gap = std::abs(ratio - std::sqrt(1 + eta));
    EXPECT_LT(gap, prev_gap);
    prev_gap = gap;
  }
  EXPECT_LT(prev_gap, 0.02);
  EXPECT_EQ(peeling_threshold(100, 0.7, 0.01), peeling_threshold(100, 0.7, 0.01));
  try {
    peeling_threshold(10, 3.0, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EtaOutOfRange);
  }
}

TEST(Thresholds, NonincreasingInDelta) {
  double prev[4] = {0, 0, 0, 0};
  for (double e = 0.0; e <= 20.0; e += 0.25) {
    const double d = std::exp(-e);
    const double cur[4] = {ville_threshold(0.3, 5.0, d), hoeffding_threshold(100, 1, d),
                           clipped_timeuniform_threshold(100, 1, 0.5, 1, d), peeling_threshold(100, 0.5, d)};
    for (int i = 0; i < 4; ++i) {
      EXPECT_GE(cur[i], prev[i]);
      EXPECT_TRUE(std::isfinite(cur[i]));
      prev[i] = cur[i];
    }
  }
}

TEST(SubExp, GFunction) {
  EXPECT_DOUBLE_EQ(subexp_g(0.0), 0.5);
  EXPECT_NEAR(subexp_g(1.0), std::exp(1.0) - 2.0, 1e-15);
  // Both branches near the switch point agree with an extended-precision evaluation.
  for (double x : {-2e-4, -0.99e-4, -1e-5, 1e-7, 0.99e-4, 1.01e-4, 3e-4}) {
    const long double xl = x;
    const long double ref = (std::expm1(xl) - xl) / (xl * xl);
    EXPECT_NEAR(subexp_g(x), static_cast<double>(ref), 1e-9) << x;
  }
  double prev = -1;
  for (double x = -10; x <= 10; x += 0.001) {
    const double g = subexp_g(x);
    EXPECT_GT(g, prev) << x;
    prev = g;
  }
}

TEST(SubExp, BoundedCertificate) {
  const auto cert = bounded_subexp_cert(1.0, 0.25, 1.0);
  EXPECT_NEAR(cert.sigma2, 0.3591409142295226, 1e-15);
  EXPECT_EQ(cert.alpha, 1.0);
  EXPECT_EQ(bounded_subexp_cert(0.0, 0.0, 1.0).sigma2, 0.0);
}

TEST(SubExp, MomentGeneratingFunctionBelowCertificate) {
  // X = 1{U < p} − p: centered, |X| ≤ max(p, 1 − p), variance p(1 − p).
  const double p = 0.2, c = 0.8, var = p * (1 - p);
  const auto cert = bounded_subexp_cert(c, var, c);
  Rng rng(2718);
  const int n = 1000000;
  for (double lambda : {1.0 / c, -1.0 / c}) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = (uniform01(rng) < p ? 1.0 : 0.0) - p;
      const double y = std::exp(lambda * x);
      s += y;
      s2 += y * y;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    EXPECT_LE(mean, std::exp(cert.sigma2 * lambda * lambda / 2) * (1 + 5 * se));
  }
}

TEST(Generators, CertificatesPerKind) {
  MartingaleSpec g{GeneratorKind::Gaussian, 1.5, 10};
  EXPECT_EQ(g.certificate().sigma2, 2.25);
  EXPECT_EQ(g.certificate().alpha, 0.0);
  MartingaleSpec b{GeneratorKind::BoundedCentered, 1.0, 10};
  EXPECT_NEAR(b.certificate().sigma2, 2 * (std::exp(1.0) - 2), 1e-15);
  MartingaleSpec e{GeneratorKind::ExponentialCentered, 1.0, 10};
  EXPECT_FALSE(e.sub_gaussian().has_value());
  // log E[e^{λX}] for X = Exp(1) − 1 at λ = ½ equals σ²λ²/2 at the certificate.
  const double lambda = 0.5;
  EXPECT_NEAR(-std::log(1 - lambda) - lambda, e.certificate().sigma2 * lambda * lambda / 2, 1e-14);
  EXPECT_EQ(parse_generator(generator_name(GeneratorKind::ExponentialCentered)), GeneratorKind::ExponentialCentered);
}

TEST(Generators, IncrementsAreCentered) {
  for (auto kind : {GeneratorKind::Gaussian, GeneratorKind::BoundedCentered, GeneratorKind::ExponentialCentered}) {
    MartingaleSpec spec{kind, 2.0, 10};
    IncrementSampler draw(spec);
    Rng rng(4);
    const int n = 400000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += draw(rng);
    EXPECT_LT(std::abs(s / n), 5 * 2.0 / std::sqrt(n)) << generator_name(kind);
  }
}

TEST(Certification, SmallMatrixPasses) {
  CertificationConfig cfg;
  cfg.replications = 4000;
  cfg.n_max = 300;
  cfg.ville_reference_n = 100;
  cfg.workers = 2;
  const auto cells = run_certification(cfg);
  EXPECT_EQ(cells.size(), 3u * 4u * 3u);
  for (const auto& c : cells) {
    EXPECT_EQ(c.replications, 4000);
    EXPECT_DOUBLE_EQ(c.band, violation_band(c.delta, 4000));
    if (c.in_certificate) EXPECT_TRUE(c.pass) << lemma_name(c.lemma) << " " << generator_name(c.generator) << " δ=" << c.delta;
  }
}

TEST(Certification, WorkerCountDoesNotChangeCounts) {
  CertificationConfig cfg;
  cfg.replications = 500;
  cfg.n_max = 100;
  cfg.workers = 1;
  const auto a = run_certification(cfg);
  cfg.workers = 3;
  const auto b = run_certification(cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].violations, b[i].violations);
}
