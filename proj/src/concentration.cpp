#include "eqolab/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "eqolab/error.hpp"
#include "eqolab/format.hpp"

namespace eqolab {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) fail(ErrorKind::InvalidArgument, "δ must lie in (0, 1]");
}

}  // namespace

double ville_threshold(double lambda, double sigma2_sum, double delta, double alpha) {
  check_delta(delta);
  if (!(lambda > 0.0) || (alpha > 0.0 && lambda > 1.0 / alpha)) {
    fail(ErrorKind::LambdaOutOfRange, "need 0 < λ ≤ 1/α, got λ = " + format_double(lambda));
  }
  return 0.5 * lambda * sigma2_sum + std::log(1.0 / delta) / lambda;
}

double hoeffding_threshold(double n, double sigma, double delta) {
  check_delta(delta);
  return sigma * std::sqrt(2.0 * n * std::log(1.0 / delta));
}

double clipped_timeuniform_threshold(double n, double sigma, double alpha, double c, double delta) {
  check_delta(delta);
  if (!(c > 0.0)) fail(ErrorKind::InvalidArgument, "clip level c must be positive");
  if (!(n >= 1.0)) fail(ErrorKind::InvalidArgument, "n must be ≥ 1");
  const double inner = std::log(std::exp(2.0) * n);
  const double scale = std::max(sigma, std::sqrt(alpha * c / 2.0));
  return 2.0 * scale * std::sqrt(std::log(2.0 * inner * inner / delta) / n);
}

double peeling_threshold(double n, double eta, double delta) {
  check_delta(delta);
  if (!(eta > 0.0 && eta < std::exp(1.0))) fail(ErrorKind::EtaOutOfRange, "need η ∈ (0, e), got " + format_double(eta));
  if (!(n >= 1.0)) fail(ErrorKind::InvalidArgument, "n must be ≥ 1");
  const double a = 2.0 + std::log(1.0 / eta);
  const double b = 1.0 + (2.0 * std::exp(1.0) / eta) * std::log(n);
  return std::sqrt(2.0 * (1.0 + eta) * n * (std::log(4.0 * a * a * b * b) - std::log(delta)));
}

double subexp_g(double x) {
  if (std::abs(x) < 1e-4) {
    return 0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x * (1.0 / 120.0 + x * (1.0 / 720.0 + x * (1.0 / 5040.0 + x / 40320.0)))));
  }
  return (std::expm1(x) - x) / (x * x);
}

SubExpCertificate bounded_subexp_cert(double c, double variance, double alpha) {
  if (c < 0.0 || !(alpha > 0.0) || variance < 0.0) fail(ErrorKind::InvalidArgument, "need c ≥ 0, V ≥ 0, α > 0");
  return {subexp_g(c / alpha) * 2.0 * variance, alpha};
}

std::string_view generator_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Gaussian: return "iid-gaussian";
    case GeneratorKind::BoundedCentered: return "iid-bounded-centered";
    case GeneratorKind::ExponentialCentered: return "iid-exponential-centered";
  }
  return "unknown";
}

GeneratorKind parse_generator(std::string_view name) {
  if (name == "iid-gaussian") return GeneratorKind::Gaussian;
  if (name == "iid-bounded-centered") return GeneratorKind::BoundedCentered;
  if (name == "iid-exponential-centered") return GeneratorKind::ExponentialCentered;
  fail(ErrorKind::InvalidArgument, "unknown generator: " + std::string(name));
}

SubExpCertificate MartingaleSpec::certificate() const {
  switch (kind) {
    case GeneratorKind::Gaussian: return {scale * scale, 0.0};
    case GeneratorKind::BoundedCentered: return bounded_subexp_cert(scale, variance(), scale);
    // sup over |λ| ≤ 1/(2·scale) of 2·log E[e^{λX}]/λ² is attained at λ = 1/(2·scale).
    case GeneratorKind::ExponentialCentered: return {8.0 * (std::log(2.0) - 0.5) * scale * scale, 2.0 * scale};
  }
  return {};
}

std::optional<double> MartingaleSpec::sub_gaussian() const {
  switch (kind) {
    case GeneratorKind::Gaussian:
    case GeneratorKind::BoundedCentered: return scale;
    case GeneratorKind::ExponentialCentered: return std::nullopt;
  }
  return std::nullopt;
}

double MartingaleSpec::variance() const { return scale * scale; }

IncrementSampler::IncrementSampler(const MartingaleSpec& spec) : spec_(spec) {}

double IncrementSampler::operator()(Rng& rng) {
  switch (spec_.kind) {
    case GeneratorKind::Gaussian: return spec_.scale * normal_(rng);
    case GeneratorKind::BoundedCentered: return (rng() >> 63) != 0 ? spec_.scale : -spec_.scale;
    case GeneratorKind::ExponentialCentered: return spec_.scale * (exponential_(rng) - 1.0);
  }
  return 0.0;
}

std::string_view lemma_name(LemmaId id) {
  switch (id) {
    case LemmaId::Ville: return "ville";
    case LemmaId::Hoeffding: return "hoeffding";
    case LemmaId::ClippedTimeUniform: return "clipped-time-uniform";
    case LemmaId::Peeling: return "peeling";
  }
  return "unknown";
}

double violation_band(double delta, std::int64_t R) {
  return delta + 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(R));
}

namespace {

// A time-uniform event "∃n: S_n ≥ boundary[n]" or a fixed-time event at n_max.
struct EventPlan {
  std::size_t cell = 0;
  bool fixed_time = false;
  std::vector<double> boundary;  // indexed by n−1; +∞ where the event cannot fire
  double final_boundary = 0.0;
};

void run_generator(const MartingaleSpec& spec, const std::vector<EventPlan>& events, std::uint64_t seed,
                   std::size_t generator_index, std::int64_t begin, std::int64_t end, std::vector<std::int64_t>& hits) {
  const auto n_max = static_cast<std::size_t>(spec.n_max);
  std::vector<const EventPlan*> uniform, fixed;
  for (const auto& e : events) (e.fixed_time ? fixed : uniform).push_back(&e);
  std::vector<char> fired(uniform.size());
  for (std::int64_t r = begin; r < end; ++r) {
    Rng rng(derive_seed(seed, generator_index, static_cast<std::uint64_t>(r)));
    IncrementSampler draw(spec);
    std::fill(fired.begin(), fired.end(), 0);
    std::size_t remaining = uniform.size();
    double s = 0.0;
    for (std::size_t n = 0; n < n_max; ++n) {
      s += draw(rng);
      if (remaining == 0) continue;
      for (std::size_t e = 0; e < uniform.size(); ++e) {
        if (!fired[e] && s >= uniform[e]->boundary[n]) {
          fired[e] = 1;
          --remaining;
        }
      }
    }
    for (std::size_t e = 0; e < uniform.size(); ++e)
      if (fired[e]) ++hits[uniform[e]->cell];
    for (const EventPlan* e : fixed)
      if (s >= e->final_boundary) ++hits[e->cell];
  }
}

}  // namespace

std::vector<CertificationCell> run_certification(const CertificationConfig& cfg) {
  if (cfg.replications < 1 || cfg.n_max < 1) fail(ErrorKind::InvalidArgument, "replications and n_max must be ≥ 1");
  std::vector<CertificationCell> cells;
  for (std::size_t gi = 0; gi < cfg.generators.size(); ++gi) {
    MartingaleSpec spec;
    spec.kind = cfg.generators[gi];
    spec.n_max = cfg.n_max;
    const SubExpCertificate cert = spec.certificate();
    const double sigma = std::sqrt(cert.sigma2);
    const auto sub_g = spec.sub_gaussian();
    const double sg = sub_g.value_or(sigma);
    const auto n_max = static_cast<std::size_t>(cfg.n_max);

    std::vector<EventPlan> events;
    const std::size_t first_cell = cells.size();
    for (LemmaId lemma : cfg.lemmas) {
      for (double delta : cfg.deltas) {
        CertificationCell cell;
        cell.lemma = lemma;
        cell.generator = spec.kind;
        cell.delta = delta;
        cell.replications = cfg.replications;
        EventPlan ev;
        ev.cell = cells.size() - first_cell;
        ev.boundary.resize(n_max);
        switch (lemma) {
          case LemmaId::Ville: {
            double lambda = std::sqrt(2.0 * std::log(1.0 / delta) / (cert.sigma2 * static_cast<double>(cfg.ville_reference_n)));
            if (cert.alpha > 0.0) lambda = std::min(lambda, 1.0 / cert.alpha);
            for (std::size_t n = 0; n < n_max; ++n)
              ev.boundary[n] = ville_threshold(lambda, cert.sigma2 * static_cast<double>(n + 1), delta, cert.alpha);
            cell.params = "lambda=" + format_double(lambda) + ";sigma2=" + format_double(cert.sigma2) + ";alpha=" + format_double(cert.alpha);
            break;
          }
          case LemmaId::Hoeffding:
            ev.fixed_time = true;
            ev.final_boundary = hoeffding_threshold(static_cast<double>(cfg.n_max), sg, delta);
            cell.in_certificate = sub_g.has_value();
            cell.params = "n=" + std::to_string(cfg.n_max) + ";sigma=" + format_double(sg);
            break;
          case LemmaId::ClippedTimeUniform:
            for (std::size_t n = 0; n < n_max; ++n) {
              const double nd = static_cast<double>(n + 1);
              const double thr = clipped_timeuniform_threshold(nd, sigma, cert.alpha, cfg.clip, delta);
              ev.boundary[n] = thr <= cfg.clip ? nd * thr : HUGE_VAL;
            }
            cell.params = "sigma=" + format_double(sigma) + ";alpha=" + format_double(cert.alpha) + ";c=" + format_double(cfg.clip);
            break;
          case LemmaId::Peeling:
            for (std::size_t n = 0; n < n_max; ++n)
              ev.boundary[n] = sg * peeling_threshold(static_cast<double>(n + 1), cfg.eta, delta);
            cell.in_certificate = sub_g.has_value();
            cell.params = "eta=" + format_double(cfg.eta) + ";sigma=" + format_double(sg);
            break;
        }
        events.push_back(std::move(ev));
        cells.push_back(cell);
      }
    }

    const int workers = std::max(1, cfg.workers);
    std::vector<std::vector<std::int64_t>> hits(static_cast<std::size_t>(workers), std::vector<std::int64_t>(events.size(), 0));
    std::vector<std::thread> pool;
    const std::int64_t chunk = (cfg.replications + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::int64_t b = w * chunk;
      const std::int64_t e = std::min(cfg.replications, b + chunk);
      if (b >= e) break;
      pool.emplace_back(run_generator, std::cref(spec), std::cref(events), cfg.seed, gi, b, e, std::ref(hits[static_cast<std::size_t>(w)]));
    }
    for (auto& t : pool) t.join();
    for (std::size_t e = 0; e < events.size(); ++e) {
      CertificationCell& cell = cells[first_cell + e];
      for (const auto& h : hits) cell.violations += h[e];
      cell.rate = static_cast<double>(cell.violations) / static_cast<double>(cell.replications);
      cell.band = violation_band(cell.delta, cell.replications);
      cell.pass = cell.rate <= cell.band;
    }
  }
  return cells;
}

}  // namespace eqolab
