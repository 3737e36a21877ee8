#include "eqolab/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "eqolab/concentration.hpp"
#include "eqolab/format.hpp"
#include "eqolab/harness.hpp"

namespace eqolab {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::FixtureNotFound:
    case ErrorKind::IoError:
      return kExitMissingInput;
    case ErrorKind::ProvenanceMismatch:
    case ErrorKind::ResolutionMismatch:
      return kExitProvenanceMismatch;
    default:
      return kExitInvalidParameter;
  }
}

namespace {

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  int workers = 0;
  bool quiet = false;
};

int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// Loads the config document, applies overrides and the output-directory default.
ExperimentConfig prepare_config(const CommonOptions& o) {
  std::ifstream in(o.config);
  if (!in) fail(ErrorKind::FixtureNotFound, "config not found: " + o.config);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ConfigError, "malformed config " + o.config + ": " + e.what());
  }
  for (const auto& ov : o.overrides) apply_override(doc, ov);
  if (!doc.contains("output_dir")) {
    if (const char* env = std::getenv("EQOLAB_OUTPUT_DIR"); env != nullptr && *env != '\0') doc["output_dir"] = env;
  }
  if (!o.out.empty()) doc["output_dir"] = o.out;
  const fs::path parent = fs::path(o.config).parent_path();
  return parse_config(doc, parent.empty() ? "." : parent.string());
}

void print_summary(const RegretEnsemble& e) {
  const std::size_t c = e.final_column();
  const MeanEstimate m = empirical_mean(e, c);
  std::cout << "horizon " << e.horizon << ", replications " << e.replications << "\n";
  std::cout << "mean regret " << format_double(m.mean) << " (SE " << format_double(m.standard_error) << ")\n";
  for (double d : {0.5, 0.1, 0.05, 0.01}) {
    if (d * static_cast<double>(e.replications) < 1.0) continue;
    const QuantileEstimate q = empirical_quantile(e, d, c);
    std::cout << "quantile 1-" << format_double(d) << ": " << format_double(q.value) << " band [" << format_double(q.lower)
              << ", " << format_double(q.upper) << "]\n";
  }
}

struct SimulateResult {
  RegretEnsemble ensemble;
  std::string csv;
};

SimulateResult do_simulate(const ExperimentConfig& cfg, int workers, bool trace, const std::string& dir) {
  std::vector<TraceRow> rows;
  SimulateResult r;
  r.ensemble = run_ensemble(cfg, workers, trace ? &rows : nullptr);
  r.csv = (fs::path(dir) / "ensemble.csv").string();
  write_ensemble(r.ensemble, r.csv);
  if (trace) write_traces(rows, (fs::path(dir) / "traces.csv").string());
  return r;
}

struct BoundsResult {
  BoundCurve curve;
  std::string csv;
};

BoundsResult do_bounds(const ExperimentConfig& cfg, const std::string& dir) {
  const Instance inst = build_instance(cfg);
  BoundsResult r;
  r.curve = evaluate_bound(cfg, inst);
  r.csv = (fs::path(dir) / "bound.csv").string();
  Json prov{{"config_hash", config_hash(cfg.doc)}, {"fixture_hash", inst.fixture_hash}, {"config", cfg.doc}};
  write_bound_curve(r.curve, r.csv, prov);
  return r;
}

Json report_json(const ViolationReport& rep) {
  Json rows = Json::array();
  for (const auto& v : rep.entries) {
    rows.push_back(Json{{"delta", v.delta},
                        {"quantile", v.quantile.value},
                        {"band_lower", v.quantile.lower},
                        {"band_upper", v.quantile.upper},
                        {"coverage", v.quantile.coverage},
                        {"bound", format_double(v.bound)},
                        {"vacuous", v.vacuous},
                        {"flagged", v.flagged},
                        {"margin", format_double(v.margin)}});
  }
  return Json{{"pass", rep.pass},
              {"min_margin", format_double(rep.min_margin)},
              {"skipped_below_resolution", rep.skipped_below_resolution},
              {"entries", rows}};
}

int do_compare(const std::string& ensemble_path, const std::string& bound_path, const std::string& report_path, bool quiet) {
  const RegretEnsemble e = read_ensemble(ensemble_path);
  Json prov;
  const BoundCurve curve = read_bound_curve(bound_path, &prov);
  if (curve.horizon != e.horizon) {
    fail(ErrorKind::ProvenanceMismatch, "horizon mismatch: ensemble " + std::to_string(e.horizon) + ", bound " +
                                            std::to_string(curve.horizon));
  }
  const std::string bound_fixture = prov.value("fixture_hash", std::string());
  if (bound_fixture != e.fixture_hash) {
    fail(ErrorKind::ProvenanceMismatch, "fixture hash mismatch: ensemble " + e.fixture_hash + ", bound " + bound_fixture);
  }
  const ViolationReport rep = compare(e, curve);
  Json j = report_json(rep);
  j["ensemble"] = ensemble_path;
  j["bound"] = bound_path;
  j["theorem"] = curve.theorem;
  j["ensemble_config_hash"] = e.config_hash;
  j["bound_config_hash"] = prov.value("config_hash", std::string());
  if (!report_path.empty()) {
    const fs::path p(report_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(report_path);
    if (!out) fail(ErrorKind::IoError, "cannot write " + report_path);
    out << j.dump(2) << '\n';
  }
  if (!quiet) {
    std::printf("%-14s %-14s %-14s %-14s %s\n", "delta", "quantile", "band_upper", "bound", "status");
    for (const auto& v : rep.entries) {
      std::printf("%-14.6g %-14.6g %-14.6g %-14.6g %s\n", v.delta, v.quantile.value, v.quantile.upper, v.bound,
                  v.vacuous ? "vacuous" : v.flagged ? "VIOLATED" : "ok");
    }
    std::printf("%s: %zu δ points checked, %lld below resolution, min margin %s\n", rep.pass ? "PASS" : "FAIL",
                rep.entries.size(), static_cast<long long>(rep.skipped_below_resolution), format_double(rep.min_margin).c_str());
  }
  return rep.pass ? kExitPass : kExitCompareFail;
}

std::vector<std::pair<std::string, std::vector<Json>>> sweep_axes(const Json& grid) {
  std::vector<std::pair<std::string, std::vector<Json>>> axes;
  for (auto it = grid.begin(); it != grid.end(); ++it) {
    if (!it.value().is_array()) fail(ErrorKind::ConfigError, "sweep.grid." + it.key() + " must be an array of values");
    std::vector<Json> vals(it.value().begin(), it.value().end());
    axes.emplace_back(it.key(), std::move(vals));
  }
  return axes;
}

int do_sweep(const CommonOptions& o) {
  const ExperimentConfig base = prepare_config(o);
  const auto axes = sweep_axes(base.doc["sweep"]["grid"]);
  std::int64_t points = axes.empty() ? 0 : 1;
  const std::int64_t cap = base.doc["sweep"]["max_points"].get<std::int64_t>();
  for (const auto& a : axes) {
    points *= static_cast<std::int64_t>(a.second.size());
    if (points > cap) break;
  }
  if (points == 0) fail(ErrorKind::ConfigError, "sweep grid is empty");
  if (points > cap) fail(ErrorKind::ConfigError, "sweep grid exceeds the cap of " + std::to_string(cap) + " points");

  const int workers = o.workers > 0 ? o.workers : default_workers();
  const fs::path root(base.output_dir);
  Json index{{"config_hash", config_hash(base.doc)}, {"points", points}, {"runs", Json::array()}};
  std::vector<std::size_t> digit(axes.size(), 0);
  bool all_pass = true;
  for (std::int64_t n = 0; n < points; ++n) {
    Json doc = base.doc;
    doc.erase("sweep");
    Json assigned = Json::object();
    for (std::size_t i = 0; i < axes.size(); ++i) {
      const Json& v = axes[i].second[digit[i]];
      apply_override(doc, axes[i].first + "=" + v.dump());
      assigned[axes[i].first] = v;
    }
    char name[32];
    std::snprintf(name, sizeof name, "run_%03lld", static_cast<long long>(n));
    const fs::path dir = root / name;
    doc["output_dir"] = dir.string();
    const ExperimentConfig cfg = parse_config(doc, base.base_dir);
    const SimulateResult sim = do_simulate(cfg, workers, false, dir.string());
    const BoundsResult b = do_bounds(cfg, dir.string());
    const std::string report = (dir / "report.json").string();
    const int code = do_compare(sim.csv, b.csv, report, true);
    all_pass = all_pass && code == kExitPass;
    const MeanEstimate m = empirical_mean(sim.ensemble, sim.ensemble.final_column());
    index["runs"].push_back(Json{{"run", name},
                                 {"overrides", assigned},
                                 {"config_hash", config_hash(cfg.doc)},
                                 {"ensemble", sim.csv},
                                 {"bound", b.csv},
                                 {"report", report},
                                 {"mean_regret", m.mean},
                                 {"pass", code == kExitPass}});
    if (!o.quiet) {
      std::cout << name << ' ' << assigned.dump() << " mean " << format_double(m.mean) << (code == kExitPass ? " pass" : " FAIL")
                << "\n";
    }
    for (std::size_t i = axes.size(); i-- > 0;) {
      if (++digit[i] < axes[i].second.size()) break;
      digit[i] = 0;
    }
  }
  fs::create_directories(root);
  std::ofstream out(root / "index.json");
  if (!out) fail(ErrorKind::IoError, "cannot write " + (root / "index.json").string());
  out << index.dump(2) << '\n';
  if (!o.quiet) std::cout << "wrote " << points << " runs to " << root.string() << "\n";
  return all_pass ? kExitPass : kExitCompareFail;
}

int do_conc_test(const CertificationConfig& cc, const std::string& out_dir, bool quiet) {
  const auto cells = run_certification(cc);
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / "conc_test.csv").string();
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  out << "lemma,generator,params,delta,violations,replications,rate,band,in_certificate,pass\n";
  bool all = true;
  for (const auto& c : cells) {
    out << lemma_name(c.lemma) << ',' << generator_name(c.generator) << ",\"" << c.params << "\"," << format_double(c.delta)
        << ',' << c.violations << ',' << c.replications << ',' << format_double(c.rate) << ',' << format_double(c.band) << ','
        << (c.in_certificate ? 1 : 0) << ',' << (c.pass ? 1 : 0) << '\n';
    if (c.in_certificate) all = all && c.pass;
    if (!quiet) {
      std::printf("%-22s %-26s δ=%-6g rate=%-10.6g band=%-10.6g %s%s\n", std::string(lemma_name(c.lemma)).c_str(),
                  std::string(generator_name(c.generator)).c_str(), c.delta, c.rate, c.band, c.pass ? "pass" : "FAIL",
                  c.in_certificate ? "" : " (outside certificate)");
    }
  }
  if (!quiet) std::cout << (all ? "PASS" : "FAIL") << ": wrote " << path << "\n";
  return all ? kExitPass : kExitCompareFail;
}

void add_common(CLI::App* cmd, CommonOptions& o, bool workers) {
  cmd->add_option("--config", o.config, "experiment JSON document")->required();
  cmd->add_option("--set", o.overrides, "override a config key: dotted.key=value (repeatable)");
  cmd->add_option("--out", o.out, "output directory");
  if (workers) cmd->add_option("--workers", o.workers, "worker threads (default: hardware concurrency)")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--quiet", o.quiet, "suppress stdout except errors");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Distributional-regret laboratory for optimism-based exploration"};
  app.require_subcommand(1);

  CommonOptions sim_o, bnd_o, swp_o;
  bool trace = false;
  auto* sim = app.add_subcommand("simulate", "run seeded replications and write an ensemble CSV");
  add_common(sim, sim_o, true);
  sim->add_flag("--trace", trace, "also write per-step traces");

  auto* bnd = app.add_subcommand("bounds", "evaluate a regret bound over the δ grid");
  add_common(bnd, bnd_o, false);

  std::string cmp_ens, cmp_bound, cmp_out;
  bool cmp_quiet = false;
  auto* cmp = app.add_subcommand("compare", "check empirical quantiles against a bound curve");
  cmp->add_option("--ensemble", cmp_ens, "ensemble CSV")->required();
  cmp->add_option("--bound", cmp_bound, "bound CSV")->required();
  cmp->add_option("--out", cmp_out, "report JSON path");
  cmp->add_flag("--quiet", cmp_quiet, "suppress stdout except errors");

  CertificationConfig cc;
  std::string conc_out = "out";
  bool conc_quiet = false;
  int conc_workers = 0;
  auto* conc = app.add_subcommand("conc-test", "Monte-Carlo certification of the concentration inequalities");
  conc->add_option("--replications", cc.replications, "sequences per cell")->check(CLI::PositiveNumber);
  conc->add_option("--n-max", cc.n_max, "steps per sequence")->check(CLI::PositiveNumber);
  conc->add_option("--seed", cc.seed, "master seed");
  conc->add_option("--deltas", cc.deltas, "confidence levels")->check(CLI::Range(1e-12, 1.0));
  conc->add_option("--out", conc_out, "output directory");
  conc->add_option("--workers", conc_workers, "worker threads")->check(CLI::NonNegativeNumber);
  conc->add_flag("--quiet", conc_quiet, "suppress stdout except errors");

  auto* swp = app.add_subcommand("sweep", "run a Cartesian parameter grid");
  add_common(swp, swp_o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidParameter;
  }

  try {
    if (*sim) {
      const ExperimentConfig cfg = prepare_config(sim_o);
      const SimulateResult r = do_simulate(cfg, sim_o.workers > 0 ? sim_o.workers : default_workers(), trace, cfg.output_dir);
      if (!sim_o.quiet) {
        print_summary(r.ensemble);
        std::cout << "wrote " << r.csv << "\n";
      }
      return kExitPass;
    }
    if (*bnd) {
      const ExperimentConfig cfg = prepare_config(bnd_o);
      const BoundsResult r = do_bounds(cfg, cfg.output_dir);
      if (!bnd_o.quiet) {
        std::int64_t vac = 0;
        for (const auto& p : r.curve.points) vac += p.vacuous ? 1 : 0;
        std::cout << r.curve.theorem << ": " << r.curve.points.size() << " rows";
        if (vac > 0) std::cout << ", " << vac << " vacuous (+inf)";
        std::cout << "\nwrote " << r.csv << "\n";
      }
      return kExitPass;
    }
    if (*cmp) return do_compare(cmp_ens, cmp_bound, cmp_out, cmp_quiet);
    if (*conc) {
      cc.workers = conc_workers > 0 ? conc_workers : default_workers();
      return do_conc_test(cc, conc_out, conc_quiet);
    }
    if (*swp) return do_sweep(swp_o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error [IoError]: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error [ConfigError]: " << e.what() << "\n";
    return kExitInvalidParameter;
  }
  return kExitInvalidParameter;
}

}  // namespace eqolab
