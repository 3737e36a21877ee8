#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eqolab/agent.hpp"
#include "eqolab/bounds.hpp"
#include "eqolab/json_fwd.hpp"
#include "eqolab/mdp.hpp"
#include "eqolab/schedule.hpp"

namespace eqolab {

enum class RunMode { Rl, Bandit };

// One experiment document. Every key has a default (see default_config()).
struct ExperimentConfig {
  Json doc;
  std::string base_dir;  // relative fixture paths resolve against this
  RunMode mode = RunMode::Rl;
  std::int64_t horizon = 1;
  std::int64_t replications = 1;
  std::uint64_t seed = 0;
  int max_checkpoints = 64;
  std::vector<std::int64_t> extra_checkpoints;
  ProxyMode proxy_mode = ProxyMode::Table1Bound;
  GaussianWStar gaussian_w_star = GaussianWStar::Table;
  GapChoice gap_choice = GapChoice::HalfGapOrMin;
  std::vector<double> delta_grid;
  std::string output_dir;
};

Json default_config();
// Checks keys and types against the defaults and fills missing keys.
ExperimentConfig parse_config(const Json& doc, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);
// dotted.key=value; the value is parsed as JSON when possible, else taken as a string.
void apply_override(Json& doc, const std::string& assignment);
std::string config_hash(const Json& doc);

struct Instance {
  MdpSpec mdp;
  ValueTables vt;
  VarianceProxyTables proxies;
  EffectiveGaps gaps;
  InstanceDims dims;
  BonusSchedule schedule;
  std::string fixture_hash;
};

MdpSpec load_fixture(const ExperimentConfig& cfg);
Instance build_instance(const ExperimentConfig& cfg);
Instance build_instance(const MdpSpec& mdp, const std::string& schedule_name, const Json& schedule_params,
                        std::int64_t horizon, ProxyMode proxy_mode = ProxyMode::Table1Bound,
                        GaussianWStar gaussian_w_star = GaussianWStar::Table,
                        GapChoice gap_choice = GapChoice::HalfGapOrMin);

// Log-spaced checkpoints in [1, K], at most max_points, always containing K, merged with extra.
std::vector<std::int64_t> checkpoint_schedule(std::int64_t K, int max_points = 64,
                                              const std::vector<std::int64_t>& extra = {});

struct RegretEnsemble {
  std::int64_t horizon = 0;
  std::int64_t replications = 0;
  std::vector<std::int64_t> checkpoints;
  std::vector<double> regret;  // replications × checkpoints, row-major
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 0;
  std::string config_hash;
  std::string fixture_hash;
  Json config = Json::object();

  double at(std::int64_t r, std::size_t c) const {
    return regret[static_cast<std::size_t>(r) * checkpoints.size() + c];
  }
  std::vector<double> column(std::size_t c) const;
  std::size_t final_column() const { return checkpoints.size() - 1; }
};

struct TraceRow {
  std::int64_t replication = 0;
  std::int64_t k = 0;
  Transition step;
};

struct EnsembleOptions {
  RunMode mode = RunMode::Rl;
  std::int64_t horizon = 1;
  std::int64_t replications = 1;
  std::uint64_t seed = 0;
  int max_checkpoints = 64;
  std::vector<std::int64_t> extra_checkpoints;
  int workers = 1;
  bool collect_traces = false;
};

RegretEnsemble run_ensemble(const Instance& inst, const EnsembleOptions& opts, std::vector<TraceRow>* traces = nullptr);
RegretEnsemble run_ensemble(const ExperimentConfig& cfg, int workers, std::vector<TraceRow>* traces = nullptr);

void write_ensemble(const RegretEnsemble& e, const std::string& csv_path);
RegretEnsemble read_ensemble(const std::string& csv_path);
void write_traces(const std::vector<TraceRow>& rows, const std::string& csv_path);

struct QuantileEstimate {
  double delta = 1.0;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::int64_t index = 1;  // 1-based order statistic
  std::int64_t lower_index = 1;
  std::int64_t upper_index = 1;
  double coverage = 0.0;   // exact binomial coverage of [lower, upper]
};

inline constexpr double kBandLevel = 0.95;

QuantileEstimate empirical_quantile(std::vector<double> column, double delta);
QuantileEstimate empirical_quantile(const RegretEnsemble& e, double delta, std::size_t checkpoint);

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

MeanEstimate empirical_mean(const std::vector<double>& column);
MeanEstimate empirical_mean(const RegretEnsemble& e, std::size_t checkpoint);

struct ViolationEntry {
  double delta = 1.0;
  QuantileEstimate quantile;
  double bound = 0.0;
  bool vacuous = false;
  bool flagged = false;
  double margin = 0.0;  // bound / upper band edge
};

struct ViolationReport {
  std::vector<ViolationEntry> entries;
  std::int64_t skipped_below_resolution = 0;
  bool pass = true;
  double min_margin = 0.0;
};

ViolationReport compare(const RegretEnsemble& e, const BoundCurve& curve);

// Bound evaluation driven by the "bound" section of a config.
BoundCurve evaluate_bound(const ExperimentConfig& cfg, const Instance& inst);
void write_bound_curve(const BoundCurve& curve, const std::string& csv_path, const Json& provenance);
BoundCurve read_bound_curve(const std::string& csv_path, Json* provenance = nullptr);

}  // namespace eqolab
