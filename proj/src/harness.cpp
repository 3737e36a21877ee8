#include "eqolab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <boost/math/distributions/binomial.hpp>

#include "eqolab/error.hpp"
#include "eqolab/format.hpp"
#include "eqolab/mdp_json.hpp"
#include "eqolab/ucb.hpp"

namespace eqolab {

namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Subtrees whose keys are free-form (validated later by the consumer).
bool free_form(const std::string& path) {
  return path == "schedule.params" || path == "bound.params" || path == "sweep.grid" || path == "fixture";
}

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

bool same_type(const Json& want, const Json& got) {
  if (want.is_number()) return got.is_number();
  if (want.is_string()) return got.is_string();
  if (want.is_boolean()) return got.is_boolean();
  if (want.is_object()) return got.is_object();
  if (want.is_array()) return got.is_array();
  return true;
}

const char* type_label(const Json& j) {
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_boolean()) return "boolean";
  if (j.is_object()) return "object";
  if (j.is_array()) return "array";
  return "null";
}

void merge_checked(Json& base, const Json& over, const std::string& path) {
  if (!over.is_object()) fail(ErrorKind::ConfigError, "config section '" + (path.empty() ? "<root>" : path) + "' must be an object");
  for (auto it = over.begin(); it != over.end(); ++it) {
    const std::string key = join(path, it.key());
    if (!base.contains(it.key())) fail(ErrorKind::ConfigError, "unknown config key '" + key + "'");
    Json& slot = base[it.key()];
    if (key == "fixture") {
      if (!it.value().is_string() && !it.value().is_object()) fail(ErrorKind::ConfigError, "'fixture' must be a path or an inline object");
      slot = it.value();
      continue;
    }
    if (!same_type(slot, it.value())) {
      fail(ErrorKind::ConfigError, "config key '" + key + "' expects " + type_label(slot) + ", got " + type_label(it.value()));
    }
    if (slot.is_object() && !free_form(key)) {
      merge_checked(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

std::int64_t integer_at(const Json& j, const std::string& key, std::int64_t lo) {
  const double x = j.get<double>();
  if (!(std::floor(x) == x) || x < static_cast<double>(lo) || x > 9.0e18) {
    fail(ErrorKind::ConfigError, "config key '" + key + "' must be an integer ≥ " + std::to_string(lo));
  }
  return j.is_number_integer() ? j.get<std::int64_t>() : static_cast<std::int64_t>(x);
}

GapChoice parse_gap_choice(const std::string& s) {
  if (s == "half-gap-or-min") return GapChoice::HalfGapOrMin;
  if (s == "return-gap") return GapChoice::ReturnGap;
  fail(ErrorKind::ConfigError, "unknown gap_choice '" + s + "'");
}

Json parse_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return Json(text);
  }
}

std::string sidecar_path(const std::string& csv_path) {
  fs::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::FixtureNotFound, "cannot open " + path);
  return in;
}

Json read_json_file(const std::string& path) {
  std::ifstream in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ConfigError, "malformed JSON in " + path + ": " + e.what());
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double x = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return x;
  } catch (const std::exception&) {
    fail(ErrorKind::IoError, "bad number '" + s + "' in " + where);
  }
}

double bandit_sigma(const MdpSpec& mdp) {
  double sigma = 0.0;
  for (int a = 0; a < mdp.A; ++a) {
    const RewardModel& r = mdp.reward(0, 0, a);
    switch (r.kind) {
      case RewardKind::Gaussian: sigma = std::max(sigma, std::sqrt(r.variance)); break;
      case RewardKind::BoundedBernoulliScaled: sigma = std::max(sigma, 0.5 * r.range); break;
      case RewardKind::Degenerate: break;
      case RewardKind::ExponentialShifted:
        fail(ErrorKind::ParameterConstraintViolation, "exponential rewards are not sub-Gaussian; pass bound.params.sigma");
    }
  }
  return sigma;
}

std::vector<double> bandit_gaps(const Instance& inst) {
  std::vector<double> gaps(static_cast<std::size_t>(inst.mdp.A));
  for (int a = 0; a < inst.mdp.A; ++a) gaps[static_cast<std::size_t>(a)] = inst.vt.gap_at(0, 0, a);
  return gaps;
}

double number_or(const Json& params, const char* key, double fallback) {
  return params.contains(key) ? params.at(key).get<double>() : fallback;
}

void reject_unknown_params(const Json& params, std::initializer_list<const char*> allowed, const std::string& theorem) {
  for (auto it = params.begin(); it != params.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(ErrorKind::ConfigError, "unknown parameter '" + it.key() + "' for bound " + theorem);
  }
}

}  // namespace

Json default_config() {
  return Json{
      {"fixture", ""},
      {"mode", "rl"},
      {"horizon", 1000},
      {"replications", 100},
      {"seed", 1},
      {"checkpoints", 64},
      {"extra_checkpoints", Json::array()},
      {"schedule", {{"name", "sqrt-growth"}, {"params", Json::object()}}},
      {"proxies", {{"mode", "table1-bound"}, {"gaussian_w_star", "table"}}},
      {"gap_choice", "half-gap-or-min"},
      {"delta_grid", {{"min", 1e-8}, {"max", 1.0}, {"points", 200}}},
      {"bound", {{"theorem", "rl-gap-independent"}, {"params", Json::object()}}},
      {"output_dir", "out"},
      {"sweep", {{"grid", Json::object()}, {"max_points", 256}}},
  };
}

ExperimentConfig parse_config(const Json& doc, const std::string& base_dir) {
  Json full = default_config();
  merge_checked(full, doc, "");

  ExperimentConfig c;
  c.doc = full;
  c.base_dir = base_dir;
  const std::string mode = full["mode"].get<std::string>();
  if (mode == "rl") {
    c.mode = RunMode::Rl;
  } else if (mode == "bandit") {
    c.mode = RunMode::Bandit;
  } else {
    fail(ErrorKind::ConfigError, "mode must be 'rl' or 'bandit', got '" + mode + "'");
  }
  c.horizon = integer_at(full["horizon"], "horizon", 1);
  c.replications = integer_at(full["replications"], "replications", 1);
  c.seed = static_cast<std::uint64_t>(integer_at(full["seed"], "seed", 0));
  c.max_checkpoints = static_cast<int>(integer_at(full["checkpoints"], "checkpoints", 1));
  for (const Json& k : full["extra_checkpoints"]) {
    if (!k.is_number()) fail(ErrorKind::ConfigError, "extra_checkpoints must hold integers");
    const std::int64_t v = integer_at(k, "extra_checkpoints", 1);
    if (v > c.horizon) fail(ErrorKind::ConfigError, "extra checkpoint beyond the horizon");
    c.extra_checkpoints.push_back(v);
  }
  try {
    c.proxy_mode = parse_proxy_mode(full["proxies"]["mode"].get<std::string>());
    c.gaussian_w_star = parse_gaussian_w_star(full["proxies"]["gaussian_w_star"].get<std::string>());
  } catch (const Error& e) {
    fail(ErrorKind::ConfigError, e.what());
  }
  c.gap_choice = parse_gap_choice(full["gap_choice"].get<std::string>());
  const Json& g = full["delta_grid"];
  const auto points = integer_at(g["points"], "delta_grid.points", 2);
  c.delta_grid = log_delta_grid(g["min"].get<double>(), g["max"].get<double>(), static_cast<int>(points));
  c.output_dir = full["output_dir"].get<std::string>();
  if (!full["schedule"]["name"].is_string()) fail(ErrorKind::ConfigError, "schedule.name must be a string");
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  const Json doc = read_json_file(path);
  const fs::path parent = fs::path(path).parent_path();
  return parse_config(doc, parent.empty() ? "." : parent.string());
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorKind::ConfigError, "override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const Json value = parse_value(assignment.substr(eq + 1));

  const Json defaults = default_config();
  const Json* schema = &defaults;
  Json* node = &doc;
  std::string path;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) fail(ErrorKind::ConfigError, "empty segment in override key '" + key + "'");
    path = join(path, part);
    const bool free = schema == nullptr;
    if (!free && !schema->contains(part)) fail(ErrorKind::ConfigError, "unknown config key '" + path + "'");
    const Json* sub = free ? nullptr : &(*schema)[part];
    if (!node->is_object()) *node = Json::object();
    if (dot == std::string::npos) {
      if (sub != nullptr && path != "fixture" && !same_type(*sub, value)) {
        fail(ErrorKind::ConfigError, "config key '" + path + "' expects " + type_label(*sub) + ", got " + type_label(value));
      }
      if (free && node->contains(part) && !same_type((*node)[part], value)) {
        fail(ErrorKind::ConfigError, "config key '" + path + "' expects " + type_label((*node)[part]) + ", got " + type_label(value));
      }
      (*node)[part] = value;
      return;
    }
    if (!node->contains(part)) (*node)[part] = Json::object();
    node = &(*node)[part];
    schema = (sub == nullptr || free_form(path)) ? nullptr : sub;
    start = dot + 1;
  }
}

std::string config_hash(const Json& doc) {
  Json copy = doc;
  if (copy.is_object()) {
    copy.erase("output_dir");
    copy.erase("sweep");
  }
  return fnv1a_hex(copy.dump());
}

MdpSpec load_fixture(const ExperimentConfig& cfg) {
  const Json& f = cfg.doc.at("fixture");
  if (f.is_object()) return mdp_from_json(f);
  const std::string name = f.get<std::string>();
  if (name.empty()) fail(ErrorKind::FixtureNotFound, "no fixture given");
  fs::path p(name);
  if (p.is_relative()) {
    const fs::path local = fs::path(cfg.base_dir) / p;
    if (fs::exists(local)) p = local;
  }
  if (!fs::exists(p)) fail(ErrorKind::FixtureNotFound, "fixture not found: " + name);
  return load_mdp(p.string());
}

Instance build_instance(const MdpSpec& mdp, const std::string& schedule_name, const Json& schedule_params,
                        std::int64_t horizon, ProxyMode proxy_mode, GaussianWStar gaussian_w_star,
                        GapChoice gap_choice) {
  if (horizon < 1) fail(ErrorKind::ConfigError, "horizon must be ≥ 1");
  ValueTables vt = optimal_values(mdp);
  VarianceProxyTables px = variance_proxy(mdp, vt, proxy_mode, gaussian_w_star);
  EffectiveGaps gaps = effective_gap(mdp, vt, gap_choice);
  InstanceDims dims{mdp.S, mdp.A, mdp.H, mdp.v_max, horizon, px.w_diff_star, px.v_alpha};
  BonusSchedule sch;
  try {
    sch = make_schedule(schedule_name, schedule_params, dims);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidExponents || e.kind() == ErrorKind::NonPositiveConstant ||
        e.kind() == ErrorKind::ScheduleConstructionError) {
      throw;
    }
    fail(ErrorKind::ScheduleConstructionError, e.what());
  }
  std::string hash = mdp_hash(mdp);
  return Instance{mdp, std::move(vt), std::move(px), std::move(gaps), dims, std::move(sch), std::move(hash)};
}

Instance build_instance(const ExperimentConfig& cfg) {
  const MdpSpec mdp = load_fixture(cfg);
  if (cfg.mode == RunMode::Bandit && !mdp.is_bandit()) fail(ErrorKind::ConfigError, "bandit mode needs a fixture with S = H = 1");
  return build_instance(mdp, cfg.doc["schedule"]["name"].get<std::string>(), cfg.doc["schedule"]["params"], cfg.horizon,
                        cfg.proxy_mode, cfg.gaussian_w_star, cfg.gap_choice);
}

std::vector<std::int64_t> checkpoint_schedule(std::int64_t K, int max_points, const std::vector<std::int64_t>& extra) {
  if (K < 1 || max_points < 1) fail(ErrorKind::InvalidArgument, "checkpoint schedule needs K ≥ 1 and at least one point");
  std::vector<std::int64_t> out;
  if (max_points > 1) {
    const double lk = std::log(static_cast<double>(K));
    for (int i = 0; i < max_points; ++i) {
      const double x = std::exp(lk * i / (max_points - 1));
      out.push_back(std::clamp<std::int64_t>(static_cast<std::int64_t>(std::llround(x)), 1, K));
    }
  }
  for (std::int64_t k : extra) {
    if (k < 1 || k > K) fail(ErrorKind::InvalidArgument, "extra checkpoint outside [1, K]");
    out.push_back(k);
  }
  out.push_back(K);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> RegretEnsemble::column(std::size_t c) const {
  if (c >= checkpoints.size()) fail(ErrorKind::InvalidArgument, "checkpoint column out of range");
  std::vector<double> out(static_cast<std::size_t>(replications));
  for (std::int64_t r = 0; r < replications; ++r) out[static_cast<std::size_t>(r)] = at(r, c);
  return out;
}

RegretEnsemble run_ensemble(const Instance& inst, const EnsembleOptions& opts, std::vector<TraceRow>* traces) {
  if (opts.replications < 1) fail(ErrorKind::ConfigError, "replications must be ≥ 1");
  if (opts.horizon < 1) fail(ErrorKind::ConfigError, "horizon must be ≥ 1");
  if (inst.schedule.k_max() < opts.horizon) fail(ErrorKind::ScheduleConstructionError, "schedule is shorter than the horizon");
  if (opts.mode == RunMode::Bandit && !inst.mdp.is_bandit()) fail(ErrorKind::ConfigError, "bandit mode needs S = H = 1");

  RegretEnsemble e;
  e.horizon = opts.horizon;
  e.replications = opts.replications;
  e.checkpoints = checkpoint_schedule(opts.horizon, opts.max_checkpoints, opts.extra_checkpoints);
  e.master_seed = opts.seed;
  e.fixture_hash = inst.fixture_hash;
  e.seeds.resize(static_cast<std::size_t>(opts.replications));
  for (std::int64_t r = 0; r < opts.replications; ++r) e.seeds[static_cast<std::size_t>(r)] = derive_seed(opts.seed, static_cast<std::uint64_t>(r));
  const std::size_t C = e.checkpoints.size();
  e.regret.assign(static_cast<std::size_t>(opts.replications) * C, 0.0);

  const bool want_traces = opts.collect_traces && traces != nullptr;
  std::vector<std::vector<TraceRow>> per_rep(want_traces ? static_cast<std::size_t>(opts.replications) : 0);
  const std::vector<double> gaps = opts.mode == RunMode::Bandit ? bandit_gaps(inst) : std::vector<double>{};

  auto run_one = [&](std::int64_t r) {
    Rng rng(e.seeds[static_cast<std::size_t>(r)]);
    double* row = e.regret.data() + static_cast<std::size_t>(r) * C;
    std::size_t next_cp = 0;
    double total = 0.0;
    if (opts.mode == RunMode::Bandit) {
      BanditState st(inst.mdp.A);
      for (std::int64_t t = 1; t <= opts.horizon; ++t) {
        const BanditStepResult x = bandit_step(st, inst.mdp, inst.schedule, t, rng);
        total += gaps[static_cast<std::size_t>(x.arm)];
        if (want_traces) per_rep[static_cast<std::size_t>(r)].push_back({r, t, Transition{0, 0, x.arm, x.reward, 0}});
        if (t == e.checkpoints[next_cp]) row[next_cp++] = total;
      }
    } else {
      EqoAgent agent(inst.mdp, inst.vt, inst.schedule);
      for (std::int64_t k = 1; k <= opts.horizon; ++k) {
        const EpisodeTrace& tr = agent.run_episode(rng);
        total += std::max(0.0, tr.regret);
        if (want_traces)
          for (const Transition& s : tr.steps) per_rep[static_cast<std::size_t>(r)].push_back({r, k, s});
        if (k == e.checkpoints[next_cp]) row[next_cp++] = total;
      }
    }
  };

  const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(std::min<std::int64_t>(opts.replications, 1024))));
  if (workers == 1) {
    for (std::int64_t r = 0; r < opts.replications; ++r) run_one(r);
  } else {
    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (!failed.load()) {
          const std::int64_t r = next.fetch_add(1);
          if (r >= opts.replications) return;
          try {
            run_one(r);
          } catch (...) {
            if (!failed.exchange(true)) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  if (want_traces) {
    traces->clear();
    for (auto& v : per_rep) traces->insert(traces->end(), v.begin(), v.end());
  }
  return e;
}

RegretEnsemble run_ensemble(const ExperimentConfig& cfg, int workers, std::vector<TraceRow>* traces) {
  const Instance inst = build_instance(cfg);
  EnsembleOptions o;
  o.mode = cfg.mode;
  o.horizon = cfg.horizon;
  o.replications = cfg.replications;
  o.seed = cfg.seed;
  o.max_checkpoints = cfg.max_checkpoints;
  o.extra_checkpoints = cfg.extra_checkpoints;
  o.workers = workers;
  o.collect_traces = traces != nullptr;
  RegretEnsemble e = run_ensemble(inst, o, traces);
  e.config = cfg.doc;
  e.config_hash = config_hash(cfg.doc);
  return e;
}

void write_ensemble(const RegretEnsemble& e, const std::string& csv_path) {
  {
    std::ofstream out = open_out(csv_path);
    out << "replication,k,regret\n";
    const std::size_t C = e.checkpoints.size();
    for (std::int64_t r = 0; r < e.replications; ++r)
      for (std::size_t c = 0; c < C; ++c) out << r << ',' << e.checkpoints[c] << ',' << format_double(e.at(r, c)) << '\n';
    if (!out) fail(ErrorKind::IoError, "write failed: " + csv_path);
  }
  Json side{
      {"horizon", e.horizon},
      {"replications", e.replications},
      {"checkpoints", e.checkpoints},
      {"master_seed", e.master_seed},
      {"seeds", e.seeds},
      {"config_hash", e.config_hash},
      {"fixture_hash", e.fixture_hash},
      {"config", e.config},
  };
  std::ofstream out = open_out(sidecar_path(csv_path));
  out << side.dump(2) << '\n';
}

RegretEnsemble read_ensemble(const std::string& csv_path) {
  const Json side = read_json_file(sidecar_path(csv_path));
  RegretEnsemble e;
  try {
    e.horizon = side.at("horizon").get<std::int64_t>();
    e.replications = side.at("replications").get<std::int64_t>();
    e.checkpoints = side.at("checkpoints").get<std::vector<std::int64_t>>();
    e.master_seed = side.at("master_seed").get<std::uint64_t>();
    e.seeds = side.at("seeds").get<std::vector<std::uint64_t>>();
    e.config_hash = side.at("config_hash").get<std::string>();
    e.fixture_hash = side.at("fixture_hash").get<std::string>();
    e.config = side.value("config", Json::object());
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::IoError, "malformed ensemble sidecar: " + std::string(ex.what()));
  }
  if (e.checkpoints.empty() || e.replications < 1) fail(ErrorKind::IoError, "empty ensemble sidecar");
  const std::size_t C = e.checkpoints.size();
  e.regret.assign(static_cast<std::size_t>(e.replications) * C, std::numeric_limits<double>::quiet_NaN());
  std::ifstream in = open_in(csv_path);
  std::string line;
  if (!std::getline(in, line) || line != "replication,k,regret") fail(ErrorKind::IoError, "unexpected ensemble header in " + csv_path);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) fail(ErrorKind::IoError, "bad ensemble row: " + line);
    const auto r = static_cast<std::int64_t>(parse_number(cells[0], csv_path));
    const auto k = static_cast<std::int64_t>(parse_number(cells[1], csv_path));
    const auto it = std::find(e.checkpoints.begin(), e.checkpoints.end(), k);
    if (r < 0 || r >= e.replications || it == e.checkpoints.end()) fail(ErrorKind::IoError, "ensemble row outside sidecar shape: " + line);
    e.regret[static_cast<std::size_t>(r) * C + static_cast<std::size_t>(it - e.checkpoints.begin())] = parse_number(cells[2], csv_path);
    ++rows;
  }
  if (rows != e.regret.size()) fail(ErrorKind::IoError, "ensemble CSV row count does not match its sidecar");
  return e;
}

void write_traces(const std::vector<TraceRow>& rows, const std::string& csv_path) {
  std::ofstream out = open_out(csv_path);
  out << "replication,k,h,s,a,reward,next_state\n";
  for (const TraceRow& t : rows) {
    out << t.replication << ',' << t.k << ',' << t.step.h << ',' << t.step.s << ',' << t.step.a << ','
        << format_double(t.step.reward) << ',' << t.step.next_state << '\n';
  }
}

QuantileEstimate empirical_quantile(std::vector<double> column, double delta) {
  const auto R = static_cast<std::int64_t>(column.size());
  if (R < 1) fail(ErrorKind::InvalidArgument, "empty column");
  if (!(delta <= 1.0) || !(delta * static_cast<double>(R) >= 1.0 - 1e-9)) {
    fail(ErrorKind::DeltaBelowResolution, "δ = " + format_double(delta) + " is outside [1/R, 1] for R = " + std::to_string(R));
  }
  std::sort(column.begin(), column.end());
  const double q = std::clamp(1.0 - delta, 0.0, 1.0);
  const double pos = q * static_cast<double>(R);
  auto idx = static_cast<std::int64_t>(std::ceil(pos - 1e-9 * std::max(1.0, pos)));
  idx = std::clamp<std::int64_t>(idx, 1, R);

  const double tail = 0.5 * (1.0 - kBandLevel);
  const boost::math::binomial_distribution<double> bin(static_cast<double>(R), q);
  // F(j) = P(B ≤ j) with B ~ Bin(R, q); F(−1) = 0.
  auto F = [&](std::int64_t j) { return j < 0 ? 0.0 : j >= R ? 1.0 : boost::math::cdf(bin, static_cast<double>(j)); };
  auto upper_tail = [&](std::int64_t j) {
    return j < 0 ? 1.0 : j >= R ? 0.0 : boost::math::cdf(boost::math::complement(bin, static_cast<double>(j)));
  };

  std::int64_t L = 1;
  for (std::int64_t l = idx; l >= 1; --l) {
    if (F(l - 1) <= tail) {
      L = l;
      break;
    }
  }
  std::int64_t U = R;
  for (std::int64_t u = idx; u <= R; ++u) {
    if (upper_tail(u - 1) <= tail) {
      U = u;
      break;
    }
  }

  QuantileEstimate out;
  out.delta = delta;
  out.index = idx;
  out.lower_index = L;
  out.upper_index = U;
  out.value = column[static_cast<std::size_t>(idx - 1)];
  out.lower = column[static_cast<std::size_t>(L - 1)];
  out.upper = column[static_cast<std::size_t>(U - 1)];
  out.coverage = F(U - 1) - F(L - 1);
  return out;
}

QuantileEstimate empirical_quantile(const RegretEnsemble& e, double delta, std::size_t checkpoint) {
  return empirical_quantile(e.column(checkpoint), delta);
}

MeanEstimate empirical_mean(const std::vector<double>& column) {
  if (column.empty()) fail(ErrorKind::InvalidArgument, "empty column");
  const double n = static_cast<double>(column.size());
  double mean = 0.0;
  for (double x : column) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : column) ss += (x - mean) * (x - mean);
  MeanEstimate m;
  m.mean = mean;
  m.standard_error = column.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return m;
}

MeanEstimate empirical_mean(const RegretEnsemble& e, std::size_t checkpoint) { return empirical_mean(e.column(checkpoint)); }

ViolationReport compare(const RegretEnsemble& e, const BoundCurve& curve) {
  if (curve.horizon != e.horizon) {
    fail(ErrorKind::ResolutionMismatch, "bound curve is for horizon " + std::to_string(curve.horizon) + ", ensemble has " +
                                            std::to_string(e.horizon));
  }
  const std::vector<double> col = e.column(e.final_column());
  ViolationReport rep;
  rep.min_margin = kInf;
  const double R = static_cast<double>(e.replications);
  for (const BoundPoint& p : curve.points) {
    if (p.delta * R < 1.0 - 1e-9) {
      ++rep.skipped_below_resolution;
      continue;
    }
    ViolationEntry v;
    v.delta = p.delta;
    v.quantile = empirical_quantile(col, p.delta);
    v.bound = p.total;
    v.vacuous = p.vacuous || std::isinf(p.total);
    v.flagged = !v.vacuous && v.quantile.upper > p.total;
    v.margin = v.quantile.upper > 0.0 ? p.total / v.quantile.upper : (p.total >= 0.0 ? kInf : 0.0);
    rep.pass = rep.pass && !v.flagged;
    rep.min_margin = std::min(rep.min_margin, v.margin);
    rep.entries.push_back(v);
  }
  if (rep.entries.empty()) fail(ErrorKind::ResolutionMismatch, "no δ in the bound curve is within the ensemble resolution 1/R");
  return rep;
}

BoundCurve evaluate_bound(const ExperimentConfig& cfg, const Instance& inst) {
  const std::string theorem = cfg.doc["bound"]["theorem"].get<std::string>();
  const Json& params = cfg.doc["bound"]["params"];
  const Json& sp = inst.schedule.params();
  BoundCurve curve;
  curve.theorem = theorem;
  curve.horizon = cfg.horizon;
  Json resolved = Json::object();
  const std::int64_t K = cfg.horizon;

  if (theorem == "bandit-constant-c1" || theorem == "bandit-tight-ucb" || theorem == "bandit-minimax-display") {
    if (!inst.mdp.is_bandit()) fail(ErrorKind::ConfigError, theorem + " needs a bandit fixture");
    reject_unknown_params(params, {"form", "sigma"}, theorem);
    const std::vector<double> gaps = bandit_gaps(inst);
    const double sigma = number_or(params, "sigma", sp.contains("sigma") ? sp.at("sigma").get<double>() : bandit_sigma(inst.mdp));
    resolved["sigma"] = sigma;
    if (theorem == "bandit-tight-ucb") {
      if (inst.schedule.name() != "tight-ucb-c2") fail(ErrorKind::ConfigError, "bandit-tight-ucb needs the tight-ucb-c2 schedule");
      const DeltaRule rule = parse_delta_rule(sp.value("delta_rule", std::string("t-log-t")), sp.value("delta_param", 0.0));
      resolved["delta_rule"] = rule.name();
      resolved["delta_param"] = rule.param;
      for (double d : cfg.delta_grid) curve.points.push_back(bandit_bound_thm2(K, d, rule, sigma, gaps));
    } else if (theorem == "bandit-minimax-display") {
      for (double d : cfg.delta_grid) {
        BoundPoint p;
        p.delta = d;
        p.add("display", bandit_bound_minimax_display(static_cast<double>(K), d, sigma, gaps));
        p.finish();
        curve.points.push_back(p);
      }
    } else {
      const ExtReal c1 = inst.schedule.c1_at(1);
      if (c1.is_infinite()) fail(ErrorKind::ConfigError, "bandit-constant-c1 needs a finite c₁");
      const std::string form = params.value("form", std::string("formal"));
      BanditBoundForm f;
      if (form == "formal") {
        f = BanditBoundForm::Formal;
      } else if (form == "statement") {
        f = BanditBoundForm::Statement;
      } else if (form == "simplified") {
        f = BanditBoundForm::Simplified;
      } else {
        fail(ErrorKind::ConfigError, "unknown bandit bound form '" + form + "'");
      }
      resolved["form"] = form;
      resolved["c1"] = c1.value();
      for (double d : cfg.delta_grid) curve.points.push_back(bandit_bound_thm1(static_cast<double>(K), d, c1.value(), sigma, gaps, f));
    }
  } else if (theorem == "rl-gap-independent" || theorem == "rl-gap-dependent" || theorem == "corollary") {
    RlBoundInputs in{&inst.schedule, MdpDims::of(inst.mdp), &inst.proxies, inst.dims.log_factors()};
    GapBoundVariant variant = GapBoundVariant::EffectiveGap;
    CorollaryForm form = CorollaryForm::SqrtGrowth;
    CorollaryParams cp;
    if (theorem == "rl-gap-independent") {
      reject_unknown_params(params, {}, theorem);
    } else if (theorem == "rl-gap-dependent") {
      reject_unknown_params(params, {"variant"}, theorem);
      const std::string v = params.value("variant", std::string("effective-gap"));
      if (v == "effective-gap") {
        variant = GapBoundVariant::EffectiveGap;
      } else if (v == "main-text") {
        variant = GapBoundVariant::MainText;
      } else {
        fail(ErrorKind::ConfigError, "unknown gap-dependent variant '" + v + "'");
      }
      resolved["variant"] = v;
    } else {
      reject_unknown_params(params, {"form", "c1", "c2", "alpha", "beta", "kappa2_constant"}, theorem);
      try {
        form = parse_corollary(params.value("form", std::string(corollary_name(form))));
      } catch (const Error& e) {
        fail(ErrorKind::ConfigError, e.what());
      }
      auto pick = [&](const char* key, double fallback) {
        if (params.contains(key)) return params.at(key).get<double>();
        if (sp.contains(key) && sp.at(key).is_number()) return sp.at(key).get<double>();
        return fallback;
      };
      cp.c1 = pick("c1", cp.c1);
      cp.c2 = pick("c2", cp.c2);
      cp.alpha = pick("alpha", cp.alpha);
      cp.beta = pick("beta", cp.beta);
      cp.kappa2_constant = number_or(params, "kappa2_constant", cp.kappa2_constant);
      resolved["form"] = corollary_name(form);
      resolved["c1"] = cp.c1;
      resolved["c2"] = cp.c2;
      resolved["alpha"] = cp.alpha;
      resolved["beta"] = cp.beta;
      resolved["kappa2_constant"] = cp.kappa2_constant;
    }
    std::vector<ExtReal> c1(inst.schedule.c1_values().begin(), inst.schedule.c1_values().begin() + K);
    for (double d : cfg.delta_grid) {
      const LambdaIota li = lambda_iota(c1, d, inst.proxies.w_diff_star, inst.proxies.v_alpha, in.lf);
      if (theorem == "rl-gap-independent") {
        curve.points.push_back(rl_bound_gap_independent(K, d, in, li));
      } else if (theorem == "rl-gap-dependent") {
        curve.points.push_back(rl_bound_gap_dependent(K, d, in, li, inst.gaps, inst.vt, variant));
      } else {
        curve.points.push_back(corollary_bound(form, cp, K, d, in, li, inst.gaps));
      }
    }
    resolved["w_star"] = inst.proxies.w_star;
    resolved["w_diff_star"] = inst.proxies.w_diff_star;
    resolved["v_alpha"] = inst.proxies.v_alpha;
    resolved["proxy_mode"] = proxy_mode_name(inst.proxies.mode);
  } else {
    fail(ErrorKind::ConfigError, "unknown bound theorem '" + theorem + "'");
  }
  resolved["schedule"] = Json{{"name", inst.schedule.name()}, {"params", sp}};
  curve.parameters = resolved;
  return curve;
}

void write_bound_curve(const BoundCurve& curve, const std::string& csv_path, const Json& provenance) {
  {
    std::ofstream out = open_out(csv_path);
    out << "delta,total";
    if (!curve.points.empty())
      for (const auto& c : curve.points.front().components) out << ',' << c.name;
    out << ",vacuous\n";
    for (const BoundPoint& p : curve.points) {
      out << format_double(p.delta) << ',' << format_double(p.total);
      for (const auto& c : p.components) out << ',' << format_double(c.value);
      out << ',' << (p.vacuous ? 1 : 0) << '\n';
    }
    if (!out) fail(ErrorKind::IoError, "write failed: " + csv_path);
  }
  Json side = provenance;
  std::int64_t vacuous = 0;
  for (const BoundPoint& p : curve.points) vacuous += p.vacuous ? 1 : 0;
  side["theorem"] = curve.theorem;
  side["parameters"] = curve.parameters;
  side["horizon"] = curve.horizon;
  side["rows"] = curve.points.size();
  side["vacuous_points"] = vacuous;
  side["constants_hash"] = bound_constants_hash();
  std::ofstream out = open_out(sidecar_path(csv_path));
  out << side.dump(2) << '\n';
}

BoundCurve read_bound_curve(const std::string& csv_path, Json* provenance) {
  const Json side = read_json_file(sidecar_path(csv_path));
  BoundCurve curve;
  try {
    curve.theorem = side.at("theorem").get<std::string>();
    curve.parameters = side.value("parameters", Json::object());
    curve.horizon = side.at("horizon").get<std::int64_t>();
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorKind::IoError, "malformed bound sidecar: " + std::string(ex.what()));
  }
  std::ifstream in = open_in(csv_path);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::IoError, "empty bound CSV " + csv_path);
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "delta" || header[1] != "total" || header.back() != "vacuous") {
    fail(ErrorKind::IoError, "unexpected bound CSV header in " + csv_path);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) fail(ErrorKind::IoError, "bad bound row: " + line);
    BoundPoint p;
    p.delta = parse_number(cells[0], csv_path);
    for (std::size_t i = 2; i + 1 < cells.size(); ++i) p.add(header[i], parse_number(cells[i], csv_path));
    p.total = parse_number(cells[1], csv_path);
    p.vacuous = cells.back() == "1" || std::isinf(p.total);
    curve.points.push_back(std::move(p));
  }
  if (provenance != nullptr) *provenance = side;
  return curve;
}

}  // namespace eqolab
