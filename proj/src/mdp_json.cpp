#include "eqolab/mdp_json.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "eqolab/error.hpp"
#include "eqolab/format.hpp"

namespace eqolab {

namespace {

RewardModel reward_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorKind::InvalidArgument, "reward model must be an object");
  static const std::set<std::string> allowed{"kind", "mean", "range", "variance", "rate"};
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) fail(ErrorKind::ConfigError, "unknown reward key: " + item.key());
  }
  RewardModel r;
  r.kind = parse_reward_kind(j.at("kind").get<std::string>());
  r.mean = j.at("mean").get<double>();
  switch (r.kind) {
    case RewardKind::BoundedBernoulliScaled: r.range = j.value("range", 1.0); break;
    case RewardKind::Gaussian: r.variance = j.at("variance").get<double>(); break;
    case RewardKind::ExponentialShifted: r.rate = j.at("rate").get<double>(); break;
    case RewardKind::Degenerate: break;
  }
  return r;
}

Json reward_to_json(const RewardModel& r) {
  Json j;
  j["kind"] = std::string(reward_kind_name(r.kind));
  j["mean"] = r.mean;
  switch (r.kind) {
    case RewardKind::BoundedBernoulliScaled: j["range"] = r.range; break;
    case RewardKind::Gaussian: j["variance"] = r.variance; break;
    case RewardKind::ExponentialShifted: j["rate"] = r.rate; break;
    case RewardKind::Degenerate: break;
  }
  return j;
}

void read_sa_grid(const Json& grid, int S, int A, std::vector<RewardModel>& out) {
  if (!grid.is_array() || static_cast<int>(grid.size()) != S) fail(ErrorKind::InvalidArgument, "reward grid must have S rows");
  for (const auto& row : grid) {
    if (!row.is_array() || static_cast<int>(row.size()) != A) fail(ErrorKind::InvalidArgument, "reward row must have A entries");
    for (const auto& cell : row) out.push_back(reward_from_json(cell));
  }
}

}  // namespace

MdpSpec mdp_from_json(const Json& doc) {
  try {
    static const std::set<std::string> allowed{"S", "A", "H", "v_max", "initial_state", "initial_states", "P", "rewards", "name", "description"};
    for (const auto& item : doc.items()) {
      if (!allowed.count(item.key())) fail(ErrorKind::ConfigError, "unknown fixture key: " + item.key());
    }
    MdpSpec m;
    m.S = doc.at("S").get<int>();
    m.A = doc.at("A").get<int>();
    m.H = doc.at("H").get<int>();
    m.v_max = doc.at("v_max").get<double>();
    if (doc.contains("initial_states")) {
      m.initial_states = doc.at("initial_states").get<std::vector<int>>();
    } else {
      m.initial_states = {doc.value("initial_state", 0)};
    }
    const Json& P = doc.at("P");
    if (!P.is_array() || static_cast<int>(P.size()) != m.S) fail(ErrorKind::InvalidArgument, "P must have S rows");
    m.P.clear();
    for (const auto& by_action : P) {
      if (!by_action.is_array() || static_cast<int>(by_action.size()) != m.A) fail(ErrorKind::InvalidArgument, "P[s] must have A rows");
      for (const auto& row : by_action) {
        if (!row.is_array() || static_cast<int>(row.size()) != m.S) fail(ErrorKind::InvalidArgument, "P[s][a] must have S entries");
        for (const auto& x : row) m.P.push_back(x.get<double>());
      }
    }
    const Json& rw = doc.at("rewards");
    m.rewards.clear();
    if (rw.is_object()) {
      const Json& steps = rw.at("per_step");
      if (!steps.is_array() || static_cast<int>(steps.size()) != m.H) fail(ErrorKind::InvalidArgument, "per_step must have H entries");
      for (const auto& grid : steps) read_sa_grid(grid, m.S, m.A, m.rewards);
    } else {
      read_sa_grid(rw, m.S, m.A, m.rewards);
    }
    return build_mdp(std::move(m));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("malformed fixture: ") + e.what());
  }
}

Json mdp_to_json(const MdpSpec& m) {
  Json doc;
  doc["S"] = m.S;
  doc["A"] = m.A;
  doc["H"] = m.H;
  doc["v_max"] = m.v_max;
  if (m.initial_states.size() == 1) {
    doc["initial_state"] = m.initial_states.front();
  } else {
    doc["initial_states"] = m.initial_states;
  }
  Json P = Json::array();
  for (int s = 0; s < m.S; ++s) {
    Json by_action = Json::array();
    for (int a = 0; a < m.A; ++a) {
      const double* row = m.row(s, a);
      by_action.push_back(std::vector<double>(row, row + m.S));
    }
    P.push_back(std::move(by_action));
  }
  doc["P"] = std::move(P);
  auto grid = [&](int h) {
    Json g = Json::array();
    for (int s = 0; s < m.S; ++s) {
      Json row = Json::array();
      for (int a = 0; a < m.A; ++a) row.push_back(reward_to_json(m.reward(h, s, a)));
      g.push_back(std::move(row));
    }
    return g;
  };
  if (m.rewards_shared) {
    doc["rewards"] = grid(0);
  } else {
    Json steps = Json::array();
    for (int h = 0; h < m.H; ++h) steps.push_back(grid(h));
    doc["rewards"] = Json{{"per_step", std::move(steps)}};
  }
  return doc;
}

MdpSpec load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::FixtureNotFound, "cannot open fixture " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::InvalidArgument, "fixture " + path + " is not valid JSON: " + e.what());
  }
  return mdp_from_json(doc);
}

void save_mdp(const MdpSpec& mdp, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  out << mdp_to_json(mdp).dump(2) << '\n';
}

std::string mdp_hash(const MdpSpec& mdp) { return fnv1a_hex(mdp_to_json(mdp).dump()); }

}  // namespace eqolab
