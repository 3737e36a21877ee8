#pragma once

#include <string>

#include "eqolab/json_fwd.hpp"
#include "eqolab/mdp.hpp"

namespace eqolab {

// Fixture document:
// {"S", "A", "H", "v_max", "initial_state" | "initial_states",
//  "P": [s][a][s'], "rewards": [s][a]{model} | {"per_step": [h][s][a]{model}}}
// model: {"kind": "gaussian", "mean": m, "variance": v} | {"kind": "bounded-bernoulli-scaled",
// "mean": m, "range": r} | {"kind": "exponential-shifted", "mean": m, "rate": θ} |
// {"kind": "degenerate", "mean": m}
MdpSpec mdp_from_json(const Json& doc);
Json mdp_to_json(const MdpSpec& mdp);

MdpSpec load_mdp(const std::string& path);
void save_mdp(const MdpSpec& mdp, const std::string& path);

// Canonical digest of the fixture content.
std::string mdp_hash(const MdpSpec& mdp);

}  // namespace eqolab
