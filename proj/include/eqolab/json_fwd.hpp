#pragma once

#include "json.hpp"

namespace eqolab {
using Json = nlohmann::ordered_json;
}
