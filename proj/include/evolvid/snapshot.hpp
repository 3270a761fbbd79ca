#pragma once

#include <string>

#include "evolvid/aero.hpp"
#include "evolvid/network.hpp"

namespace evolvid {

// JSON model snapshots. Reals round-trip bit-faithfully (shortest-round-trip
// double formatting on write, exact parse on read).

void save_network(const Network& net, CoeffKind kind, const std::string& path);
std::pair<Network, CoeffKind> load_network(const std::string& path);

void save_aero_params(const AeroParams& params, const std::string& path);
AeroParams load_aero_params(const std::string& path);

// Peeks at the "model" field: "et2qfnn", "et1qfnn" or "ols".
std::string snapshot_model_kind(const std::string& path);

}  // namespace evolvid
