#pragma once

// JSON encodings for configs, scheme bundles (parameters plus code
// matrices plus seed), design results, and simulation reports.

#include <string>

#include "json.hpp"
#include "mra/optimizer.hpp"
#include "mra/sim.hpp"

namespace mra::io {

using json = nlohmann::ordered_json;

json to_json(const op::SessionConfig& config);
op::SessionConfig config_from_json(const json& j);

json to_json(const op::SchemeParams& params);
op::SchemeParams params_from_json(const json& j);

json to_json(const err::ErrorBudget& budget);

json to_json(const opt::DesignResult& result, const opt::DesignProblem& problem);

json to_json(const sim::SessionReport& report);

// Scheme bundle: parameters plus the concrete matrices, so a simulation is
// reproducible without the catalog or the generator seed path.
json scheme_to_json(const op::Scheme& scheme);
op::Scheme scheme_from_json(const json& j);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

}  // namespace mra::io
