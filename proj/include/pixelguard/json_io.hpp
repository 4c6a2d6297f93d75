// JSON documents for the CLI.  Readers reject unknown fields, and counts
// must be JSON integers.
#pragma once

#include <string>

#include <json.hpp>

#include "pixelguard/eve_bound.hpp"
#include "pixelguard/monte_carlo.hpp"

namespace pixelguard {

using Json = nlohmann::ordered_json;

Json to_json(const SystemParams& p);
Json to_json(const AttackStrategy& s);
Json to_json(const ClickCounts& c);
Json to_json(const SimOutcome& o);
Json to_json(const EveInfoBound& b);

// All readers throw std::invalid_argument with a field-level message and
// validate the result.
SystemParams system_params_from_json(const Json& j);
AttackStrategy attack_strategy_from_json(const Json& j);
ClickCounts click_counts_from_json(const Json& j);
SimOutcome sim_outcome_from_json(const Json& j);

/// A ClickCounts document, or the counts inside a SimOutcome document.
ClickCounts counts_from_any_json(const Json& j);

/// Reads and parses a file; parse errors become std::invalid_argument.
Json read_json_file(const std::string& path);

}  // namespace pixelguard
