#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "premium_bandit/harness.hpp"

namespace pbandit {

enum class Algo { glm, gp, compare };

struct CliConfig {
  Algo algo = Algo::compare;
  // Whether single-algo runs also use the delay distribution in run.delay.
  // Compare mode always runs both plain and delayed variants.
  bool delayed = false;
  // True when the truth mode should follow the algo (glm fits a parametric
  // market, gp and compare play against sampled curves).
  bool truth_auto = true;
  RunConfig run;
};

// Parses a JSON config document. Unknown keys are rejected with the full
// key path in the error message. Fields not present keep their defaults.
CliConfig parse_config(const std::string& json_text);

CliConfig default_config();

std::string serialize_config(const CliConfig& cfg);

// Parses "1,2,5-8" into {1,2,5,6,7,8}. Throws std::invalid_argument on
// malformed input or descending ranges.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

// If PREMIUM_BANDIT_SEED is set, replaces the seed list with the same
// number of consecutive seeds starting at its value.
void apply_env_seed(CliConfig& cfg);

// Throws std::invalid_argument naming the offending field.
void validate_config(const CliConfig& cfg);

// Applies the auto truth rule when truth_auto is set.
void resolve_truth(CliConfig& cfg);

std::string algo_name(Algo algo);

}  // namespace pbandit
