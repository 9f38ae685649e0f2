#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "premium_bandit/glm.hpp"
#include "premium_bandit/gp.hpp"
#include "premium_bandit/market.hpp"

namespace pbandit {

enum class PolicyKind { glm, gp };

// How the true demand/claims curves are generated: the parametric market
// model, or one draw per replication from the GP priors on the price grid
// (in which case every transacted price is snapped to the grid so that the
// oracle and the policies optimize over the same set).
enum class TruthMode { parametric, sampled };

struct RunConfig {
  MarketParams market{};
  GlmConfig glm{};
  GpConfig gp{};
  TruthMode truth = TruthMode::parametric;
  int horizon = 100;
  std::vector<std::uint64_t> seeds{1,  2,  3,  4,  5,  6,  7,  8,  9,  10,
                                   11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  DelayConfig delay{DelayKind::uniform, 5};
  std::string output_dir = "out";
  int jobs = 0;  // 0: hardware concurrency
};

struct RegretTrace {
  std::string run_id;
  double p_star = 0.0;
  double r_star = 0.0;
  std::vector<double> price;
  std::vector<double> demand;
  std::vector<double> claims;
  std::vector<double> per_period_regret;
  std::vector<double> cumulative;
  std::vector<double> rate_series;  // cumulative[t] / sqrt(t log t)
  // GLM diagnostics; NaN entries render as empty CSV fields (all NaN for GP).
  std::vector<double> trace_metric;
  std::vector<double> beta_err;
  // In-memory diagnostics, not exported.
  std::vector<int> branch;  // GlmBranch as int; empty for GP runs
  std::vector<double> l1;   // L1(t) alongside the dispersion guard
};

// Brute-force oracle: 1e6-point grid scan of expected_revenue over
// [p_low, p_high], then golden-section refinement. Returns (p_star, r_star).
std::pair<double, double> oracle_optimal_price(const MarketParams& mp);

// One draw of grid-valued truth curves from the GP priors.
struct SampledTruth {
  std::vector<double> grid;
  std::vector<double> f_demand;
  std::vector<double> f_claims;
  int oracle_index = 0;
  double p_star = 0.0;
  double r_star = 0.0;
};
SampledTruth draw_sampled_truth(const GpConfig& cfg, double p_low,
                                double p_high, std::uint64_t seed);

// One full replication, deterministic in (config, policy, delayed, seed).
// Regret is measured in expected revenue against the brute-force oracle;
// realized demand/claims are logged alongside.
RegretTrace run_experiment(const RunConfig& cfg, PolicyKind policy,
                           bool delayed, std::uint64_t seed);

// All configured seeds, optionally in parallel; results in seed order.
std::vector<RegretTrace> run_many(const RunConfig& cfg, PolicyKind policy,
                                  bool delayed);

// CSV schema: run_id,t,price,demand,claims,regret,cum_regret,trace_metric,beta_err
void export_csv(const RegretTrace& trace, const std::string& path);
RegretTrace import_csv(const std::string& path);

void write_plot_script(const std::vector<std::string>& csv_names,
                       const std::string& dir);

std::string run_label(PolicyKind policy, bool delayed, std::uint64_t seed);

double final_cumulative_regret(const RegretTrace& trace);

}  // namespace pbandit
