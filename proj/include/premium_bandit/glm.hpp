#pragma once

#include <optional>
#include <span>
#include <vector>

#include "premium_bandit/market.hpp"
#include "premium_bandit/mat2.hpp"

namespace pbandit {

// Stacked parameter estimate: demand block (a0, a1), log-claims block (b0, b1).
struct BetaPair {
  Vec2 demand;
  Vec2 claims;
};

// L1(t) = c sqrt(t log t), natural log with the log(max(t,2)) guard.
double l1_threshold(int t, double c);

// Analytic d/dt of c sqrt(t log t); requires t >= 2 (domain error below).
double l1_derivative(int t, double c);

// Root of the canonical-link quasi-score sum_i (1,p_i)^T (y_i - h(eta_i)),
// eta_i = beta0 + beta1 p_i, found by damped Newton with step halving
// (max 100 iterations, score tolerance 1e-10 relative to the response scale).
// Returns absent on non-convergence, an information matrix with condition
// number > 1e12, or fewer than two observations. NaN inputs are domain errors.
std::optional<Vec2> solve_mqle(std::span<const double> prices,
                               std::span<const double> responses, Link link,
                               std::optional<Vec2> warm_start = std::nullopt);

struct CepSpec {
  double p_low = 0.5;
  double p_high = 10.0;
  Link demand_link = Link::identity;
  Link claims_link = Link::identity;
  double sigma2 = 0.3;  // lognormal plug-in correction for the claims term
  int grid_n = 2048;
};

// argmax over [p_low, p_high] of the plug-in expected revenue
// p h1(a0 + a1 p) - exp(h2(b0 + b1 p) + sigma2^2/2),
// dense grid scan plus golden-section refinement; ties toward lower price.
double certainty_equivalent_price(const BetaPair& beta, const CepSpec& spec);

// Price-vector offset K sqrt(L1'(t)) (v2_1 cep_vec - v2), where v2_1 is the
// first component of v2. The first component of the result is identically
// zero, so only the price coordinate is perturbed. Preconditions: t >= 2 and
// |K sqrt(L1'(t))| <= 1; violations are domain errors.
Vec2 perturbation_phi(int t, double l1_coeff, double k, Vec2 cep_vec, Vec2 v2);

enum class GlmBranch { initial, replay, cep, perturbed };

struct GlmConfig {
  double l1_coeff = 0.01;
  double k_perturb = 0.0;  // <= 0 selects the largest K with K sqrt(L1'(3)) <= 1
  std::vector<double> initial_prices{3.0, 3.3, 4.7};
  int cep_grid = 2048;
  double p_low = 0.5;
  double p_high = 10.0;
  Link demand_link = Link::identity;
  Link claims_link = Link::identity;
  double sigma2 = 0.02;  // log-claims dispersion used by the lognormal
                         // correction inside the plug-in revenue
};

// Adaptive GLM pricing policy.
//
// Periods 1..3 use the configured initial prices. Afterwards each period
// refits both GLMs, then either (I) replays the earliest transacted prices
// while the estimate is missing or the dispersion metric tr(P^-1)^-1 sits
// below L1(t), or (II) charges the certainty-equivalent price, perturbed
// along the minor eigenvector of the design matrix whenever charging it
// as-is would push the one-step-ahead dispersion metric below L1(t+1).
//
// Claims may arrive late: observe_demand is called every period with the
// transacted price, observe_claim whenever a claim becomes visible (paired
// with the price of its origin period).
class GlmPolicy {
 public:
  explicit GlmPolicy(GlmConfig cfg);

  // Price for period t (1-based); expects all periods < t absorbed.
  double next_price(int t);

  void observe_demand(double price, double demand);
  void observe_claim(double origin_price, double claim);

  [[nodiscard]] GlmBranch last_branch() const { return last_branch_; }
  [[nodiscard]] const std::optional<BetaPair>& beta() const { return beta_; }
  [[nodiscard]] double trace_metric() const { return design_.trace_metric; }
  [[nodiscard]] const DesignState& price_design() const { return design_; }
  [[nodiscard]] const DesignState& claims_design() const {
    return claims_design_;
  }
  [[nodiscard]] double k_perturb() const { return k_; }
  [[nodiscard]] double l1_at(int t) const;

 private:
  void refit();
  [[nodiscard]] CepSpec cep_spec() const;

  GlmConfig cfg_;
  double k_ = 0.0;
  DesignState design_;         // every transacted price
  DesignState claims_design_;  // origin prices of arrived claims only
  Vec2 sum_py_demand_{};
  Vec2 sum_py_claims_{};
  std::vector<double> price_hist_;
  std::vector<double> demand_hist_;
  std::vector<double> claim_price_hist_;
  std::vector<double> log_claim_hist_;
  std::optional<BetaPair> beta_;
  std::size_t replay_cursor_ = 0;
  bool replaying_ = false;
  GlmBranch last_branch_ = GlmBranch::initial;
};

}  // namespace pbandit
