#pragma once

#include "premium_bandit/rng.hpp"

namespace pbandit {

// Mean function h of a canonical link: identity h(x)=x, log h(x)=exp(x),
// logit h(x) = 1/(1+exp(-x)).
enum class Link { identity, log, logit };

double link_mean(Link link, double eta);
double link_mean_deriv(Link link, double eta);

enum class NoiseFamily { logistic, normal };

enum class DelayKind { none, uniform, deterministic, geometric };

struct DelayConfig {
  DelayKind kind = DelayKind::none;
  int m = 0;            // maximum waiting time
  double geom_q = 0.5;  // success probability of the truncated geometric
};

// Raw delay draw in {0..m}; always consumes exactly one word when a delayed
// kind is configured, so delay schedules never perturb other substreams.
int draw_delay(const DelayConfig& cfg, SubStream& rng);

struct MarketParams {
  double a0 = 11.0;   // demand intercept
  double a1 = -0.8;   // demand slope
  double b0 = 3.0;    // log-claims intercept
  double b1 = 0.25;   // log-claims slope
  // Noise scales are calibrated so that a default GLM run shows the price
  // dispersion metric settling near 0.01 sqrt(t log t); larger scales leave so
  // much incidental dispersion that the floor never engages within reasonable
  // horizons.
  double sigma1 = 0.1;   // logistic scale of the demand noise
  double sigma2 = 0.02;  // standard deviation of the log-claims noise
  Link demand_link = Link::identity;
  Link claims_link = Link::identity;
  NoiseFamily demand_noise = NoiseFamily::logistic;
  double p_low = 0.5;
  double p_high = 10.0;
};

// Throws std::invalid_argument on malformed parameters (bounds ordering,
// negative noise scales, negative expected demand inside the price range).
void validate(const MarketParams& mp);

double sample_demand(double price, const MarketParams& mp, SubStream& rng);
double sample_total_claims(double price, const MarketParams& mp,
                           SubStream& rng);

// price*h1(a0+a1 p) - exp(h2(b0+b1 p) + sigma2^2/2). The claims term carries
// the lognormal mean correction; see README for the modelling note.
double expected_revenue(double price, const MarketParams& mp);

struct Observation {
  int t = 0;
  double price = 0.0;
  double demand = 0.0;
  double claim = 0.0;
  int claim_visible_at = 0;
};

struct EnvRng {
  SubStream demand;
  SubStream claims;
  SubStream delay;
  explicit EnvRng(std::uint64_t seed)
      : demand(seed, Stream::demand),
        claims(seed, Stream::claims),
        delay(seed, Stream::delay) {}
};

// One market transition. The delay draw is clamped to tau_cap so that a
// harness can force every claim to land inside its horizon; pass m (or any
// larger value) to leave draws unclamped. Demand, claims and delay are drawn
// from their own substreams in that order, one event per period.
Observation step(double price, int t, const MarketParams& mp,
                 const DelayConfig& delay_cfg, int tau_cap, EnvRng& rng);

}  // namespace pbandit
