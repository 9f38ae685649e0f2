#include "premium_bandit/market.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pbandit {

double link_mean(Link link, double eta) {
  switch (link) {
    case Link::identity:
      return eta;
    case Link::log:
      return std::exp(eta);
    case Link::logit:
      return 1.0 / (1.0 + std::exp(-eta));
  }
  return eta;
}

double link_mean_deriv(Link link, double eta) {
  switch (link) {
    case Link::identity:
      return 1.0;
    case Link::log:
      return std::exp(eta);
    case Link::logit: {
      const double h = 1.0 / (1.0 + std::exp(-eta));
      return h * (1.0 - h);
    }
  }
  return 1.0;
}

int draw_delay(const DelayConfig& cfg, SubStream& rng) {
  if (cfg.kind == DelayKind::none || cfg.m <= 0) {
    if (cfg.kind != DelayKind::none) rng.bits();
    return 0;
  }
  switch (cfg.kind) {
    case DelayKind::uniform:
      return rng.uniform_int(cfg.m);
    case DelayKind::deterministic:
      rng.bits();
      return cfg.m;
    case DelayKind::geometric: {
      // Failures before the first success, truncated at m.
      const double u = rng.uniform_pos();
      const double g = std::floor(std::log(u) / std::log1p(-cfg.geom_q));
      const int v = g < 0.0 ? 0 : static_cast<int>(g);
      return std::min(v, cfg.m);
    }
    case DelayKind::none:
      break;
  }
  return 0;
}

void validate(const MarketParams& mp) {
  if (!(mp.p_low > 0.0) || !(mp.p_high > mp.p_low)) {
    throw std::invalid_argument("market: requires 0 < p_low < p_high");
  }
  if (!(mp.sigma1 >= 0.0) || !std::isfinite(mp.sigma1) ||
      !(mp.sigma2 >= 0.0) || !std::isfinite(mp.sigma2)) {
    throw std::invalid_argument("market: noise scales must be finite and >= 0");
  }
  for (double v : {mp.a0, mp.a1, mp.b0, mp.b1}) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("market: parameters must be finite");
    }
  }
  // h1 is monotone in eta and eta is affine in p, so the extremes of the
  // expected demand over [p_low, p_high] sit at the interval ends.
  const double lo = link_mean(mp.demand_link, mp.a0 + mp.a1 * mp.p_low);
  const double hi = link_mean(mp.demand_link, mp.a0 + mp.a1 * mp.p_high);
  if (std::min(lo, hi) < 0.0) {
    throw std::invalid_argument(
        "market: expected demand negative inside [p_low, p_high]");
  }
}

namespace {

void check_price(double price, const MarketParams& mp) {
  if (!std::isfinite(price) || price < mp.p_low || price > mp.p_high) {
    throw std::domain_error("market: price " + std::to_string(price) +
                            " outside [" + std::to_string(mp.p_low) + ", " +
                            std::to_string(mp.p_high) + "]");
  }
}

}  // namespace

double sample_demand(double price, const MarketParams& mp, SubStream& rng) {
  check_price(price, mp);
  const double mean = link_mean(mp.demand_link, mp.a0 + mp.a1 * price);
  double noise = 0.0;
  switch (mp.demand_noise) {
    case NoiseFamily::logistic:
      noise = rng.logistic(mp.sigma1);
      break;
    case NoiseFamily::normal:
      noise = mp.sigma1 * rng.normal();
      break;
  }
  if (mp.sigma1 == 0.0) noise = 0.0;
  return std::max(0.0, mean + noise);
}

double sample_total_claims(double price, const MarketParams& mp,
                           SubStream& rng) {
  check_price(price, mp);
  const double z = rng.normal();
  const double log_mean = link_mean(mp.claims_link, mp.b0 + mp.b1 * price);
  return std::exp(log_mean + mp.sigma2 * z);
}

double expected_revenue(double price, const MarketParams& mp) {
  check_price(price, mp);
  const double demand = link_mean(mp.demand_link, mp.a0 + mp.a1 * price);
  const double claims =
      std::exp(link_mean(mp.claims_link, mp.b0 + mp.b1 * price) +
               0.5 * mp.sigma2 * mp.sigma2);
  return price * demand - claims;
}

Observation step(double price, int t, const MarketParams& mp,
                 const DelayConfig& delay_cfg, int tau_cap, EnvRng& rng) {
  if (t < 1) throw std::domain_error("market: step requires t >= 1");
  Observation obs;
  obs.t = t;
  obs.price = price;
  obs.demand = sample_demand(price, mp, rng.demand);
  obs.claim = sample_total_claims(price, mp, rng.claims);
  const int tau = std::min(draw_delay(delay_cfg, rng.delay), std::max(0, tau_cap));
  obs.claim_visible_at = t + tau;
  return obs;
}

}  // namespace pbandit
