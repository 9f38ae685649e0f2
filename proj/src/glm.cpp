#include "premium_bandit/glm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "premium_bandit/optimize.hpp"

namespace pbandit {

namespace {

constexpr double max_condition = 1e12;

double guarded_log(int t) { return std::log(static_cast<double>(std::max(t, 2))); }

}  // namespace

double l1_threshold(int t, double c) {
  if (t < 1) throw std::domain_error("l1_threshold: t >= 1 required");
  return c * std::sqrt(static_cast<double>(t) * guarded_log(t));
}

double l1_derivative(int t, double c) {
  if (t <= 1) throw std::domain_error("l1_derivative: t >= 2 required");
  const double td = static_cast<double>(t);
  const double lt = std::log(td);
  return c * (lt + 1.0) / (2.0 * std::sqrt(td * lt));
}

std::optional<Vec2> solve_mqle(std::span<const double> prices,
                               std::span<const double> responses, Link link,
                               std::optional<Vec2> warm_start) {
  const std::size_t n = prices.size();
  if (n != responses.size()) {
    throw std::invalid_argument("solve_mqle: length mismatch");
  }
  if (n < 2) return std::nullopt;
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(prices[i]) || std::isnan(responses[i])) {
      throw std::domain_error("solve_mqle: NaN input");
    }
    scale += std::fabs(responses[i]);
  }
  const double tol = 1e-10 * scale;

  auto score = [&](Vec2 beta) {
    Vec2 s{};
    for (std::size_t i = 0; i < n; ++i) {
      const double r = responses[i] - link_mean(link, beta.x + beta.y * prices[i]);
      s.x += r;
      s.y += r * prices[i];
    }
    return s;
  };

  Vec2 beta = warm_start.value_or(Vec2{0.0, 0.0});
  Vec2 s = score(beta);
  double s_norm = norm(s);
  for (int iter = 0; iter < 100; ++iter) {
    if (s_norm <= tol) break;
    Mat2 info{};
    for (std::size_t i = 0; i < n; ++i) {
      const double w = link_mean_deriv(link, beta.x + beta.y * prices[i]);
      info = info + Mat2{w, w * prices[i], w * prices[i], w * prices[i] * prices[i]};
    }
    const auto info_inv = inverse(info);
    if (!info_inv) return std::nullopt;
    const Vec2 step = mul(*info_inv, s);
    double lambda = 1.0;
    bool improved = false;
    for (int h = 0; h < 40; ++h) {
      const Vec2 cand = beta + lambda * step;
      const Vec2 sc = score(cand);
      const double cn = norm(sc);
      if (std::isfinite(cn) && cn < s_norm) {
        beta = cand;
        s = sc;
        s_norm = cn;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) return std::nullopt;
  }
  if (!(s_norm <= tol)) return std::nullopt;
  if (!std::isfinite(beta.x) || !std::isfinite(beta.y)) return std::nullopt;
  Mat2 info{};
  for (std::size_t i = 0; i < n; ++i) {
    const double w = link_mean_deriv(link, beta.x + beta.y * prices[i]);
    info = info + Mat2{w, w * prices[i], w * prices[i], w * prices[i] * prices[i]};
  }
  if (cond_sym(info) > max_condition) return std::nullopt;
  return beta;
}

double certainty_equivalent_price(const BetaPair& beta, const CepSpec& spec) {
  for (double v : {beta.demand.x, beta.demand.y, beta.claims.x, beta.claims.y}) {
    if (!std::isfinite(v)) {
      throw std::domain_error("certainty_equivalent_price: non-finite estimate");
    }
  }
  const double corr = 0.5 * spec.sigma2 * spec.sigma2;
  auto plugin_revenue = [&](double p) {
    const double demand =
        link_mean(spec.demand_link, beta.demand.x + beta.demand.y * p);
    const double claims =
        std::exp(link_mean(spec.claims_link, beta.claims.x + beta.claims.y * p) +
                 corr);
    return p * demand - claims;
  };
  return grid_golden_max(plugin_revenue, spec.p_low, spec.p_high, spec.grid_n,
                         1e-8)
      .first;
}

Vec2 perturbation_phi(int t, double l1_coeff, double k, Vec2 cep_vec, Vec2 v2) {
  double s = k * std::sqrt(l1_derivative(t, l1_coeff));
  // The auto gain puts |s| exactly at 1 for the first eligible period; only
  // reject gains that exceed the bound beyond rounding.
  if (!(std::fabs(s) <= 1.0 + 1e-9)) {
    throw std::domain_error("perturbation_phi: |K sqrt(L1'(t))| must be <= 1");
  }
  s = std::clamp(s, -1.0, 1.0);
  return s * (v2.x * cep_vec - v2);
}

GlmPolicy::GlmPolicy(GlmConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.initial_prices.size() < 3) {
    throw std::invalid_argument("glm: at least three initial prices required");
  }
  const double first = cfg_.initial_prices.front();
  bool distinct = false;
  for (double p : cfg_.initial_prices) {
    if (p < cfg_.p_low || p > cfg_.p_high) {
      throw std::invalid_argument("glm: initial price outside [p_low, p_high]");
    }
    if (p != first) distinct = true;
  }
  if (!distinct) {
    throw std::invalid_argument("glm: initial prices must not all coincide");
  }
  if (!(cfg_.l1_coeff > 0.0)) {
    throw std::invalid_argument("glm: l1_coeff must be > 0");
  }
  k_ = cfg_.k_perturb > 0.0
           ? cfg_.k_perturb
           : 1.0 / std::sqrt(l1_derivative(3, cfg_.l1_coeff));
}

double GlmPolicy::l1_at(int t) const { return l1_threshold(t, cfg_.l1_coeff); }

CepSpec GlmPolicy::cep_spec() const {
  return CepSpec{cfg_.p_low,       cfg_.p_high, cfg_.demand_link,
                 cfg_.claims_link, cfg_.sigma2, cfg_.cep_grid};
}

void GlmPolicy::refit() {
  std::optional<Vec2> a_hat;
  if (cfg_.demand_link == Link::identity) {
    if (design_.p_inv && design_.n_points >= 2 &&
        cond_sym(design_.p) <= max_condition) {
      a_hat = mul(*design_.p_inv, sum_py_demand_);
    }
  } else {
    a_hat = solve_mqle(price_hist_, demand_hist_, cfg_.demand_link,
                       beta_ ? std::optional<Vec2>(beta_->demand) : std::nullopt);
  }
  std::optional<Vec2> b_hat;
  if (cfg_.claims_link == Link::identity) {
    if (claims_design_.p_inv && claims_design_.n_points >= 2 &&
        cond_sym(claims_design_.p) <= max_condition) {
      b_hat = mul(*claims_design_.p_inv, sum_py_claims_);
    }
  } else {
    b_hat = solve_mqle(claim_price_hist_, log_claim_hist_, cfg_.claims_link,
                       beta_ ? std::optional<Vec2>(beta_->claims) : std::nullopt);
  }
  if (a_hat && b_hat && std::isfinite(a_hat->x) && std::isfinite(a_hat->y) &&
      std::isfinite(b_hat->x) && std::isfinite(b_hat->y)) {
    beta_ = BetaPair{*a_hat, *b_hat};
  } else {
    beta_ = std::nullopt;
  }
}

double GlmPolicy::next_price(int t) {
  if (t < 1) throw std::domain_error("glm: next_price requires t >= 1");
  const int n_init = static_cast<int>(cfg_.initial_prices.size());
  if (t <= n_init) {
    last_branch_ = GlmBranch::initial;
    replaying_ = false;
    return cfg_.initial_prices[static_cast<std::size_t>(t - 1)];
  }
  const int u = t - 1;  // periods absorbed so far
  refit();
  if (!beta_ || design_.trace_metric < l1_threshold(u, cfg_.l1_coeff)) {
    if (!replaying_) {
      replaying_ = true;
      replay_cursor_ = 0;
    }
    const std::size_t j = std::min(replay_cursor_, price_hist_.size() - 1);
    ++replay_cursor_;
    last_branch_ = GlmBranch::replay;
    return price_hist_[j];
  }
  replaying_ = false;
  const double cep = certainty_equivalent_price(*beta_, cep_spec());
  if (metric_after_add(design_, cep) >= l1_threshold(u + 1, cfg_.l1_coeff)) {
    last_branch_ = GlmBranch::cep;
    return cep;
  }
  const EigenPair eig = eigen2x2(design_.p);
  const Vec2 cep_vec{1.0, cep};
  Vec2 v2 = eig.v2;
  // Orientation fixes the perturbation sign: the admissible direction points
  // away from the CEP vector along the minor eigenvector.
  if (dot(cep_vec, v2) > 0.0) v2 = {-v2.x, -v2.y};
  const Vec2 phi = perturbation_phi(u, cfg_.l1_coeff, k_, cep_vec, v2);
  last_branch_ = GlmBranch::perturbed;
  return std::clamp(cep + phi.y, cfg_.p_low, cfg_.p_high);
}

void GlmPolicy::observe_demand(double price, double demand) {
  price_hist_.push_back(price);
  demand_hist_.push_back(demand);
  update_design(design_, price);
  sum_py_demand_ = sum_py_demand_ + demand * Vec2{1.0, price};
}

void GlmPolicy::observe_claim(double origin_price, double claim) {
  if (!(claim > 0.0)) {
    throw std::domain_error("glm: claims must be positive for the log fit");
  }
  const double y = std::log(claim);
  claim_price_hist_.push_back(origin_price);
  log_claim_hist_.push_back(y);
  update_design(claims_design_, origin_price);
  sum_py_claims_ = sum_py_claims_ + y * Vec2{1.0, origin_price};
}

}  // namespace pbandit
