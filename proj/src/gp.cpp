#include "premium_bandit/gp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pbandit {

double kernel_eval(const KernelSpec& spec, double p, double q) {
  const double r = std::fabs(p - q);
  const double l = spec.length_scale;
  double k = 0.0;
  switch (spec.kind) {
    case KernelKind::squared_exponential:
      k = std::exp(-0.5 * r * r / (l * l));
      break;
    case KernelKind::matern_1_2:
      k = std::exp(-r / l);
      break;
    case KernelKind::matern_3_2: {
      const double s = std::sqrt(3.0) * r / l;
      k = (1.0 + s) * std::exp(-s);
      break;
    }
    case KernelKind::matern_5_2: {
      const double s = std::sqrt(5.0) * r / l;
      k = (1.0 + s + 5.0 * r * r / (3.0 * l * l)) * std::exp(-s);
      break;
    }
  }
  return spec.variance * k;
}

GpPosterior::GpPosterior(KernelSpec kernel, double noise_sd, double prior_mean)
    : kernel_(kernel), noise_(noise_sd), mean0_(prior_mean) {
  if (!(kernel_.length_scale > 0.0) || !(kernel_.variance > 0.0)) {
    throw std::invalid_argument("gp: kernel scales must be positive");
  }
  if (noise_ < 0.0) throw std::invalid_argument("gp: noise_sd must be >= 0");
}

bool GpPosterior::try_append(double p) {
  const int n = static_cast<int>(x_.size());  // points already factored
  Eigen::VectorXd k_new(n);
  for (int i = 0; i < n; ++i) k_new(i) = kernel_eval(kernel_, x_[i], p);
  chol_.conservativeResize(n + 1, n + 1);
  chol_.row(n).setZero();
  chol_.col(n).setZero();
  if (n > 0) {
    chol_.row(n).head(n) = chol_.topLeftCorner(n, n)
                               .triangularView<Eigen::Lower>()
                               .solve(k_new)
                               .transpose();
  }
  const double diag = kernel_eval(kernel_, p, p) + noise_ * noise_ + jitter_ -
                      chol_.row(n).head(n).squaredNorm();
  if (!(diag > 0.0)) {
    chol_.conservativeResize(n, n);
    return false;
  }
  chol_(n, n) = std::sqrt(diag);
  return true;
}

void GpPosterior::rebuild(double jitter) {
  jitter_ = jitter;
  const std::vector<double> pts = x_;
  chol_.resize(0, 0);
  x_.clear();
  for (double p : pts) {
    if (!try_append(p)) {
      x_ = pts;  // restore for the next jitter level
      chol_.resize(0, 0);
      throw std::runtime_error("gp: cholesky append failed during rebuild");
    }
    x_.push_back(p);
  }
}

void GpPosterior::refresh_alpha() {
  const int n = static_cast<int>(x_.size());
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs(i) = y_[i] - mean0_;
  const Eigen::VectorXd tmp = chol_.triangularView<Eigen::Lower>().solve(rhs);
  alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(tmp);
}

void GpPosterior::add(double p, double y) {
  if (!std::isfinite(p) || !std::isfinite(y)) {
    throw std::domain_error("gp: non-finite observation");
  }
  if (!try_append(p)) {
    double jitter = 1e-10;
    bool ok = false;
    const std::vector<double> pts = x_;
    while (jitter <= 1e-6 + 1e-18) {
      try {
        x_ = pts;
        rebuild(jitter);
        if (try_append(p)) {
          ok = true;
          break;
        }
      } catch (const std::runtime_error&) {
      }
      jitter *= 10.0;
    }
    if (!ok) {
      x_ = pts;
      rebuild(jitter_);  // leave the object in its previous valid state
      throw std::runtime_error(
          "gp: gram matrix not positive definite at maximum jitter");
    }
  }
  x_.push_back(p);
  y_.push_back(y);
  refresh_alpha();
}

double GpPosterior::mean(double p) const {
  const int n = size();
  if (n == 0) return mean0_;
  double acc = 0.0;
  Eigen::VectorXd k_vec(n);
  for (int i = 0; i < n; ++i) k_vec(i) = kernel_eval(kernel_, x_[i], p);
  acc = k_vec.dot(alpha_);
  return mean0_ + acc;
}

double GpPosterior::sd(double p) const {
  const int n = size();
  const double prior_var = kernel_eval(kernel_, p, p);
  if (n == 0) return std::sqrt(prior_var);
  Eigen::VectorXd k_vec(n);
  for (int i = 0; i < n; ++i) k_vec(i) = kernel_eval(kernel_, x_[i], p);
  const Eigen::VectorXd w = chol_.triangularView<Eigen::Lower>().solve(k_vec);
  const double var = prior_var - w.squaredNorm();
  return std::sqrt(std::max(0.0, var));
}

void GpPosterior::posterior_grid(const std::vector<double>& grid,
                                 std::vector<double>& mu,
                                 std::vector<double>& sd) const {
  const int n = size();
  const int g = static_cast<int>(grid.size());
  mu.assign(grid.size(), mean0_);
  sd.assign(grid.size(), 0.0);
  if (n == 0) {
    for (int j = 0; j < g; ++j) {
      sd[j] = std::sqrt(kernel_eval(kernel_, grid[j], grid[j]));
    }
    return;
  }
  Eigen::MatrixXd kxg(n, g);
  for (int j = 0; j < g; ++j) {
    for (int i = 0; i < n; ++i) kxg(i, j) = kernel_eval(kernel_, x_[i], grid[j]);
  }
  const Eigen::MatrixXd w = chol_.triangularView<Eigen::Lower>().solve(kxg);
  for (int j = 0; j < g; ++j) {
    mu[j] = mean0_ + kxg.col(j).dot(alpha_);
    const double prior_var = kernel_eval(kernel_, grid[j], grid[j]);
    sd[j] = std::sqrt(std::max(0.0, prior_var - w.col(j).squaredNorm()));
  }
}

double varphi(int t, double delta) {
  if (t < 1) throw std::domain_error("varphi: t >= 1 required");
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::domain_error("varphi: delta in (0,1) required");
  }
  const double td = static_cast<double>(t);
  const double pi = 3.14159265358979323846;
  return 2.0 * std::log(2.0 * td * td * pi * pi / (3.0 * delta)) +
         2.0 * std::log(td * td);
}

std::pair<double, double> revenue_posterior(double mu_d, double sd_d,
                                            double mu_c, double sd_c,
                                            double price) {
  if (sd_d < 0.0 || sd_c < 0.0) {
    throw std::domain_error("revenue_posterior: negative standard deviation");
  }
  return {price * mu_d - mu_c, price * sd_d + sd_c};
}

int ucb_select_index(const GpPosterior& demand, const GpPosterior& claims,
                     const std::vector<double>& grid, double phi) {
  if (grid.empty()) throw std::invalid_argument("ucb_select: empty grid");
  std::vector<double> mu_d, sd_d, mu_c, sd_c;
  demand.posterior_grid(grid, mu_d, sd_d);
  claims.posterior_grid(grid, mu_c, sd_c);
  const double root_phi = std::sqrt(std::max(0.0, phi));
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto [mu_r, sd_r] =
        revenue_posterior(mu_d[j], sd_d[j], mu_c[j], sd_c[j], grid[j]);
    const double v = mu_r + root_phi * sd_r;
    if (v > best_v) {
      best_v = v;
      best = static_cast<int>(j);
    }
  }
  return best;
}

double ucb_select(const GpPosterior& demand, const GpPosterior& claims,
                  const std::vector<double>& grid, double phi) {
  return grid[static_cast<std::size_t>(ucb_select_index(demand, claims, grid, phi))];
}

double information_gain(const Eigen::MatrixXd& gram, double sigma) {
  if (gram.rows() != gram.cols()) {
    throw std::invalid_argument("information_gain: square matrix required");
  }
  if (!(sigma > 0.0)) {
    throw std::domain_error("information_gain: sigma > 0 required");
  }
  const Eigen::Index n = gram.rows();
  if (n == 0) return 0.0;
  Eigen::MatrixXd m =
      Eigen::MatrixXd::Identity(n, n) + gram / (sigma * sigma);
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("information_gain: matrix not positive definite");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(l(i, i));
  return log_det;  // 1/2 * (2 * sum log diag)
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 1 || !(hi >= lo)) {
    throw std::invalid_argument("uniform_grid: bad arguments");
  }
  std::vector<double> grid(static_cast<std::size_t>(n));
  if (n == 1) {
    grid[0] = lo;
    return grid;
  }
  for (int i = 0; i < n; ++i) {
    grid[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  return grid;
}

GpPolicy::GpPolicy(GpConfig cfg)
    : cfg_(cfg),
      grid_(uniform_grid(cfg.p_low, cfg.p_high, cfg.grid_size)),
      demand_(cfg.demand_kernel, cfg.noise_sd, cfg.prior_mean_demand),
      claims_(cfg.claims_kernel, cfg.noise_sd, cfg.prior_mean_claims) {
  if (!(cfg_.delta > 0.0) || !(cfg_.delta < 1.0)) {
    throw std::invalid_argument("gp: delta must lie in (0,1)");
  }
}

double GpPolicy::next_price(int t) {
  return ucb_select(demand_, claims_, grid_, varphi(t, cfg_.delta));
}

void GpPolicy::observe_demand(double price, double demand) {
  demand_.add(price, demand);
}

void GpPolicy::observe_claim(double origin_price, double claim) {
  claims_.add(origin_price, claim);
}

}  // namespace pbandit
