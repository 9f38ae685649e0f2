#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace pbandit {

enum class KernelKind {
  squared_exponential,
  matern_1_2,
  matern_3_2,
  matern_5_2,
};

struct KernelSpec {
  KernelKind kind = KernelKind::squared_exponential;
  double length_scale = 1.0;
  double variance = 1.0;  // output scale, k(p,p)
};

double kernel_eval(const KernelSpec& spec, double p, double q);

// One-dimensional GP regression with fixed hyperparameters.
//
// Maintains the lower Cholesky factor of (K + sigma^2 I) by an incremental
// row append (solve L l = k_new, l_nn = sqrt(k(p,p)+sigma^2-|l|^2)); when an
// append loses positive definiteness the factor is rebuilt with diagonal
// jitter escalating 1e-10 -> 1e-6 by factors of 10 before an error surfaces.
// Posterior queries follow the standard kriging equations; the reported
// variance is of the latent function (no observation noise added back).
class GpPosterior {
 public:
  GpPosterior(KernelSpec kernel, double noise_sd, double prior_mean = 0.0);

  void add(double p, double y);

  [[nodiscard]] double mean(double p) const;
  [[nodiscard]] double sd(double p) const;

  // Batched posterior over a query grid, one triangular solve for all points.
  void posterior_grid(const std::vector<double>& grid, std::vector<double>& mu,
                      std::vector<double>& sd) const;

  [[nodiscard]] int size() const { return static_cast<int>(x_.size()); }
  [[nodiscard]] const std::vector<double>& points() const { return x_; }
  [[nodiscard]] const std::vector<double>& values() const { return y_; }
  [[nodiscard]] const KernelSpec& kernel() const { return kernel_; }
  [[nodiscard]] double noise_sd() const { return noise_; }
  [[nodiscard]] double prior_mean() const { return mean0_; }
  [[nodiscard]] double jitter() const { return jitter_; }

 private:
  void rebuild(double jitter);
  bool try_append(double p);
  void refresh_alpha();

  KernelSpec kernel_;
  double noise_ = 0.0;
  double mean0_ = 0.0;
  std::vector<double> x_;
  std::vector<double> y_;
  Eigen::MatrixXd chol_;   // lower triangular, n x n
  Eigen::VectorXd alpha_;  // (K + sigma^2 I)^{-1} (y - mean0)
  double jitter_ = 0.0;
};

// Confidence width schedule: 2 log(2 t^2 pi^2 / (3 delta)) + 2 log(t^2).
double varphi(int t, double delta);

// mu_r = price*mu_d - mu_c, sd_r = price*sd_d + sd_c.
std::pair<double, double> revenue_posterior(double mu_d, double sd_d,
                                            double mu_c, double sd_c,
                                            double price);

// argmax over the grid of mu_r + sqrt(phi) sd_r; ties toward lower price
// (first index on an ascending grid). Returns the grid index.
int ucb_select_index(const GpPosterior& demand, const GpPosterior& claims,
                     const std::vector<double>& grid, double phi);
double ucb_select(const GpPosterior& demand, const GpPosterior& claims,
                  const std::vector<double>& grid, double phi);

// 1/2 log det(I + sigma^-2 K) via Cholesky log-determinant.
double information_gain(const Eigen::MatrixXd& gram, double sigma);

struct GpConfig {
  KernelSpec demand_kernel{KernelKind::matern_3_2, 1.0, 1.0};
  KernelSpec claims_kernel{KernelKind::matern_5_2, 1.0, 1.0};
  double noise_sd = 0.05;
  double delta = 0.1;
  int grid_size = 512;
  double p_low = 0.5;
  double p_high = 10.0;
  double prior_mean_demand = 0.0;
  double prior_mean_claims = 0.0;
};

std::vector<double> uniform_grid(double lo, double hi, int n);

// UCB pricing policy over two GPs (demand, claims) on a fixed price grid.
// Demand observations arrive every period; claim observations whenever they
// become visible, paired with their origin price.
class GpPolicy {
 public:
  explicit GpPolicy(GpConfig cfg);

  double next_price(int t);

  void observe_demand(double price, double demand);
  void observe_claim(double origin_price, double claim);

  [[nodiscard]] const std::vector<double>& grid() const { return grid_; }
  [[nodiscard]] const GpPosterior& demand_posterior() const { return demand_; }
  [[nodiscard]] const GpPosterior& claims_posterior() const { return claims_; }

 private:
  GpConfig cfg_;
  std::vector<double> grid_;
  GpPosterior demand_;
  GpPosterior claims_;
};

}  // namespace pbandit
