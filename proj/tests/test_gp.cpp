#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "premium_bandit/gp.hpp"
#include "premium_bandit/rng.hpp"

using namespace pbandit;

namespace {

struct DenseRef {
  Eigen::MatrixXd k;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd alpha;
  std::vector<double> x;
  KernelSpec kernel;
  double noise = 0.0;
  double mean0 = 0.0;

  DenseRef(const KernelSpec& ks, double noise_sd, double prior_mean,
           const std::vector<double>& xs, const std::vector<double>& ys,
           double jitter = 0.0)
      : x(xs), kernel(ks), noise(noise_sd), mean0(prior_mean) {
    const int n = static_cast<int>(xs.size());
    k.resize(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) k(i, j) = kernel_eval(ks, xs[i], xs[j]);
    }
    k.diagonal().array() += noise_sd * noise_sd + jitter;
    llt.compute(k);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) rhs(i) = ys[i] - prior_mean;
    alpha = llt.solve(rhs);
  }

  double mean(double q) const {
    const int n = static_cast<int>(x.size());
    double m = mean0;
    for (int i = 0; i < n; ++i) m += kernel_eval(kernel, x[i], q) * alpha(i);
    return m;
  }

  double sd(double q) const {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd kv(n);
    for (int i = 0; i < n; ++i) kv(i) = kernel_eval(kernel, x[i], q);
    const double var = kernel_eval(kernel, q, q) - kv.dot(llt.solve(kv));
    return std::sqrt(std::max(0.0, var));
  }
};

}  // namespace

TEST_CASE("kernel value pins at unit distance") {
  const KernelSpec se{KernelKind::squared_exponential, 1.0, 1.0};
  const KernelSpec m12{KernelKind::matern_1_2, 1.0, 1.0};
  const KernelSpec m32{KernelKind::matern_3_2, 1.0, 1.0};
  const KernelSpec m52{KernelKind::matern_5_2, 1.0, 1.0};
  CHECK(kernel_eval(se, 0.0, 1.0) ==
        doctest::Approx(0.60653065971263342).epsilon(1e-14));
  CHECK(kernel_eval(m12, 0.0, 1.0) ==
        doctest::Approx(0.36787944117144232).epsilon(1e-14));
  CHECK(kernel_eval(m32, 0.0, 1.0) ==
        doctest::Approx(0.48335772459650765).epsilon(1e-14));
  CHECK(kernel_eval(m52, 0.0, 1.0) ==
        doctest::Approx(0.52399410883182031).epsilon(1e-14));

  const KernelSpec scaled{KernelKind::matern_5_2, 0.5, 2.5};
  CHECK(kernel_eval(scaled, 2.0, 2.7) ==
        doctest::Approx(0.80806882407940239).epsilon(1e-14));
}

TEST_CASE("kernels are symmetric with variance on the diagonal") {
  SubStream rng(12, Stream::truth);
  for (KernelKind kind :
       {KernelKind::squared_exponential, KernelKind::matern_1_2,
        KernelKind::matern_3_2, KernelKind::matern_5_2}) {
    const KernelSpec ks{kind, 0.7, 1.9};
    for (int i = 0; i < 50; ++i) {
      const double a = 10.0 * rng.uniform();
      const double b = 10.0 * rng.uniform();
      CHECK(kernel_eval(ks, a, b) == kernel_eval(ks, b, a));
      CHECK(kernel_eval(ks, a, b) <= 1.9 + 1e-15);
      CHECK(kernel_eval(ks, a, b) > 0.0);
    }
    CHECK(kernel_eval(ks, 3.0, 3.0) == doctest::Approx(1.9).epsilon(1e-14));
  }
}

TEST_CASE("incremental posterior matches a dense solve") {
  SubStream rng(21, Stream::truth);
  for (int rep = 0; rep < 30; ++rep) {
    const KernelKind kind = static_cast<KernelKind>(rep % 4);
    const KernelSpec ks{kind, 0.5 + rng.uniform(), 0.5 + rng.uniform()};
    const double noise = 0.05 + 0.1 * rng.uniform();
    const double mean0 = 4.0 * (rng.uniform() - 0.5);
    GpPosterior gp(ks, noise, mean0);
    std::vector<double> xs;
    std::vector<double> ys;
    const int n = 5 + rng.uniform_int(35);
    for (int i = 0; i < n; ++i) {
      const double x = 0.5 + 9.5 * rng.uniform();
      const double y = mean0 + std::sin(x) + 0.1 * rng.normal();
      xs.push_back(x);
      ys.push_back(y);
      gp.add(x, y);
    }
    CHECK(gp.jitter() == 0.0);
    const DenseRef ref(ks, noise, mean0, xs, ys);
    for (double q : {0.5, 2.7, 5.1, 9.9}) {
      CHECK(gp.mean(q) == doctest::Approx(ref.mean(q)).epsilon(1e-9));
      CHECK(gp.sd(q) == doctest::Approx(ref.sd(q)).scale(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("batched grid queries equal single-point queries") {
  const KernelSpec ks{KernelKind::matern_3_2, 1.0, 1.0};
  GpPosterior gp(ks, 0.05, 0.0);
  SubStream rng(5, Stream::truth);
  for (int i = 0; i < 25; ++i) {
    gp.add(0.5 + 9.5 * rng.uniform(), rng.normal());
  }
  const std::vector<double> grid = uniform_grid(0.5, 10.0, 64);
  std::vector<double> mu, sd;
  gp.posterior_grid(grid, mu, sd);
  REQUIRE(mu.size() == grid.size());
  REQUIRE(sd.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(mu[i] == doctest::Approx(gp.mean(grid[i])).epsilon(1e-12));
    CHECK(sd[i] == doctest::Approx(gp.sd(grid[i])).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("posterior variance shrinks at data and excludes noise") {
  const KernelSpec ks{KernelKind::squared_exponential, 1.0, 1.0};
  GpPosterior gp(ks, 0.1, 0.0);
  CHECK(gp.sd(5.0) == doctest::Approx(1.0).epsilon(1e-12));  // prior sd
  for (int i = 0; i < 200; ++i) gp.add(5.0, 0.3);
  CHECK(gp.sd(5.0) < 0.03);  // far below the noise sd of 0.1
  CHECK(gp.sd(5.0) >= 0.0);
  CHECK(gp.mean(5.0) == doctest::Approx(0.3).epsilon(1e-2));
  // Far away the prior still rules.
  CHECK(gp.sd(5.0 + 40.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("zero observation noise falls back to the jitter ladder") {
  const KernelSpec ks{KernelKind::squared_exponential, 1.0, 1.0};
  GpPosterior gp(ks, 0.0, 0.0);
  gp.add(2.0, 1.0);
  gp.add(2.0, 1.0);  // duplicate row would make the gram singular
  CHECK(gp.jitter() >= 1e-10);
  CHECK(gp.jitter() <= 1e-6);
  CHECK(std::isfinite(gp.mean(2.0)));
  CHECK(std::isfinite(gp.sd(2.0)));
  CHECK(gp.mean(2.0) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("non-finite observations are rejected") {
  const KernelSpec ks{KernelKind::matern_3_2, 1.0, 1.0};
  GpPosterior gp(ks, 0.05, 0.0);
  CHECK_THROWS_AS(gp.add(std::nan(""), 1.0), std::domain_error);
  CHECK_THROWS_AS(gp.add(1.0, std::nan("")), std::domain_error);
}

TEST_CASE("confidence width pins and monotonicity") {
  CHECK(varphi(1, 0.1) == doctest::Approx(8.3731595131693633).epsilon(1e-12));
  CHECK(varphi(10, 0.1) == doctest::Approx(26.793840257121729).epsilon(1e-12));
  CHECK(varphi(5, 0.5) == doctest::Approx(18.029786987773966).epsilon(1e-12));
  CHECK(varphi(2, 0.1) > varphi(1, 0.1));
  CHECK(varphi(5, 0.05) > varphi(5, 0.5));
  CHECK_THROWS_AS(varphi(0, 0.1), std::domain_error);
  CHECK_THROWS_AS(varphi(1, 0.0), std::domain_error);
  CHECK_THROWS_AS(varphi(1, 1.0), std::domain_error);
}

TEST_CASE("revenue posterior combines the two surfaces") {
  const auto [mu, sd] = revenue_posterior(7.0, 0.5, 20.0, 0.25, 3.0);
  CHECK(mu == doctest::Approx(3.0 * 7.0 - 20.0));
  CHECK(sd == doctest::Approx(3.0 * 0.5 + 0.25));
  CHECK_THROWS_AS(revenue_posterior(1.0, -0.1, 0.0, 0.0, 1.0),
                  std::domain_error);
}

TEST_CASE("ucb selection takes the maximiser and breaks ties low") {
  const KernelSpec ks{KernelKind::matern_3_2, 1.0, 1.0};
  GpPosterior d(ks, 0.05, 0.0);
  GpPosterior c(ks, 0.05, 0.0);

  // Empty posteriors: ucb = sqrt(phi) (p sd_d + sd_c), increasing in p,
  // so the highest grid price wins.
  const std::vector<double> grid{1.0, 5.0, 7.0, 9.0};
  CHECK(ucb_select_index(d, c, grid, 4.0) == 3);
  CHECK(ucb_select(d, c, grid, 4.0) == 9.0);

  // A duplicated grid price produces an exact tie; strict comparison keeps
  // the first (lower-index) entry.
  const std::vector<double> dup{5.0, 5.0};
  CHECK(ucb_select_index(d, c, dup, 4.0) == 0);

  CHECK_THROWS_AS(ucb_select_index(d, c, std::vector<double>{}, 4.0),
                  std::invalid_argument);

  // With data and no exploration bonus the posterior mean rules: revenue
  // p * mu_d(p) peaks where the demand bump was observed.
  d.add(2.0, 10.0);
  const std::vector<double> grid2{1.0, 2.0, 3.0, 9.0};
  CHECK(ucb_select_index(d, c, grid2, 0.0) == 1);
}

TEST_CASE("information gain matches the sequential identity") {
  SubStream rng(77, Stream::truth);
  for (int rep = 0; rep < 25; ++rep) {
    const KernelSpec ks{static_cast<KernelKind>(rep % 4),
                        0.5 + rng.uniform(), 0.5 + rng.uniform()};
    const double sigma = 0.1 + 0.2 * rng.uniform();
    const int n = 2 + rng.uniform_int(18);
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(0.5 + 9.5 * rng.uniform());

    Eigen::MatrixXd gram(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) gram(i, j) = kernel_eval(ks, xs[i], xs[j]);
    }
    const double batch = information_gain(gram, sigma);

    GpPosterior gp(ks, sigma, 0.0);
    double seq = 0.0;
    for (double x : xs) {
      const double v = gp.sd(x) * gp.sd(x);
      seq += 0.5 * std::log1p(v / (sigma * sigma));
      gp.add(x, 0.0);
    }
    CHECK(batch == doctest::Approx(seq).epsilon(1e-8));
    CHECK(batch >= 0.0);
  }
}

TEST_CASE("information gain of a kernel sum is subadditive") {
  SubStream rng(78, Stream::truth);
  const KernelSpec kd{KernelKind::matern_3_2, 1.0, 1.0};
  const KernelSpec kc{KernelKind::matern_5_2, 0.8, 1.3};
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 2 + rng.uniform_int(18);
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(0.5 + 9.5 * rng.uniform());
    Eigen::MatrixXd gd(n, n), gc(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        gd(i, j) = kernel_eval(kd, xs[i], xs[j]);
        gc(i, j) = kernel_eval(kc, xs[i], xs[j]);
      }
    }
    const double sigma = 0.2;
    const double sum_gain = information_gain(gd + gc, sigma);
    const double split = information_gain(gd, sigma) + information_gain(gc, sigma);
    CHECK(sum_gain <= split * (1.0 + 1e-12) + 1e-12);
  }
}

TEST_CASE("information gain input validation") {
  Eigen::MatrixXd empty(0, 0);
  CHECK(information_gain(empty, 0.1) == 0.0);
  Eigen::MatrixXd rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(information_gain(rect, 0.1), std::invalid_argument);
  Eigen::MatrixXd one(1, 1);
  one(0, 0) = 1.0;
  CHECK_THROWS_AS(information_gain(one, 0.0), std::domain_error);
}

TEST_CASE("uniform grid endpoints and spacing") {
  const std::vector<double> g = uniform_grid(0.5, 10.0, 20);
  REQUIRE(g.size() == 20);
  CHECK(g.front() == 0.5);
  CHECK(g.back() == 10.0);
  const double h = (10.0 - 0.5) / 19.0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] - g[i - 1] == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("fresh policy opens at the highest grid price") {
  GpConfig cfg;
  cfg.grid_size = 32;
  cfg.p_low = 0.5;
  cfg.p_high = 10.0;
  GpPolicy pol(cfg);
  CHECK(pol.next_price(1) == 10.0);
}

TEST_CASE("policy delta validation") {
  GpConfig cfg;
  cfg.delta = 0.0;
  CHECK_THROWS_AS(GpPolicy{cfg}, std::invalid_argument);
  cfg.delta = 1.0;
  CHECK_THROWS_AS(GpPolicy{cfg}, std::invalid_argument);
}

TEST_CASE("policy learns a simple revenue curve") {
  // Noiseless parabola: demand 8 - p, claims flat 6.
  // Revenue p(8-p) - 6 maximised near p = 4.
  GpConfig cfg;
  cfg.grid_size = 64;
  cfg.p_low = 0.5;
  cfg.p_high = 10.0;
  cfg.noise_sd = 0.05;
  cfg.prior_mean_demand = 4.0;
  cfg.prior_mean_claims = 6.0;
  GpPolicy pol(cfg);
  SubStream noise(3, Stream::demand);
  double early = 0.0;
  double late = 0.0;
  const int horizon = 60;
  for (int t = 1; t <= horizon; ++t) {
    const double p = pol.next_price(t);
    CHECK(p >= 0.5);
    CHECK(p <= 10.0);
    const double d = 8.0 - p + 0.05 * noise.normal();
    const double c = 6.0 + 0.05 * noise.normal();
    pol.observe_demand(p, d);
    pol.observe_claim(p, c);
    const double regret = 10.0 - (p * (8.0 - p) - 6.0);
    if (t <= 20) early += regret;
    if (t > horizon - 20) late += regret;
  }
  CHECK(late < early);
}
