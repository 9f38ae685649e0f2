#include "premium_bandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "premium_bandit/delay.hpp"
#include "premium_bandit/optimize.hpp"

namespace pbandit {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

double rate_denominator(int t) {
  const double lt = std::log(static_cast<double>(std::max(t, 2)));
  return std::sqrt(static_cast<double>(t) * lt);
}

int snap_to_grid(const std::vector<double>& grid, double p) {
  const double lo = grid.front();
  const double hi = grid.back();
  const int n = static_cast<int>(grid.size());
  if (n == 1 || hi <= lo) return 0;
  const double x = (p - lo) / (hi - lo) * (n - 1);
  const int i = static_cast<int>(std::lround(x));
  return std::clamp(i, 0, n - 1);
}

}  // namespace

std::pair<double, double> oracle_optimal_price(const MarketParams& mp) {
  auto revenue = [&](double p) { return expected_revenue(p, mp); };
  return grid_golden_max(revenue, mp.p_low, mp.p_high, 1000000, 1e-8);
}

SampledTruth draw_sampled_truth(const GpConfig& cfg, double p_low,
                                double p_high, std::uint64_t seed) {
  SampledTruth truth;
  truth.grid = uniform_grid(p_low, p_high, cfg.grid_size);
  const int g = static_cast<int>(truth.grid.size());
  SubStream rng(seed, Stream::truth);

  auto draw_curve = [&](const KernelSpec& kernel, double mean) {
    Eigen::MatrixXd gram(g, g);
    for (int i = 0; i < g; ++i) {
      for (int j = 0; j < g; ++j) {
        gram(i, j) = kernel_eval(kernel, truth.grid[static_cast<std::size_t>(i)],
                                 truth.grid[static_cast<std::size_t>(j)]);
      }
    }
    Eigen::VectorXd z(g);
    for (int i = 0; i < g; ++i) z(i) = rng.normal();
    double jitter = 1e-10;
    for (;;) {
      Eigen::MatrixXd m = gram;
      m.diagonal().array() += jitter;
      const Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() == Eigen::Success) {
        const Eigen::VectorXd f = Eigen::MatrixXd(llt.matrixL()) * z;
        std::vector<double> out(static_cast<std::size_t>(g));
        for (int i = 0; i < g; ++i) out[static_cast<std::size_t>(i)] = mean + f(i);
        return out;
      }
      jitter *= 10.0;
      if (jitter > 1e-2) {
        throw std::runtime_error("sampled truth: gram not positive definite");
      }
    }
  };

  truth.f_demand = draw_curve(cfg.demand_kernel, cfg.prior_mean_demand);
  truth.f_claims = draw_curve(cfg.claims_kernel, cfg.prior_mean_claims);

  truth.oracle_index = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < g; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    const double r = truth.grid[k] * truth.f_demand[k] - truth.f_claims[k];
    if (r > best) {
      best = r;
      truth.oracle_index = i;
    }
  }
  truth.p_star = truth.grid[static_cast<std::size_t>(truth.oracle_index)];
  truth.r_star = best;
  return truth;
}

std::string run_label(PolicyKind policy, bool delayed, std::uint64_t seed) {
  std::string label = policy == PolicyKind::glm ? "glm" : "gp";
  if (delayed) label += "-delayed";
  label += "-s" + std::to_string(seed);
  return label;
}

RegretTrace run_experiment(const RunConfig& cfg, PolicyKind policy,
                           bool delayed, std::uint64_t seed) {
  validate(cfg.market);
  RegretTrace tr;
  tr.run_id = run_label(policy, delayed, seed);
  const int horizon = cfg.horizon;
  if (horizon <= 0) return tr;
  if (delayed && cfg.delay.kind == DelayKind::none) {
    throw std::invalid_argument("run: delayed run needs a delay distribution");
  }

  const bool sampled = cfg.truth == TruthMode::sampled;
  const MarketParams& mp = cfg.market;

  GpConfig gp_cfg = cfg.gp;
  gp_cfg.p_low = mp.p_low;
  gp_cfg.p_high = mp.p_high;

  SampledTruth truth;
  if (sampled) {
    truth = draw_sampled_truth(gp_cfg, mp.p_low, mp.p_high, seed);
    tr.p_star = truth.p_star;
    tr.r_star = truth.r_star;
  } else {
    const auto [ps, rs] = oracle_optimal_price(mp);
    tr.p_star = ps;
    tr.r_star = rs;
  }

  GlmConfig glm_cfg = cfg.glm;
  glm_cfg.p_low = mp.p_low;
  glm_cfg.p_high = mp.p_high;
  if (!sampled) {
    glm_cfg.demand_link = mp.demand_link;
    glm_cfg.claims_link = mp.claims_link;
    // The plug-in revenue needs the environment's log-claims dispersion for
    // its lognormal correction, exactly like it needs the links.
    glm_cfg.sigma2 = mp.sigma2;
  } else {
    glm_cfg.demand_link = Link::identity;
    glm_cfg.claims_link = Link::identity;
  }

  std::optional<GlmPolicy> glm_pol;
  std::optional<GpPolicy> gp_pol;
  if (policy == PolicyKind::glm) {
    glm_pol.emplace(glm_cfg);
  } else {
    gp_pol.emplace(gp_cfg);
  }

  const DelayConfig delay_cfg = delayed ? cfg.delay : DelayConfig{};
  DelayLedger ledger(delayed ? cfg.delay.m : 0);
  EnvRng rng(seed);

  std::vector<double> price_of_period(static_cast<std::size_t>(horizon) + 1, 0.0);
  double cum = 0.0;

  for (int t = 1; t <= horizon; ++t) {
    double price = policy == PolicyKind::glm ? glm_pol->next_price(t)
                                             : gp_pol->next_price(t);
    price = std::clamp(price, mp.p_low, mp.p_high);
    int grid_index = 0;
    if (sampled) {
      grid_index = snap_to_grid(truth.grid, price);
      price = truth.grid[static_cast<std::size_t>(grid_index)];
    }
    price_of_period[static_cast<std::size_t>(t)] = price;

    double demand = 0.0;
    double claim = 0.0;
    int tau = 0;
    const int tau_cap = delayed ? horizon - t : 0;
    if (sampled) {
      const std::size_t k = static_cast<std::size_t>(grid_index);
      demand = truth.f_demand[k] + gp_cfg.noise_sd * rng.demand.normal();
      claim = truth.f_claims[k] + gp_cfg.noise_sd * rng.claims.normal();
      tau = std::min(draw_delay(delay_cfg, rng.delay), std::max(0, tau_cap));
    } else {
      const Observation obs = step(price, t, mp, delay_cfg, tau_cap, rng);
      demand = obs.demand;
      claim = obs.claim;
      tau = obs.claim_visible_at - t;
    }

    if (policy == PolicyKind::glm) {
      glm_pol->observe_demand(price, demand);
    } else {
      gp_pol->observe_demand(price, demand);
    }
    ledger.record_delay(t, tau, claim);
    for (const auto& [origin, value] : ledger.collect(t)) {
      const double origin_price = price_of_period[static_cast<std::size_t>(origin)];
      if (policy == PolicyKind::glm) {
        glm_pol->observe_claim(origin_price, value);
      } else {
        gp_pol->observe_claim(origin_price, value);
      }
    }

    double true_rev = 0.0;
    if (sampled) {
      const std::size_t k = static_cast<std::size_t>(grid_index);
      true_rev = price * truth.f_demand[k] - truth.f_claims[k];
    } else {
      true_rev = expected_revenue(price, mp);
    }
    const double regret = tr.r_star - true_rev;
    cum += regret;

    tr.price.push_back(price);
    tr.demand.push_back(demand);
    tr.claims.push_back(claim);
    tr.per_period_regret.push_back(regret);
    tr.cumulative.push_back(cum);
    tr.rate_series.push_back(cum / rate_denominator(t));
    if (policy == PolicyKind::glm) {
      tr.trace_metric.push_back(glm_pol->trace_metric());
      double err = nan_value;
      if (!sampled && glm_pol->beta()) {
        const BetaPair& b = *glm_pol->beta();
        const Vec2 da = b.demand - Vec2{mp.a0, mp.a1};
        const Vec2 db = b.claims - Vec2{mp.b0, mp.b1};
        err = dot(da, da) + dot(db, db);
      }
      tr.beta_err.push_back(err);
      tr.branch.push_back(static_cast<int>(glm_pol->last_branch()));
      tr.l1.push_back(glm_pol->l1_at(t));
    } else {
      tr.trace_metric.push_back(nan_value);
      tr.beta_err.push_back(nan_value);
    }
  }
  return tr;
}

std::vector<RegretTrace> run_many(const RunConfig& cfg, PolicyKind policy,
                                  bool delayed) {
  const std::size_t n = cfg.seeds.size();
  std::vector<RegretTrace> out(n);
  if (n == 0) return out;
  unsigned jobs = cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs)
                               : std::thread::hardware_concurrency();
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[i] = run_experiment(cfg, policy, delayed, cfg.seeds[i]);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

namespace {

void append_field(std::string& line, double v) {
  if (std::isnan(v)) return;  // empty field
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  line += buf;
}

}  // namespace

void export_csv(const RegretTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("export_csv: cannot open " + path);
  out << "run_id,t,price,demand,claims,regret,cum_regret,trace_metric,beta_err\n";
  const std::size_t n = trace.price.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::string line = trace.run_id;
    line += ',';
    line += std::to_string(i + 1);
    for (const std::vector<double>* col :
         {&trace.price, &trace.demand, &trace.claims, &trace.per_period_regret,
          &trace.cumulative, &trace.trace_metric, &trace.beta_err}) {
      line += ',';
      append_field(line, (*col)[i]);
    }
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("export_csv: write failed for " + path);
}

RegretTrace import_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("import_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("import_csv: empty file " + path);
  }
  RegretTrace tr;
  auto to_double = [](const std::string& s) {
    return s.empty() ? nan_value : std::stod(s);
  };
  int t = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    fields.resize(9);
    ++t;
    tr.run_id = fields[0];
    tr.price.push_back(to_double(fields[2]));
    tr.demand.push_back(to_double(fields[3]));
    tr.claims.push_back(to_double(fields[4]));
    tr.per_period_regret.push_back(to_double(fields[5]));
    tr.cumulative.push_back(to_double(fields[6]));
    tr.rate_series.push_back(to_double(fields[6]) / rate_denominator(t));
    tr.trace_metric.push_back(to_double(fields[7]));
    tr.beta_err.push_back(to_double(fields[8]));
  }
  return tr;
}

void write_plot_script(const std::vector<std::string>& csv_names,
                       const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / "plot.gp", std::ios::binary);
  if (!out) throw std::runtime_error("write_plot_script: cannot open plot.gp");
  out << "set datafile separator ','\n"
      << "set xlabel 't'\n"
      << "set ylabel 'cumulative regret'\n"
      << "set key outside\n";
  if (csv_names.empty()) {
    out << "# no runs\n";
    return;
  }
  out << "plot \\\n";
  for (std::size_t i = 0; i < csv_names.size(); ++i) {
    std::string title = csv_names[i];
    if (title.size() > 4 && title.substr(title.size() - 4) == ".csv") {
      title = title.substr(0, title.size() - 4);
    }
    out << "  '" << csv_names[i] << "' using 2:7 with lines title '" << title
        << "'";
    out << (i + 1 < csv_names.size() ? ", \\\n" : "\n");
  }
}

double final_cumulative_regret(const RegretTrace& trace) {
  return trace.cumulative.empty() ? 0.0 : trace.cumulative.back();
}

}  // namespace pbandit
