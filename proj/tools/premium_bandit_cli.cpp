#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "premium_bandit/config.hpp"

namespace {

double mean_final(const std::vector<pbandit::RegretTrace>& traces) {
  if (traces.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& tr : traces) sum += pbandit::final_cumulative_regret(tr);
  return sum / static_cast<double>(traces.size());
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pbandit;

  CLI::App app{
      "Simulates adaptive insurance pricing policies against a synthetic "
      "market and reports cumulative regret."};
  std::string config_path;
  std::string algo_str;
  std::string seeds_str;
  std::string truth_str;
  std::string out_dir;
  int horizon = 0;
  int delay_max = 0;
  int jobs = 0;
  bool print_config = false;

  auto* opt_config =
      app.add_option("--config", config_path, "JSON config file");
  auto* opt_algo = app.add_option("--algo", algo_str, "glm, gp or compare")
                       ->check(CLI::IsMember({"glm", "gp", "compare"}));
  auto* opt_horizon = app.add_option("--horizon", horizon, "periods per run")
                          ->check(CLI::PositiveNumber);
  auto* opt_seeds =
      app.add_option("--seeds", seeds_str, "seed list, e.g. 1,2,5-8");
  auto* opt_delay =
      app.add_option("--delay-max", delay_max,
                     "max claim delay in periods; 0 turns delays off")
          ->check(CLI::NonNegativeNumber);
  auto* opt_truth =
      app.add_option("--truth", truth_str, "auto, parametric or sampled")
          ->check(CLI::IsMember({"auto", "parametric", "sampled"}));
  auto* opt_jobs = app.add_option("--jobs", jobs, "worker threads; 0 = all cores")
                       ->check(CLI::NonNegativeNumber);
  auto* opt_out = app.add_option("--out", out_dir, "output directory");
  app.add_flag("--print-config", print_config,
               "print the effective config as JSON and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    CliConfig cfg = default_config();
    if (opt_config->count() > 0) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) {
        std::cerr << "error: cannot read config file " << config_path << "\n";
        return 2;
      }
      std::stringstream buffer;
      buffer << in.rdbuf();
      cfg = parse_config(buffer.str());
    }
    if (opt_algo->count() > 0) {
      cfg.algo = algo_str == "glm"  ? Algo::glm
                 : algo_str == "gp" ? Algo::gp
                                    : Algo::compare;
    }
    if (opt_horizon->count() > 0) cfg.run.horizon = horizon;
    if (opt_seeds->count() > 0) cfg.run.seeds = parse_seed_list(seeds_str);
    if (opt_delay->count() > 0) {
      cfg.run.delay.m = delay_max;
      cfg.delayed = delay_max > 0;
      if (delay_max > 0 && cfg.run.delay.kind == DelayKind::none) {
        cfg.run.delay.kind = DelayKind::uniform;
      }
    }
    if (opt_truth->count() > 0) {
      if (truth_str == "auto") {
        cfg.truth_auto = true;
      } else {
        cfg.truth_auto = false;
        cfg.run.truth = truth_str == "parametric" ? TruthMode::parametric
                                                  : TruthMode::sampled;
      }
    }
    if (opt_jobs->count() > 0) cfg.run.jobs = jobs;
    if (opt_out->count() > 0) cfg.run.output_dir = out_dir;

    resolve_truth(cfg);
    apply_env_seed(cfg);
    validate_config(cfg);

    if (print_config) {
      std::cout << serialize_config(cfg);
      return 0;
    }

    std::vector<std::pair<PolicyKind, bool>> variants;
    if (cfg.algo == Algo::compare) {
      if (cfg.run.delay.kind == DelayKind::none) {
        cfg.run.delay.kind = DelayKind::uniform;
      }
      variants = {{PolicyKind::glm, false},
                  {PolicyKind::glm, true},
                  {PolicyKind::gp, false},
                  {PolicyKind::gp, true}};
    } else {
      const PolicyKind kind =
          cfg.algo == Algo::glm ? PolicyKind::glm : PolicyKind::gp;
      variants.emplace_back(kind, false);
      if (cfg.delayed) variants.emplace_back(kind, true);
    }

    std::filesystem::create_directories(cfg.run.output_dir);
    std::vector<std::string> csv_names;
    std::printf("%-14s %6s %24s\n", "variant", "runs", "mean final cum regret");
    for (const auto& [kind, delayed] : variants) {
      const std::vector<RegretTrace> traces = run_many(cfg.run, kind, delayed);
      for (const RegretTrace& tr : traces) {
        const std::string name = tr.run_id + ".csv";
        export_csv(tr,
                   (std::filesystem::path(cfg.run.output_dir) / name).string());
        csv_names.push_back(name);
      }
      std::string label = kind == PolicyKind::glm ? "glm" : "gp";
      if (delayed) label += "-delayed";
      std::printf("%-14s %6zu %24.6f\n", label.c_str(), traces.size(),
                  mean_final(traces));
    }
    write_plot_script(csv_names, cfg.run.output_dir);
    std::cout << csv_names.size() << " csv files and plot.gp written to "
              << cfg.run.output_dir << "\n";
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
