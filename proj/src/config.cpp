#include "premium_bandit/config.hpp"

#include <cctype>
#include <cstdlib>
#include <initializer_list>
#include <stdexcept>

#include "json.hpp"

namespace pbandit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail("unknown key '" + (path.empty() ? it.key() : path + "." + it.key()) +
           "'");
    }
  }
}

const json& expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail("'" + path + "' must be an object");
  return j;
}

double get_num(const json& j, const std::string& path) {
  if (!j.is_number()) fail("'" + path + "' must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail("'" + path + "' must be an integer");
  return j.get<int>();
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail("'" + path + "' must be a boolean");
  return j.get<bool>();
}

std::string get_str(const json& j, const std::string& path) {
  if (!j.is_string()) fail("'" + path + "' must be a string");
  return j.get<std::string>();
}

Link parse_link(const json& j, const std::string& path) {
  const std::string s = get_str(j, path);
  if (s == "identity") return Link::identity;
  if (s == "log") return Link::log;
  if (s == "logit") return Link::logit;
  fail("'" + path + "' must be one of identity, log, logit");
}

std::string link_name(Link link) {
  switch (link) {
    case Link::identity: return "identity";
    case Link::log: return "log";
    case Link::logit: return "logit";
  }
  return "identity";
}

NoiseFamily parse_noise(const json& j, const std::string& path) {
  const std::string s = get_str(j, path);
  if (s == "logistic") return NoiseFamily::logistic;
  if (s == "normal") return NoiseFamily::normal;
  fail("'" + path + "' must be one of logistic, normal");
}

std::string noise_name(NoiseFamily f) {
  return f == NoiseFamily::logistic ? "logistic" : "normal";
}

KernelKind parse_kernel_kind(const json& j, const std::string& path) {
  const std::string s = get_str(j, path);
  if (s == "squared_exponential") return KernelKind::squared_exponential;
  if (s == "matern_1_2") return KernelKind::matern_1_2;
  if (s == "matern_3_2") return KernelKind::matern_3_2;
  if (s == "matern_5_2") return KernelKind::matern_5_2;
  fail("'" + path +
       "' must be one of squared_exponential, matern_1_2, matern_3_2, "
       "matern_5_2");
}

std::string kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::squared_exponential: return "squared_exponential";
    case KernelKind::matern_1_2: return "matern_1_2";
    case KernelKind::matern_3_2: return "matern_3_2";
    case KernelKind::matern_5_2: return "matern_5_2";
  }
  return "matern_3_2";
}

DelayKind parse_delay_kind(const json& j, const std::string& path) {
  const std::string s = get_str(j, path);
  if (s == "uniform") return DelayKind::uniform;
  if (s == "deterministic") return DelayKind::deterministic;
  if (s == "geometric") return DelayKind::geometric;
  fail("'" + path + "' must be one of uniform, deterministic, geometric");
}

std::string delay_kind_name(DelayKind kind) {
  switch (kind) {
    case DelayKind::uniform: return "uniform";
    case DelayKind::deterministic: return "deterministic";
    case DelayKind::geometric: return "geometric";
    case DelayKind::none: break;
  }
  return "uniform";
}

void parse_kernel(const json& j, const std::string& path, KernelSpec& spec) {
  expect_object(j, path);
  check_keys(j, path, {"kind", "length_scale", "variance"});
  if (j.contains("kind")) spec.kind = parse_kernel_kind(j["kind"], path + ".kind");
  if (j.contains("length_scale")) {
    spec.length_scale = get_num(j["length_scale"], path + ".length_scale");
  }
  if (j.contains("variance")) {
    spec.variance = get_num(j["variance"], path + ".variance");
  }
}

json kernel_json(const KernelSpec& spec) {
  return json{{"kind", kernel_kind_name(spec.kind)},
              {"length_scale", spec.length_scale},
              {"variance", spec.variance}};
}

void parse_market(const json& j, MarketParams& mp) {
  expect_object(j, "market");
  check_keys(j, "market",
             {"a0", "a1", "b0", "b1", "sigma1", "sigma2", "demand_link",
              "claims_link", "demand_noise", "p_low", "p_high"});
  if (j.contains("a0")) mp.a0 = get_num(j["a0"], "market.a0");
  if (j.contains("a1")) mp.a1 = get_num(j["a1"], "market.a1");
  if (j.contains("b0")) mp.b0 = get_num(j["b0"], "market.b0");
  if (j.contains("b1")) mp.b1 = get_num(j["b1"], "market.b1");
  if (j.contains("sigma1")) mp.sigma1 = get_num(j["sigma1"], "market.sigma1");
  if (j.contains("sigma2")) mp.sigma2 = get_num(j["sigma2"], "market.sigma2");
  if (j.contains("demand_link")) {
    mp.demand_link = parse_link(j["demand_link"], "market.demand_link");
  }
  if (j.contains("claims_link")) {
    mp.claims_link = parse_link(j["claims_link"], "market.claims_link");
  }
  if (j.contains("demand_noise")) {
    mp.demand_noise = parse_noise(j["demand_noise"], "market.demand_noise");
  }
  if (j.contains("p_low")) mp.p_low = get_num(j["p_low"], "market.p_low");
  if (j.contains("p_high")) mp.p_high = get_num(j["p_high"], "market.p_high");
}

void parse_glm(const json& j, GlmConfig& gc) {
  expect_object(j, "policy.glm");
  check_keys(j, "policy.glm",
             {"l1_coeff", "k_perturb", "initial_prices", "cep_grid"});
  if (j.contains("l1_coeff")) {
    gc.l1_coeff = get_num(j["l1_coeff"], "policy.glm.l1_coeff");
  }
  if (j.contains("k_perturb")) {
    gc.k_perturb = get_num(j["k_perturb"], "policy.glm.k_perturb");
  }
  if (j.contains("initial_prices")) {
    const json& arr = j["initial_prices"];
    if (!arr.is_array() || arr.empty()) {
      fail("'policy.glm.initial_prices' must be a nonempty array of numbers");
    }
    gc.initial_prices.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      gc.initial_prices.push_back(
          get_num(arr[i], "policy.glm.initial_prices[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("cep_grid")) {
    gc.cep_grid = get_int(j["cep_grid"], "policy.glm.cep_grid");
  }
}

void parse_gp(const json& j, GpConfig& gc) {
  expect_object(j, "policy.gp");
  check_keys(j, "policy.gp",
             {"demand_kernel", "claims_kernel", "noise_sd", "delta",
              "grid_size", "prior_mean_demand", "prior_mean_claims"});
  if (j.contains("demand_kernel")) {
    parse_kernel(j["demand_kernel"], "policy.gp.demand_kernel", gc.demand_kernel);
  }
  if (j.contains("claims_kernel")) {
    parse_kernel(j["claims_kernel"], "policy.gp.claims_kernel", gc.claims_kernel);
  }
  if (j.contains("noise_sd")) {
    gc.noise_sd = get_num(j["noise_sd"], "policy.gp.noise_sd");
  }
  if (j.contains("delta")) gc.delta = get_num(j["delta"], "policy.gp.delta");
  if (j.contains("grid_size")) {
    gc.grid_size = get_int(j["grid_size"], "policy.gp.grid_size");
  }
  if (j.contains("prior_mean_demand")) {
    gc.prior_mean_demand =
        get_num(j["prior_mean_demand"], "policy.gp.prior_mean_demand");
  }
  if (j.contains("prior_mean_claims")) {
    gc.prior_mean_claims =
        get_num(j["prior_mean_claims"], "policy.gp.prior_mean_claims");
  }
}

void parse_delay(const json& j, CliConfig& cfg) {
  expect_object(j, "delay");
  check_keys(j, "delay", {"enabled", "m", "distribution", "geom_q"});
  if (j.contains("enabled")) cfg.delayed = get_bool(j["enabled"], "delay.enabled");
  if (j.contains("m")) cfg.run.delay.m = get_int(j["m"], "delay.m");
  if (j.contains("distribution")) {
    cfg.run.delay.kind = parse_delay_kind(j["distribution"], "delay.distribution");
  }
  if (j.contains("geom_q")) {
    cfg.run.delay.geom_q = get_num(j["geom_q"], "delay.geom_q");
  }
}

void parse_seeds(const json& j, std::vector<std::uint64_t>& seeds) {
  if (j.is_string()) {
    seeds = parse_seed_list(j.get<std::string>());
    return;
  }
  if (!j.is_array()) fail("'seeds' must be an array or a list string");
  seeds.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& e = j[i];
    if (!e.is_number_integer() || e.get<long long>() < 0) {
      fail("'seeds[" + std::to_string(i) + "]' must be a nonnegative integer");
    }
    seeds.push_back(e.get<std::uint64_t>());
  }
}

}  // namespace

CliConfig default_config() {
  CliConfig cfg;
  cfg.run.horizon = 100;
  cfg.run.seeds.clear();
  for (std::uint64_t s = 1; s <= 20; ++s) cfg.run.seeds.push_back(s);
  cfg.run.delay.kind = DelayKind::uniform;
  cfg.run.delay.m = 5;
  cfg.run.gp.prior_mean_demand = 5.0;
  cfg.run.gp.prior_mean_claims = 20.0;
  cfg.run.output_dir = "out";
  resolve_truth(cfg);
  return cfg;
}

void resolve_truth(CliConfig& cfg) {
  if (!cfg.truth_auto) return;
  cfg.run.truth =
      cfg.algo == Algo::glm ? TruthMode::parametric : TruthMode::sampled;
}

CliConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(std::string("parse error: ") + e.what());
  }
  expect_object(root, "");
  check_keys(root, "",
             {"market", "policy", "truth", "horizon", "seeds", "delay",
              "output_dir", "jobs"});

  CliConfig cfg = default_config();
  if (root.contains("market")) parse_market(root["market"], cfg.run.market);
  if (root.contains("policy")) {
    const json& pol = expect_object(root["policy"], "policy");
    check_keys(pol, "policy", {"algo", "glm", "gp"});
    if (pol.contains("algo")) {
      const std::string s = get_str(pol["algo"], "policy.algo");
      if (s == "glm") {
        cfg.algo = Algo::glm;
      } else if (s == "gp") {
        cfg.algo = Algo::gp;
      } else if (s == "compare") {
        cfg.algo = Algo::compare;
      } else {
        fail("'policy.algo' must be one of glm, gp, compare");
      }
    }
    if (pol.contains("glm")) parse_glm(pol["glm"], cfg.run.glm);
    if (pol.contains("gp")) parse_gp(pol["gp"], cfg.run.gp);
  }
  if (root.contains("truth")) {
    const std::string s = get_str(root["truth"], "truth");
    if (s == "auto") {
      cfg.truth_auto = true;
    } else if (s == "parametric") {
      cfg.truth_auto = false;
      cfg.run.truth = TruthMode::parametric;
    } else if (s == "sampled") {
      cfg.truth_auto = false;
      cfg.run.truth = TruthMode::sampled;
    } else {
      fail("'truth' must be one of auto, parametric, sampled");
    }
  }
  if (root.contains("horizon")) {
    cfg.run.horizon = get_int(root["horizon"], "horizon");
  }
  if (root.contains("seeds")) parse_seeds(root["seeds"], cfg.run.seeds);
  if (root.contains("delay")) parse_delay(root["delay"], cfg);
  if (root.contains("output_dir")) {
    cfg.run.output_dir = get_str(root["output_dir"], "output_dir");
  }
  if (root.contains("jobs")) cfg.run.jobs = get_int(root["jobs"], "jobs");

  resolve_truth(cfg);
  return cfg;
}

std::string serialize_config(const CliConfig& cfg) {
  json j;
  j["market"] = {{"a0", cfg.run.market.a0},
                 {"a1", cfg.run.market.a1},
                 {"b0", cfg.run.market.b0},
                 {"b1", cfg.run.market.b1},
                 {"sigma1", cfg.run.market.sigma1},
                 {"sigma2", cfg.run.market.sigma2},
                 {"demand_link", link_name(cfg.run.market.demand_link)},
                 {"claims_link", link_name(cfg.run.market.claims_link)},
                 {"demand_noise", noise_name(cfg.run.market.demand_noise)},
                 {"p_low", cfg.run.market.p_low},
                 {"p_high", cfg.run.market.p_high}};
  j["policy"] = {
      {"algo", algo_name(cfg.algo)},
      {"glm",
       {{"l1_coeff", cfg.run.glm.l1_coeff},
        {"k_perturb", cfg.run.glm.k_perturb},
        {"initial_prices", cfg.run.glm.initial_prices},
        {"cep_grid", cfg.run.glm.cep_grid}}},
      {"gp",
       {{"demand_kernel", kernel_json(cfg.run.gp.demand_kernel)},
        {"claims_kernel", kernel_json(cfg.run.gp.claims_kernel)},
        {"noise_sd", cfg.run.gp.noise_sd},
        {"delta", cfg.run.gp.delta},
        {"grid_size", cfg.run.gp.grid_size},
        {"prior_mean_demand", cfg.run.gp.prior_mean_demand},
        {"prior_mean_claims", cfg.run.gp.prior_mean_claims}}}};
  j["truth"] = cfg.truth_auto
                   ? "auto"
                   : (cfg.run.truth == TruthMode::parametric ? "parametric"
                                                             : "sampled");
  j["horizon"] = cfg.run.horizon;
  j["seeds"] = cfg.run.seeds;
  j["delay"] = {{"enabled", cfg.delayed},
                {"m", cfg.run.delay.m},
                {"distribution", delay_kind_name(cfg.run.delay.kind)},
                {"geom_q", cfg.run.delay.geom_q}};
  j["output_dir"] = cfg.run.output_dir;
  j["jobs"] = cfg.run.jobs;
  return j.dump(2) + "\n";
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  auto parse_uint = [&](const std::string& token) -> std::uint64_t {
    if (token.empty()) fail("seed list: empty entry");
    for (char ch : token) {
      if (!std::isdigit(static_cast<unsigned char>(ch))) {
        fail("seed list: '" + token + "' is not a nonnegative integer");
      }
    }
    try {
      return std::stoull(token);
    } catch (const std::exception&) {
      fail("seed list: '" + token + "' is out of range");
    }
  };
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    std::string token = text.substr(pos, comma - pos);
    std::size_t a = token.find_first_not_of(" \t");
    std::size_t b = token.find_last_not_of(" \t");
    token = a == std::string::npos ? "" : token.substr(a, b - a + 1);
    if (token.empty()) {
      if (!(pos == 0 && comma == text.size())) fail("seed list: empty entry");
      break;
    }
    const std::size_t dash = token.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(parse_uint(token));
    } else {
      const std::uint64_t lo = parse_uint(token.substr(0, dash));
      const std::uint64_t hi = parse_uint(token.substr(dash + 1));
      if (hi < lo) fail("seed list: descending range '" + token + "'");
      if (hi - lo >= 1000000) fail("seed list: range '" + token + "' too large");
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    }
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  if (seeds.empty()) fail("seed list: no seeds given");
  return seeds;
}

void apply_env_seed(CliConfig& cfg) {
  const char* env = std::getenv("PREMIUM_BANDIT_SEED");
  if (env == nullptr || *env == '\0') return;
  std::uint64_t base = 0;
  try {
    std::size_t used = 0;
    base = std::stoull(env, &used);
    if (env[used] != '\0') throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    fail("PREMIUM_BANDIT_SEED must be a nonnegative integer");
  }
  const std::size_t n = std::max<std::size_t>(1, cfg.run.seeds.size());
  cfg.run.seeds.clear();
  for (std::size_t i = 0; i < n; ++i) {
    cfg.run.seeds.push_back(base + static_cast<std::uint64_t>(i));
  }
}

void validate_config(const CliConfig& cfg) {
  const RunConfig& run = cfg.run;
  try {
    validate(run.market);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (run.horizon < 1) fail("'horizon' must be at least 1");
  if (run.seeds.empty()) fail("'seeds' must not be empty");
  if (run.jobs < 0) fail("'jobs' must be nonnegative");
  if (run.output_dir.empty()) fail("'output_dir' must not be empty");

  if (!(run.glm.l1_coeff > 0.0)) fail("'policy.glm.l1_coeff' must be positive");
  if (run.glm.cep_grid < 2) fail("'policy.glm.cep_grid' must be at least 2");
  if (run.glm.initial_prices.size() < 3) {
    fail("'policy.glm.initial_prices' needs at least 3 entries");
  }
  bool all_equal = true;
  for (double p : run.glm.initial_prices) {
    if (!(p >= run.market.p_low && p <= run.market.p_high)) {
      fail("'policy.glm.initial_prices' must lie within the price bounds");
    }
    if (p != run.glm.initial_prices.front()) all_equal = false;
  }
  if (all_equal) fail("'policy.glm.initial_prices' must not all be equal");

  if (!(run.gp.delta > 0.0 && run.gp.delta < 1.0)) {
    fail("'policy.gp.delta' must lie in (0, 1)");
  }
  if (!(run.gp.noise_sd > 0.0)) fail("'policy.gp.noise_sd' must be positive");
  if (run.gp.grid_size < 2) fail("'policy.gp.grid_size' must be at least 2");
  for (const auto* k : {&run.gp.demand_kernel, &run.gp.claims_kernel}) {
    if (!(k->length_scale > 0.0)) fail("kernel 'length_scale' must be positive");
    if (!(k->variance > 0.0)) fail("kernel 'variance' must be positive");
  }

  if (run.delay.m < 0) fail("'delay.m' must be nonnegative");
  if (run.delay.kind == DelayKind::geometric &&
      !(run.delay.geom_q > 0.0 && run.delay.geom_q < 1.0)) {
    fail("'delay.geom_q' must lie in (0, 1)");
  }
  if (cfg.delayed && run.delay.kind == DelayKind::none) {
    fail("'delay.enabled' needs a delay distribution");
  }
}

std::string algo_name(Algo algo) {
  switch (algo) {
    case Algo::glm: return "glm";
    case Algo::gp: return "gp";
    case Algo::compare: return "compare";
  }
  return "compare";
}

}  // namespace pbandit
