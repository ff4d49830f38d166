// remsim: batch runner for the REM Metropolis dynamics toolkit.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rem/analysis.hpp"
#include "rem/chain.hpp"
#include "rem/environment.hpp"
#include "rem/error.hpp"
#include "rem/parallel.hpp"
#include "rem/potential.hpp"
#include "rem/spectral.hpp"
#include "rem/stats.hpp"

#ifndef REMSIM_VERSION
#define REMSIM_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace rem;

namespace {

constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Flat key = value configuration with [section] headers. Keys before any
// header, or under [common], apply to every command.

using Section = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::map<std::string, Section> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::map<std::string, Section> out;
  std::string line, section = "common";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    out[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

// Resolved settings for one command: defaults, then config, then flags.
class Settings {
 public:
  Settings(std::string command, Section defaults) : command_(std::move(command)), values_(std::move(defaults)) {}

  void merge(const Section& s, const std::string& origin) {
    for (const auto& [k, v] : s) {
      if (!values_.count(k)) throw ConfigError(origin + ": unknown key '" + k + "' for command " + command_);
      values_[k] = v;
    }
  }
  void set(const std::string& k, const std::string& v) { values_.at(k) = v; }

  const std::string& str(const std::string& k) const { return values_.at(k); }
  bool has(const std::string& k) const { return !values_.at(k).empty(); }

  double real(const std::string& k) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(str(k), &pos);
      if (pos != str(k).size()) throw std::invalid_argument(k);
      return v;
    } catch (const std::logic_error&) {
      throw ConfigError("key '" + k + "' expects a number, got '" + str(k) + "'");
    }
  }
  std::uint64_t count(const std::string& k) const {
    const double v = real(k);
    if (v < 0.0 || v != std::floor(v)) throw ConfigError("key '" + k + "' expects a nonnegative integer");
    return static_cast<std::uint64_t>(v);
  }
  bool flag(const std::string& k) const {
    const std::string& v = str(k);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("key '" + k + "' expects true or false, got '" + v + "'");
  }
  std::vector<double> list(const std::string& k) const {
    std::vector<double> out;
    std::stringstream ss(str(k));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        out.push_back(std::stod(item));
      } catch (const std::logic_error&) {
        throw ConfigError("key '" + k + "' expects a comma-separated list of numbers");
      }
    }
    return out;
  }

  json to_json() const {
    json j = json::object();
    for (const auto& [k, v] : values_) j[k] = v;
    return j;
  }

 private:
  std::string command_;
  Section values_;
};

Section common_defaults() {
  return {{"n", "12"},           {"beta", "1.4"},        {"alpha", "0.7"},         {"gamma_prime", ""},
          {"seed", "1"},         {"threads", "0"},       {"out", "out"},           {"max_n", "26"},
          {"kappa", "0.25"},     {"C0", "6.56"},         {"delta", "0.1"},         {"delta_shallow", "0.05"},
          {"K_ball", "9"},       {"jump_budget", "100000000"}};
}

Section command_defaults(const std::string& cmd) {
  Section s = common_defaults();
  auto add = [&](Section extra) { s.insert(extra.begin(), extra.end()); };
  if (cmd == "env") add({{"count", "1"}, {"two_step", "false"}, {"format", "both"}});
  if (cmd == "spectral")
    add({{"count", "1"}, {"gap_iterations", "30"}, {"power_estimate", "auto"}, {"pair_budget", "200000000"},
         {"kernel_budget_n", "8"}});
  if (cmd == "potential") add({{"count", "1"}, {"sinks", "20"}, {"random_functions", "100"}, {"targets", "deep"}});
  if (cmd == "mixing") add({{"samples", "100000"}, {"base", ""}, {"start", ""}, {"max_multiple", "64"}});
  if (cmd == "aging")
    add({{"n_list", ""},         {"t_grid", "0.25,0.5,1"}, {"lambda_grid", "0,0.5,1,2"}, {"n_traj", "1000"},
         {"n_env", "1"},         {"samples_per_trap", "32"}, {"max_traps", "16"},         {"block", ""},
         {"horizon_multiple", "1"}, {"gap_iterations", "30"}, {"clock_points", "200"},
         {"trajectory_jumps", "0"}});
  if (cmd == "k-constant") add({{"alphas", "0.3,0.5,0.7,0.9"}, {"betas", "0.8,1.4"}});
  return s;
}

RemParams params_from(const Settings& s, int n, std::uint64_t env_seed) {
  RemParams p;
  p.n = n;
  p.beta = s.real("beta");
  p.alpha = s.real("alpha");
  if (s.has("gamma_prime")) p.gamma_prime = s.real("gamma_prime");
  p.env_seed = env_seed;
  p.max_n = static_cast<int>(s.count("max_n"));
  p.constants.kappa = s.real("kappa");
  p.constants.C0 = s.real("C0");
  p.constants.delta = s.real("delta");
  p.constants.delta_shallow = s.real("delta_shallow");
  p.constants.K_ball = static_cast<int>(s.count("K_ball"));
  validate_params(p);
  return p;
}

int dimension(const Settings& s) { return static_cast<int>(s.count("n")); }
unsigned threads(const Settings& s) { return static_cast<unsigned>(s.count("threads")); }

fs::path out_dir(const Settings& s) {
  fs::path d(s.str("out"));
  fs::create_directories(d);
  return d;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void write_manifest(const fs::path& dir, const std::string& cmd, const Settings& s,
                    const std::vector<std::string>& outputs) {
  json m;
  m["schema"] = kSchemaVersion;
  m["command"] = cmd;
  m["code_version"] = REMSIM_VERSION;
  m["config"] = s.to_json();
  m["outputs"] = outputs;
  write_json(dir / ("manifest_" + cmd + ".json"), m);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string hex(Vertex v) {
  std::ostringstream os;
  os << "0x" << std::hex << v.code;
  return os.str();
}

// ---------------------------------------------------------------------------

int cmd_env(const Settings& s) {
  const fs::path dir = out_dir(s);
  const std::uint64_t count = s.count("count");
  const std::string format = s.str("format");
  if (format != "binary" && format != "csv" && format != "both")
    throw ConfigError("format must be binary, csv or both");
  std::vector<std::string> outputs;
  json summary = json::array();
  for (std::uint64_t k = 0; k < count; ++k) {
    const RemParams p = params_from(s, dimension(s), s.count("seed") + k);
    const Environment env = s.flag("two_step") ? sample_two_step(p).env : sample_environment(p);
    const std::string stem = "env_n" + std::to_string(p.n) + "_s" + std::to_string(p.env_seed);
    if (format != "csv") {
      std::ofstream f(dir / (stem + ".remenv"), std::ios::binary);
      write_environment(f, env);
      outputs.push_back(stem + ".remenv");
    }
    if (format != "binary") {
      std::ofstream f(dir / (stem + ".csv"));
      write_environment_csv(f, env);
      outputs.push_back(stem + ".csv");
    }
    const SeparationReport sep = check_separation(env);
    json e;
    e["n"] = p.n;
    e["env_seed"] = p.env_seed;
    e["gamma"] = env.scales.gamma;
    e["gamma_prime"] = env.scales.gamma_prime;
    e["Z"] = env.Z;
    e["Z_over_2N"] = env.kappa_ratio();
    e["deep_count"] = env.deep.size();
    e["deep_ratio"] = env.deep_density_ratio();
    e["min_deep_distance"] = sep.deep_count > 1 ? json(sep.min_distance) : json(nullptr);
    e["separated"] = sep.separated;
    summary.push_back(e);
    std::printf("n=%d seed=%llu |D|=%zu |D|2^((gamma'-1)N)=%.4f min_distance=%s Z/2^N=%.4f\n", p.n,
                static_cast<unsigned long long>(p.env_seed), env.deep.size(), env.deep_density_ratio(),
                sep.deep_count > 1 ? std::to_string(sep.min_distance).c_str() : "inf", env.kappa_ratio());
  }
  write_json(dir / "env_summary.json", {{"schema", kSchemaVersion}, {"environments", summary}});
  outputs.push_back("env_summary.json");
  write_manifest(dir, "env", s, outputs);
  return 0;
}

int cmd_spectral(const Settings& s) {
  const fs::path dir = out_dir(s);
  const int n = dimension(s);
  const std::string power = s.str("power_estimate");
  if (power != "auto" && power != "always" && power != "never")
    throw ConfigError("power_estimate must be auto, always or never");
  const int kernel_budget = static_cast<int>(s.count("kernel_budget_n"));
  bool violation = false;
  json reports = json::array();
  for (std::uint64_t k = 0; k < s.count("count"); ++k) {
    const RemParams p = params_from(s, n, s.count("seed") + k);
    const Environment env = sample_environment(p);
    SpectralReport r;
    r.n = n;
    r.beta = p.beta;
    r.alpha = p.alpha;
    r.env_seed = p.env_seed;
    r.log_m_N = env.scales.log_m;
    r.m_N = env.scales.m();
    if (n <= kDenseBudgetN) r.lambda_exact = exact_gap(env);
    if (power == "always" || (power == "auto" && !r.lambda_exact))
      r.lambda_power_estimate =
          estimate_gap(env, static_cast<int>(s.count("gap_iterations")), derive_seed(p.env_seed, {7})).lambda;
    const PathSet paths =
        edge_congestion(env.nu, path_good_flags(env), n, s.count("pair_budget"), threads(s));
    const PoincareResult pb = poincare_bound(env, paths);
    r.poincare_lower = pb.bound;
    const std::optional<double> gap = r.lambda_exact ? r.lambda_exact : r.lambda_power_estimate;
    // The estimate lies above the gap, so exceeding it is already a violation.
    if (gap) r.bound_below_gap = r.poincare_lower <= *gap;
    json j;
    j["schema"] = kSchemaVersion;
    j["n"] = r.n;
    j["beta"] = r.beta;
    j["alpha"] = r.alpha;
    j["env_seed"] = r.env_seed;
    j["lambda_exact"] = optional_number(r.lambda_exact);
    j["lambda_power_estimate"] = optional_number(r.lambda_power_estimate);
    j["poincare_lower"] = r.poincare_lower;
    j["m_N"] = r.m_N;
    j["log_m_N"] = r.log_m_N;
    if (n <= kernel_budget) {
      const MixingBlock mb = find_mixing_block(env, r.m_N, 64, kernel_budget);
      r.m_star = mb.block;
      j["m_star"] = *r.m_star;
      // Decay check at k m*, k = 1..5.
      json defects = json::array();
      for (int kk = 1; kk <= 5; ++kk) {
        const double d = mix_defect(transition_kernel(env, kk * mb.block, kernel_budget), env.nu);
        defects.push_back({{"k", kk}, {"defect", d}, {"bound", std::exp(-(kk - 1.0))}});
        if (d > std::exp(-(kk - 1.0))) violation = true;
      }
      j["mix_defect"] = defects;
    } else {
      j["m_star"] = nullptr;
    }
    j["bound_below_gap"] = r.bound_below_gap;
    j["gap_source"] = r.lambda_exact ? "exact" : (r.lambda_power_estimate ? "estimate" : "none");
    j["bottleneck_edge"] = {{"u", hex(pb.edge_u)}, {"bit", pb.edge_bit}};
    if (gap) j["mixing_block_spectral"] = spectral_mixing_block(env, *gap);
    if (!r.bound_below_gap) violation = true;
    reports.push_back(j);
    std::printf("n=%d seed=%llu gap=%s estimate=%s poincare=%.6g bound<=gap=%s\n", n,
                static_cast<unsigned long long>(p.env_seed),
                r.lambda_exact ? std::to_string(*r.lambda_exact).c_str() : "unavailable",
                r.lambda_power_estimate ? std::to_string(*r.lambda_power_estimate).c_str() : "-",
                r.poincare_lower, r.bound_below_gap ? "true" : "false");
  }
  write_json(dir / "spectral_report.json", reports);
  write_manifest(dir, "spectral", s, {"spectral_report.json"});
  return violation ? static_cast<int>(ErrorKind::Violation) : 0;
}

int cmd_potential(const Settings& s) {
  const fs::path dir = out_dir(s);
  const int n = dimension(s);
  const std::string targets = s.str("targets");
  if (targets != "deep" && targets != "all") throw ConfigError("targets must be deep or all");
  bool violation = false;
  json reports = json::array();
  for (std::uint64_t k = 0; k < s.count("count"); ++k) {
    const RemParams p = params_from(s, n, s.count("seed") + k);
    const Environment env = sample_environment(p);
    std::vector<Vertex> xs;
    if (targets == "deep")
      xs = env.deep;
    else
      for (std::uint32_t x = 0; x < env.size(); ++x) xs.emplace_back(x);
    std::optional<double> gap;
    if (n <= kDenseBudgetN) gap = exact_gap(env);
    std::vector<json> per_x(xs.size());
    std::vector<int> bad(xs.size(), 0);
    parallel_for(xs.size(), threads(s), [&](std::size_t i) {
      const Vertex x = xs[i];
      const HittingSolution hs = mean_hitting_exact(env, x);
      const ExtremalReport ex = extremal_check(env, hs, static_cast<int>(s.count("random_functions")),
                                               derive_seed(p.env_seed, {1, x.code}));
      Rng rng(derive_seed(p.env_seed, {2, x.code}));
      json rows = json::array();
      for (std::uint64_t b = 0; b < s.count("sinks"); ++b) {
        std::vector<std::uint8_t> sink(env.size(), 0);
        const std::size_t size = 1 + rng.below(std::max<std::size_t>(env.size() / 2, 1));
        for (std::size_t j = 0; j < size; ++j) sink[rng.below(env.size())] = 1;
        sink[x.code] = 0;
        if (std::none_of(sink.begin(), sink.end(), [](std::uint8_t v) { return v != 0; })) sink[x.code ^ 1u] = 1;
        const AppendixBound ab = bound_check_appendix(env, hs, sink, gap);
        json r;
        r["x"] = hex(x);
        r["env_seed"] = p.env_seed;
        r["B_size"] = ab.sink_size;
        r["conductance"] = ab.conductance;
        r["conductance_bound_routes"] = {{"dirichlet", ab.routes.dirichlet},
                                         {"escape", ab.routes.escape},
                                         {"relative_gap", ab.routes.relative_gap}};
        r["e_nu_hx"] = hs.e_nu;
        r["extremal_residual"] = ex.residual;
        r["prop_a1_slack"] = ab.slack;
        r["spectral_slack"] = optional_number(ab.spectral_slack);
        r["random_violations"] = ex.violations;
        rows.push_back(r);
        if (ab.slack < 0.0 || ab.routes.relative_gap >= 1e-10 || (ab.spectral_slack && *ab.spectral_slack < 0.0))
          bad[i] = 1;
      }
      if (ex.residual >= 1e-8 || ex.violations > 0) bad[i] = 1;
      per_x[i] = rows;
    });
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (auto& r : per_x[i]) reports.push_back(r);
      if (bad[i]) violation = true;
    }
    std::printf("n=%d seed=%llu targets=%zu instances=%zu\n", n, static_cast<unsigned long long>(p.env_seed),
                xs.size(), xs.size() * s.count("sinks"));
  }
  write_json(dir / "potential_report.json", reports);
  write_manifest(dir, "potential", s, {"potential_report.json"});
  if (violation) std::fprintf(stderr, "identity violation recorded in potential_report.json\n");
  return violation ? static_cast<int>(ErrorKind::Violation) : 0;
}

int cmd_mixing(const Settings& s) {
  const fs::path dir = out_dir(s);
  const int n = dimension(s);
  const RemParams p = params_from(s, n, s.count("seed"));
  const Environment env = sample_environment(p);
  const double gap = exact_gap(env, kKernelBudgetN);
  const double base = s.has("base") ? s.real("base") : 1.0 / (8.0 * gap);
  const MixingBlock mb = find_mixing_block(env, base, static_cast<int>(s.count("max_multiple")));
  const StrongStationarySampler sst(mb.kernel, env.nu, mb.block);
  Vertex start(0);
  if (s.has("start")) start = Vertex(static_cast<std::uint32_t>(std::stoul(s.str("start"), nullptr, 0)));
  if (start.code >= env.size()) throw ConfigError("start vertex outside the cube");
  Rng rng(derive_seed(p.env_seed, {3}));
  const std::uint64_t samples = s.count("samples");
  std::vector<double> counts(env.size(), 0.0);
  std::map<int, std::uint64_t> blocks;
  std::ofstream csv(dir / "mixing_samples.csv");
  csv << "t_mix,blocks,vertex_hex\n";
  for (std::uint64_t i = 0; i < samples; ++i) {
    const MixSample m = sst.sample(start, rng);
    counts[m.end_state.code] += 1.0;
    ++blocks[m.blocks];
    csv << std::setprecision(17) << m.t_mix << ',' << m.blocks << ',' << hex(m.end_state) << '\n';
  }
  const std::vector<double> nu(env.nu.data(), env.nu.data() + env.nu.size());
  json j;
  j["schema"] = kSchemaVersion;
  j["n"] = n;
  j["env_seed"] = p.env_seed;
  j["lambda_exact"] = gap;
  j["base"] = base;
  j["multiple"] = mb.multiple;
  j["m_star"] = mb.block;
  j["minorization_ratio"] = sst.minorization();
  j["samples"] = samples;
  j["tv_end_state"] = stats::total_variation(counts, nu);
  json surv = json::array();
  bool violation = false;
  for (int k = 1; k <= 5; ++k) {
    std::uint64_t at_least = 0;
    for (const auto& [b, c] : blocks)
      if (b >= k) at_least += c;
    const double d = mix_defect(transition_kernel(env, k * mb.block), env.nu);
    if (d > std::exp(-(k - 1.0))) violation = true;
    surv.push_back({{"k", k},
                    {"survival", static_cast<double>(at_least) / static_cast<double>(samples)},
                    {"theory", std::exp(-(k - 1.0))},
                    {"defect", d}});
  }
  j["survival"] = surv;
  write_json(dir / "mixing_report.json", j);
  write_manifest(dir, "mixing", s, {"mixing_report.json", "mixing_samples.csv"});
  std::printf("n=%d seed=%llu m*=%.6g (%d x %.6g) TV=%.5f\n", n, static_cast<unsigned long long>(p.env_seed),
              mb.block, mb.multiple, base, j["tv_end_state"].get<double>());
  return violation ? static_cast<int>(ErrorKind::Violation) : 0;
}

// Clock process and trajectory of one nu-started Y run, streamed.
void dump_clock(const Environment& env, double R_N, double t_max, std::size_t points, std::uint64_t traj_jumps,
                std::uint64_t seed, std::uint64_t budget, const fs::path& clock_path, const fs::path& traj_path) {
  const ChainSimulator sim(env, RateModel::FastY);
  Rng rng(seed);
  const double inv_g = 1.0 / env.scales.g();
  std::ofstream clk(clock_path);
  clk << "t,S,S_D,S_rescaled,SD_rescaled\n" << std::setprecision(17);
  std::ofstream tr;
  if (traj_jumps > 0) {
    tr.open(traj_path);
    tr << "time,vertex_hex\n" << std::setprecision(17);
  }
  double S = 0.0, SD = 0.0;
  std::size_t next = 0;
  std::uint64_t written = 0;
  auto emit = [&](std::size_t j) {
    const double t = t_max * static_cast<double>(j) / static_cast<double>(points - 1);
    clk << t << ',' << S << ',' << SD << ',' << S * inv_g << ',' << SD * inv_g << '\n';
  };
  emit(next++);
  auto visit = [&](Vertex y, double t0, double t1) {
    if (written < traj_jumps) {
      tr << t0 << ',' << hex(y) << '\n';
      ++written;
    }
    const double slope = clock_slope(env, y);
    const bool deep = env.is_deep[y.code];
    while (next < points) {
      const double cut = t_max * R_N * static_cast<double>(next) / static_cast<double>(points - 1);
      if (t1 < cut) break;
      S += slope * (cut - t0);
      if (deep) SD += slope * (cut - t0);
      t0 = cut;
      emit(next++);
    }
    S += slope * (t1 - t0);
    if (deep) SD += slope * (t1 - t0);
  };
  const Vertex start = sim.sample_stationary(rng);
  const double reached = sim.run(start, t_max * R_N, rng, visit, budget);
  if (reached < t_max * R_N) throw BudgetError("clock dump: jump budget exhausted before the horizon");
}

int cmd_aging(const Settings& s) {
  const fs::path dir = out_dir(s);
  AgingConfig cfg;
  cfg.t_grid = s.list("t_grid");
  cfg.lambda_grid = s.list("lambda_grid");
  cfg.n_traj = s.count("n_traj");
  cfg.n_env = s.count("n_env");
  cfg.horizon_multiple = s.real("horizon_multiple");
  cfg.jump_budget = s.count("jump_budget");
  validate_aging_config(cfg);
  std::vector<int> ns;
  if (s.has("n_list"))
    for (double v : s.list("n_list")) ns.push_back(static_cast<int>(v));
  else
    ns.push_back(dimension(s));
  // Validate every dimension before any sampling.
  for (int n : ns) params_from(s, n, s.count("seed"));

  std::vector<double> grid = cfg.t_grid;
  if (cfg.horizon_multiple > 1.0) grid.push_back(cfg.t_grid.back() * cfg.horizon_multiple);

  std::vector<std::string> outputs{"aging.csv", "local_time.csv", "shallow.csv", "rn.json"};
  std::ofstream aging(dir / "aging.csv"), lcsv(dir / "local_time.csv"), scsv(dir / "shallow.csv");
  aging << "n,env_seed,t,lambda,empirical,se,theory,K,R_N,g_N\n" << std::setprecision(17);
  lcsv << "n,env_seed,t,R_N,mean,variance\n" << std::setprecision(17);
  scsv << "n,env_seed,t,median,mean,min,very_shallow_mean,very_shallow_bound\n" << std::setprecision(17);
  json rn_all = json::array();
  for (int n : ns)
    for (std::uint64_t e = 0; e < cfg.n_env; ++e) {
      const RemParams p = params_from(s, n, s.count("seed") + e);
      const Environment env = sample_environment(p);
      RnConfig rc;
      rc.samples_per_trap = s.count("samples_per_trap");
      rc.max_traps = s.count("max_traps");
      if (s.has("block")) rc.block = s.real("block");
      rc.gap_iterations = static_cast<int>(s.count("gap_iterations"));
      rc.seed = derive_seed(p.env_seed, {10});
      rc.threads = threads(s);
      rc.jump_budget = cfg.jump_budget;
      const RnEstimate rn = estimate_RN(env, rc);
      json rj;
      rj["n"] = n;
      rj["env_seed"] = p.env_seed;
      rj["R_N"] = rn.R_N;
      rj["log_R_N_over_N"] = rn.log_R_N / n;
      rj["limit_alpha2_beta2_over_2"] = p.alpha * p.alpha * p.beta * p.beta / 2.0;
      rj["R_N_doubled_horizon"] = rn.R_N_doubled;
      rj["relative_se"] = rn.relative_se;
      rj["surrogate"] = rn.surrogate;
      rj["block"] = rn.block;
      rj["lambda"] = optional_number(rn.lambda);
      rj["deep_count"] = rn.deep_count;
      rj["traps_used"] = rn.traps_used;
      rn_all.push_back(rj);

      const std::vector<AgingSample> runs = run_aging(env, rn.R_N, grid, cfg.n_traj, derive_seed(p.env_seed, {11}),
                                                      threads(s), cfg.jump_budget);
      const LaplaceReport lr = empirical_laplace(runs, grid, cfg.lambda_grid, p.alpha, rn.R_N, env.scales.g());
      for (const LaplaceCell& c : lr.cells)
        aging << n << ',' << p.env_seed << ',' << c.t << ',' << c.lambda << ',' << c.empirical << ',' << c.se << ','
              << c.theory << ',' << lr.K << ',' << lr.R_N << ',' << lr.g_N << '\n';
      const LNReport ln = local_time_functional(runs, grid, rn.R_N);
      for (std::size_t j = 0; j < grid.size(); ++j)
        lcsv << n << ',' << p.env_seed << ',' << grid[j] << ',' << rn.R_N << ',' << ln.mean[j] << ','
             << ln.variance[j] << '\n';
      const ShallowReport sh = shallow_contribution(env, runs, grid, rn.R_N);
      for (std::size_t j = 0; j < grid.size(); ++j)
        scsv << n << ',' << p.env_seed << ',' << grid[j] << ',' << sh.median[j] << ',' << sh.mean[j] << ','
             << sh.min[j] << ',' << sh.very_shallow_mean[j] << ',' << sh.very_shallow_bound[j] << '\n';

      const std::string stem = "n" + std::to_string(n) + "_s" + std::to_string(p.env_seed);
      const std::size_t points = s.count("clock_points");
      if (points >= 2) {
        const std::uint64_t tj = s.count("trajectory_jumps");
        dump_clock(env, rn.R_N, grid.back(), points, tj, derive_seed(p.env_seed, {12}), cfg.jump_budget,
                   dir / ("clock_" + stem + ".csv"), dir / ("trajectory_" + stem + ".csv"));
        outputs.push_back("clock_" + stem + ".csv");
        if (tj > 0) outputs.push_back("trajectory_" + stem + ".csv");
      }
      const LaplaceCell* c = lr.find(grid.back(), 1.0);
      std::printf("n=%d seed=%llu R_N=%.4g log(R_N)/N=%.4f traj=%zu%s\n", n,
                  static_cast<unsigned long long>(p.env_seed), rn.R_N, rn.log_R_N / n, runs.size(),
                  c ? (" laplace(t_max,1)=" + std::to_string(c->empirical) + " theory=" + std::to_string(c->theory))
                          .c_str()
                    : "");
    }
  write_json(dir / "rn.json", rn_all);
  write_manifest(dir, "aging", s, outputs);
  return 0;
}

int cmd_k_constant(const Settings& s) {
  const fs::path dir = out_dir(s);
  json out = json::array();
  bool violation = false;
  for (double a : s.list("alphas"))
    for (double b : s.list("betas")) {
      const KConstantReport r = constant_K(a, b);
      const double diff = std::abs(r.K_quadrature - r.K_closed_form);
      if (!(diff < 1e-8)) violation = true;
      out.push_back({{"alpha", a},
                     {"beta", b},
                     {"C", r.integral_C},
                     {"K_quadrature", r.K_quadrature},
                     {"K_closed_form", r.K_closed_form},
                     {"abs_difference", diff},
                     {"error_estimate", r.error_estimate}});
      std::printf("alpha=%.3f beta=%.3f K=%.15f Gamma(1-alpha)=%.15f\n", a, b, r.K_quadrature, r.K_closed_form);
    }
  write_json(dir / "k_constant.json", out);
  write_manifest(dir, "k-constant", s, {"k_constant.json"});
  return violation ? static_cast<int>(ErrorKind::Violation) : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metropolis dynamics on the Random Energy Model: simulation and verification"};
  app.set_version_flag("--version", std::string(REMSIM_VERSION));
  app.require_subcommand(1, 1);

  struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<int> n;
    std::optional<double> beta, alpha;
  } flags;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"env", "sample environments and print deep-trap statistics"},
      {"spectral", "spectral gap, Poincare bound and mixing blocks"},
      {"potential", "hitting times, effective conductances and their identities"},
      {"mixing", "strong stationary times from the block kernel"},
      {"aging", "R_N, clock-process Laplace transforms, L_N and the shallow remainder"},
      {"k-constant", "the stable constant K by quadrature"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "flat key = value config file");
    sub->add_option("--seed", flags.seed, "experiment / environment seed");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--threads", flags.threads, "worker threads (0 = all cores)");
    sub->add_option("--n", flags.n, "hypercube dimension N");
    sub->add_option("--beta", flags.beta, "inverse temperature");
    sub->add_option("--alpha", flags.alpha, "aging exponent");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::InvalidConfig);
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    Settings s(cmd, command_defaults(cmd));
    if (!flags.config.empty()) {
      const auto cfg = read_config(flags.config);
      std::set<std::string> known{"common"};
      for (const auto& [name, help] : commands) known.insert(name);
      for (const auto& [section, values] : cfg)
      {
        if (!known.count(section)) throw ConfigError("unknown config section [" + section + "]");
        // Every section is checked, not only the one in use.
        Settings probe(section == "common" ? cmd : section,
                       section == "common" ? common_defaults() : command_defaults(section));
        probe.merge(values, flags.config + " [" + section + "]");
      }
      if (cfg.count("common")) s.merge(cfg.at("common"), flags.config + " [common]");
      if (cfg.count(cmd)) s.merge(cfg.at(cmd), flags.config + " [" + cmd + "]");
    }
    if (flags.seed) s.set("seed", std::to_string(*flags.seed));
    if (flags.out) s.set("out", *flags.out);
    if (flags.threads) s.set("threads", std::to_string(*flags.threads));
    if (flags.n) s.set("n", std::to_string(*flags.n));
    if (flags.beta) {
      std::ostringstream os;
      os << std::setprecision(17) << *flags.beta;
      s.set("beta", os.str());
    }
    if (flags.alpha) {
      std::ostringstream os;
      os << std::setprecision(17) << *flags.alpha;
      s.set("alpha", os.str());
    }
    // Parameters are validated before anything touches memory.
    params_from(s, dimension(s), s.count("seed"));

    if (cmd == "env") return cmd_env(s);
    if (cmd == "spectral") return cmd_spectral(s);
    if (cmd == "potential") return cmd_potential(s);
    if (cmd == "mixing") return cmd_mixing(s);
    if (cmd == "aging") return cmd_aging(s);
    return cmd_k_constant(s);
  } catch (const Error& e) {
    std::fprintf(stderr, "remsim %s: %s\n", cmd.c_str(), e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "remsim %s: %s\n", cmd.c_str(), e.what());
    return 1;
  }
}
