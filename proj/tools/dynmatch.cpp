#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dynmatch/config.hpp"
#include "dynmatch/format.hpp"
#include "dynmatch/io.hpp"
#include "dynmatch/replay.hpp"
#include "dynmatch/report.hpp"
#include "dynmatch/simulation.hpp"
#include "dynmatch/suites.hpp"

namespace fs = std::filesystem;
using namespace dynmatch;

namespace {

MechanismKind mechanism_arg(const std::string& s) {
  auto k = parse_mechanism(s);
  if (!k) throw std::invalid_argument("unknown mechanism '" + s + "'");
  return *k;
}

// A bare name like E1 resolves to <data>/fixtures/E1.json.
Fixture fixture_arg(const std::string& s, const fs::path& data) {
  fs::path p(s);
  if (!fs::exists(p)) p = data / "fixtures" / (s + ".json");
  auto f = load_fixture(p);
  if (f.name.empty()) f.name = p.stem().string();
  return f;
}

int simulate(const std::optional<std::string>& config, const std::string& out, const std::vector<std::uint64_t>& seeds,
             std::optional<std::uint64_t> seed, std::optional<std::size_t> replications, std::optional<unsigned> jobs) {
  ExperimentConfig cfg = config ? experiment_config_from_json(read_json_file(*config)) : ExperimentConfig{};
  if (!seeds.empty()) cfg.seeds = seeds;
  if (replications) {
    if (*replications == 0) throw std::invalid_argument("--replications must be positive");
    const auto base = seed.value_or(cfg.seeds.empty() ? 1 : cfg.seeds.front());
    cfg.seeds.clear();
    for (std::size_t i = 0; i < *replications; ++i) cfg.seeds.push_back(base + i);
  } else if (seed && seeds.empty()) {
    cfg.seeds = {*seed};
  }
  if (jobs) cfg.jobs = *jobs;

  auto result = run_experiment(cfg);
  for (const auto& p : write_experiment(result, out)) std::cout << "wrote " << p.string() << '\n';

  std::cout << "average placements per month, months 1-" << cfg.report_months << '\n';
  for (const auto& cell : result.cells) {
    std::cout << "  " << cell.noise.label();
    for (std::size_t m = 0; m < cell.mechanisms.size(); ++m)
      std::cout << "  " << to_string(cell.mechanisms[m]) << ' '
                << format_fixed(window_mean(cell.mean[m].placements, cfg.report_months), 2);
    std::cout << '\n';
  }
  return 0;
}

int verify(const std::string& suite, std::uint64_t seed, std::size_t environments, std::size_t sp_instances,
           const fs::path& data, const std::optional<std::string>& out) {
  std::vector<SuiteCheck> checks;
  if (suite == "theorems") {
    checks = theorem_suite(data);
  } else if (suite == "sweep") {
    SweepConfig cfg;
    cfg.seed = seed;
    cfg.environments = environments;
    checks = sweep_suite(cfg, sp_instances);
  } else {
    throw std::invalid_argument("--suite must be theorems or sweep");
  }
  const auto text = format_checks(checks);
  std::cout << text;
  if (out) write_text_file(*out, text);
  const bool ok = all_passed(checks);
  std::cout << (ok ? "all checks passed\n" : "some checks FAILED\n");
  return ok ? 0 : 1;
}

int replay_cmd(const std::string& fixture, const std::string& mechanism, const fs::path& data, bool check,
               const std::optional<std::string>& out) {
  auto f = fixture_arg(fixture, data);
  const auto kind = mechanism_arg(mechanism);
  const auto text = transcript(f, replay(f, kind));
  std::cout << text;
  if (out) write_text_file(*out, text);
  if (!check) return 0;
  const auto stored = transcript_path(data, f.name, kind);
  if (!fs::exists(stored)) {
    std::cerr << "no stored transcript at " << stored.string() << '\n';
    return 1;
  }
  const bool same = read_text_file(stored) == text;
  std::cerr << (same ? "matches " : "DIFFERS from ") << stored.string() << '\n';
  return same ? 0 : 1;
}

int rmse_check(std::size_t pairs, std::uint64_t seed, double v_bar) {
  const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(pairs))));
  bool ok = true;
  std::cout << "noise,pairs,rmse,target_rmse,rmse_rel_error,mean_error,target_mean,status\n";
  for (auto kind : {NoiseSpec::Kind::Bias, NoiseSpec::Kind::Variance})
    for (double k : {0.10, 0.25, 0.50}) {
      auto c = calibrate_noise({kind, k}, v_bar, side, side, seed);
      bool pass = c.rmse_rel_error() <= 0.05;
      if (kind == NoiseSpec::Kind::Bias) pass = pass && c.mean_rel_error() <= 0.02;
      ok = ok && pass;
      std::cout << c.noise.label() << ',' << c.pairs << ',' << format_fixed(c.rmse, 4) << ','
                << format_fixed(c.target_rmse, 4) << ',' << format_fixed(c.rmse_rel_error(), 4) << ','
                << format_fixed(c.mean_error, 4) << ',' << format_fixed(c.target_mean, 4) << ','
                << (pass ? "pass" : "FAIL") << '\n';
    }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic matching of children and foster homes: mechanisms, checks and simulations"};
  app.require_subcommand(1);
  std::string data = DYNMATCH_DATA_DIR;
  app.add_option("--data", data, "Directory holding fixtures/ and transcripts/")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Run the synthetic market experiment and write CSVs");
  std::optional<std::string> config;
  std::string out_dir = "results";
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  std::optional<unsigned> jobs;
  sim->add_option("--config", config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "Output directory")->capture_default_str();
  sim->add_option("--seeds", seeds, "Replication seeds, overriding the config")->delimiter(',');
  sim->add_option("--seed", seed, "First seed when used with --replications, else the only seed");
  sim->add_option("--replications", replications, "Number of consecutive seeds");
  sim->add_option("--jobs", jobs, "Worker threads");

  auto* ver = app.add_subcommand("verify", "Run a verification suite");
  std::string suite = "theorems";
  std::uint64_t verify_seed = 1;
  std::size_t environments = 200, sp_instances = 200;
  std::optional<std::string> verify_out;
  ver->add_option("--suite", suite, "theorems or sweep")->capture_default_str();
  ver->add_option("--seed", verify_seed, "Sweep seed")->capture_default_str();
  ver->add_option("--environments", environments, "Random markets in the sweep")->capture_default_str();
  ver->add_option("--sp-instances", sp_instances, "Markets in the strategy-proofness sweep")->capture_default_str();
  ver->add_option("--out", verify_out, "Also write the report to this file");

  auto* rep = app.add_subcommand("replay", "Replay a scripted fixture and print its transcript");
  std::string fixture, mechanism;
  bool check = false;
  std::optional<std::string> replay_out;
  rep->add_option("--fixture", fixture, "E1, E2, E3 or a fixture file")->required();
  rep->add_option("--mechanism", mechanism, "seqda-home, seqda-child, hpda, crda, heda, heda-star")->required();
  rep->add_flag("--check", check, "Compare against the stored transcript");
  rep->add_option("--out", replay_out, "Also write the transcript to this file");

  auto* rmse = app.add_subcommand("rmse-check", "Calibrate the noise models against their nominal RMSE");
  std::size_t pairs = 10000;
  std::uint64_t rmse_seed = 1;
  double v_bar = 100.0;
  rmse->add_option("--pairs", pairs, "Number of (home, child) pairs")->capture_default_str();
  rmse->add_option("--seed", rmse_seed, "Noise seed")->capture_default_str();
  rmse->add_option("--v-bar", v_bar, "True value of every pair")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return simulate(config, out_dir, seeds, seed, replications, jobs);
    if (*ver) return verify(suite, verify_seed, environments, sp_instances, data, verify_out);
    if (*rep) return replay_cmd(fixture, mechanism, data, check, replay_out);
    if (*rmse) return rmse_check(pairs, rmse_seed, v_bar);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
