#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dynmatch/da.hpp"
#include "dynmatch/format.hpp"
#include "dynmatch/instances.hpp"
#include "dynmatch/io.hpp"
#include "dynmatch/properties.hpp"
#include "dynmatch/replay.hpp"
#include "dynmatch/verify.hpp"

namespace dynmatch {

struct SuiteCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline bool all_passed(const std::vector<SuiteCheck>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const SuiteCheck& c) { return c.passed; });
}

inline std::string format_checks(const std::vector<SuiteCheck>& checks) {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) out << " (" << c.detail << ')';
    out << '\n';
  }
  return out.str();
}

// Fixture and mechanism pairs whose transcripts are stored under
// <data>/transcripts/<fixture>.<mechanism>.txt.
inline const std::vector<std::pair<std::string, MechanismKind>>& stored_transcripts() {
  static const std::vector<std::pair<std::string, MechanismKind>> v{
      {"E1", MechanismKind::SeqDAHome}, {"E1", MechanismKind::HPDA}, {"E1", MechanismKind::CRDA},
      {"E2", MechanismKind::SeqDAHome}, {"E2", MechanismKind::HPDA}, {"E3", MechanismKind::HPDA},
      {"E3", MechanismKind::CRDA},      {"E3", MechanismKind::HEDA},
  };
  return v;
}

inline std::filesystem::path transcript_path(const std::filesystem::path& data_dir, const std::string& fixture,
                                             MechanismKind kind) {
  return data_dir / "transcripts" / (fixture + "." + std::string(to_string(kind)) + ".txt");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

namespace detail {

inline bool near(double a, double b) { return std::abs(a - b) <= kTolerance; }

inline std::string describe(const Environment& env, const Matching& m) {
  if (m.empty()) return "{}";
  std::string s = "{";
  for (const auto& e : m.edges()) {
    if (s.size() > 1) s += ", ";
    s += "(" + env.name(e.home) + "," + env.name(e.child) + ")";
  }
  return s + "}";
}

inline HomeId home_by_name(const Environment& env, const std::string& name) {
  for (const auto& h : env.homes)
    if (env.name(h.id) == name) return h.id;
  throw std::invalid_argument("no home named " + name);
}

inline ChildId child_by_name(const Environment& env, const std::string& name) {
  for (const auto& c : env.children)
    if (env.name(c.id) == name) return c.id;
  throw std::invalid_argument("no child named " + name);
}

}  // namespace detail

// Hand-derived outcomes on the three scripted fixtures plus stored transcripts.
inline std::vector<SuiteCheck> theorem_suite(const std::filesystem::path& data_dir) {
  std::vector<SuiteCheck> out;
  auto fx = [&](const std::string& n) {
    auto f = load_fixture(data_dir / "fixtures" / (n + ".json"));
    if (f.name.empty()) f.name = n;
    return f;
  };
  const auto e1 = fx("E1"), e2 = fx("E2"), e3 = fx("E3");
  using detail::near;

  {
    const auto& env = e1.env;
    auto h1 = detail::home_by_name(env, "h1"), h2 = detail::home_by_name(env, "h2");
    auto c1 = detail::child_by_name(env, "c1"), c2 = detail::child_by_name(env, "c2");
    auto r = replay(e1, MechanismKind::SeqDAHome);
    const auto& t1 = r.deviation.at(1).offers;
    out.push_back({"E1 seqda-home offers (h1,c1) at t=1", t1 == Matching({{c1, h1}}), detail::describe(env, t1)});
    const auto& t2 = r.deviation.at(2).offers;
    out.push_back({"E1 seqda-home offers (h1,c2),(h2,c1) at t=2 after h1 declines",
                   t2 == Matching({{c2, h1}, {c1, h2}}), detail::describe(env, t2)});
    out.push_back({"E1 seqda-home patience gain of h1 is 1/2", near(r.gain(), 0.5), format_number(r.gain())});
    auto v = check_patience_free(env, r.spec, ActionProfile{});
    const bool flagged = std::any_of(v.begin(), v.end(), [&](const Violation& x) {
      return x.home == h1 && x.period == 1 && near(x.magnitude, 0.5);
    });
    out.push_back({"E1 seqda-home patience checker flags h1 at t=1 by 1/2", flagged,
                   std::to_string(v.size()) + " violations"});

    for (auto k : {MechanismKind::HPDA, MechanismKind::CRDA}) {
      Market m(env);
      auto spec = make_spec(k, env);
      auto set = reachable_histories(m, spec);
      CounterfactualCache cache(m, spec);
      std::size_t bad = 0;
      for (const auto& hist : set.histories) bad += check_patience_free(m, hist, cache).size();
      out.push_back({"E1 " + std::string(to_string(k)) + " patience-free on every reachable history", bad == 0,
                     std::to_string(set.histories.size()) + " histories"});
    }

    auto crda = replay(e1, MechanismKind::CRDA);
    const auto& rec = crda.deviation.at(2);
    out.push_back({"E1 crda rotation after h1 declines leaves only (h2,c1)",
                   rec.offers == Matching({{c1, h2}}) && rec.rotation.has_value(), detail::describe(env, rec.offers)});
    Market m(env);
    std::vector<ChildId> rc;
    std::vector<HomeId> rh{h1};
    out.push_back({"E1 crda rotation sets fail the h-perfect condition", !check_h_perfect_condition(m, rc, rh), ""});
  }

  {
    auto r = replay(e2, MechanismKind::HPDA);
    std::vector<Period> offered;
    for (const auto& rec : r.deviation.periods)
      if (!rec.offers.empty()) offered.push_back(rec.t);
    out.push_back({"E2 hpda offers only at t=1 and t=3 after h declines at t=1", offered == std::vector<Period>{1, 3},
                   std::to_string(offered.size()) + " offer periods"});
    out.push_back({"E2 hpda payoff of h is 1", near(r.deviation_payoff, 1.0), format_number(r.deviation_payoff)});
    out.push_back({"E2 hpda declining does not pay", r.gain() <= kTolerance, format_number(r.gain())});
  }

  {
    auto h = detail::home_by_name(e3.env, "h");
    for (auto k : {MechanismKind::HPDA, MechanismKind::CRDA}) {
      auto r = replay(e3, k);
      const std::string name(to_string(k));
      out.push_back({"E3 " + name + " misreport gain of h is 1/2", near(r.gain(), 0.5), format_number(r.gain())});
      auto v = check_strategy_proof(e3.env, fixture_spec(e3, k), h);
      const bool found = std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.magnitude > 0.5 - kTolerance; });
      out.push_back({"E3 " + name + " strategy-proofness checker finds the misreport", found,
                     std::to_string(v.size()) + " violations"});
    }
    for (auto k : {MechanismKind::HEDA, MechanismKind::HEDAStar}) {
      auto v = check_strategy_proof(e3.env, fixture_spec(e3, k), h);
      out.push_back({"E3 " + std::string(to_string(k)) + " has no profitable report or plan", v.empty(),
                     std::to_string(v.size()) + " violations"});
    }
  }

  for (const auto& [name, kind] : stored_transcripts()) {
    const auto& f = name == "E1" ? e1 : name == "E2" ? e2 : e3;
    const auto path = transcript_path(data_dir, name, kind);
    const std::string label = "transcript " + name + " " + std::string(to_string(kind)) + " matches stored copy";
    if (!std::filesystem::exists(path)) {
      out.push_back({label, false, "missing " + path.filename().string()});
      continue;
    }
    out.push_back({label, transcript(f, replay(f, kind)) == read_text_file(path), ""});
  }
  return out;
}

// run_da against the exhaustive oracle: proposer-optimal on both sides and
// the same agents unmatched in every stable matching.
inline std::optional<std::string> da_oracle_disagreement(const ConstructedPreferences& p) {
  auto all = enumerate_stable(p);
  if (all.empty()) return "no stable matching found";
  auto da = run_da(p);
  if (std::find(all.begin(), all.end(), da) == all.end()) return "deferred acceptance result is not stable";
  if (!is_proposer_optimal(da, all, p)) return "deferred acceptance result is not proposer-optimal";
  auto rp = reversed(p);
  auto all_rev = enumerate_stable(rp);
  if (!is_proposer_optimal(run_da(rp), all_rev, rp)) return "receiver-proposing result is not optimal";
  auto pattern = [](const StaticMatching& m) {
    std::vector<bool> v;
    for (const auto& x : m.of_proposer) v.push_back(x.has_value());
    for (const auto& x : m.of_receiver) v.push_back(x.has_value());
    return v;
  };
  for (const auto& m : all)
    if (pattern(m) != pattern(all.front())) return "matched agents differ across stable matchings";
  return std::nullopt;
}

struct OracleReport {
  std::size_t random_instances = 0;
  std::size_t permutation_instances = 0;
  std::size_t disagreements = 0;
  std::string first;
};

inline OracleReport run_da_oracle_check(std::size_t random_instances, std::size_t max_side, std::size_t permutation_n,
                                        std::uint64_t seed) {
  OracleReport rep;
  auto note = [&](const std::optional<std::string>& d) {
    if (!d) return;
    if (rep.disagreements++ == 0) rep.first = *d;
  };
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> side(0, max_side);
  for (std::size_t i = 0; i < random_instances; ++i) {
    const auto np = side(rng);
    const auto nr = side(rng);
    note(da_oracle_disagreement(random_preferences(rng, np, nr)));
    ++rep.random_instances;
  }
  if (permutation_n > 0)
    for_each_permutation_instance(permutation_n, [&](const ConstructedPreferences& p) {
      note(da_oracle_disagreement(p));
      ++rep.permutation_instances;
    });
  return rep;
}

// Random-market sweep plus the strategy-proofness enumeration.
inline std::vector<SuiteCheck> sweep_suite(const SweepConfig& cfg, std::size_t sp_instances) {
  std::vector<SuiteCheck> out;
  auto rep = run_property_sweep(cfg);
  for (const auto& t : rep.tallies) {
    std::string detail = std::to_string(t.violations) + "/" + std::to_string(t.checks);
    if (t.example) detail += ", e.g. env " + std::to_string(t.example_env) + ": " + t.example->detail;
    out.push_back({t.mechanism + " " + t.property + (t.expect_violation ? " (violation expected)" : ""), t.passed(),
                   detail});
  }
  out.push_back({"sweep covered " + std::to_string(rep.environments) + " environments",
                 rep.environments >= cfg.environments,
                 std::to_string(rep.histories) + " histories, " + std::to_string(rep.sampled_environments) +
                     " sampled runs"});
  for (auto k : {MechanismKind::HEDA, MechanismKind::HEDAStar}) {
    auto sp = run_strategy_proof_sweep(k, sp_instances, cfg.seed);
    out.push_back({std::string(to_string(k)) + " strategy-proof on small markets", sp.violations == 0,
                   std::to_string(sp.violations) + " violations in " + std::to_string(sp.instances) + " markets"});
  }
  auto oracle = run_da_oracle_check(500, 5, 3, cfg.seed);
  out.push_back({"deferred acceptance agrees with the stable-matching oracle", oracle.disagreements == 0,
                 std::to_string(oracle.random_instances) + " random + " +
                     std::to_string(oracle.permutation_instances) + " permutation markets" +
                     (oracle.first.empty() ? "" : ", " + oracle.first)});
  return out;
}

}  // namespace dynmatch
