#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dynmatch/instances.hpp"
#include "dynmatch/io.hpp"
#include "dynmatch/properties.hpp"

namespace dynmatch {

struct PropertyTally {
  std::string mechanism;
  std::string property;
  bool expect_violation = false;  // true: the sweep must find at least one
  std::size_t checks = 0;
  std::size_t violations = 0;
  std::optional<Violation> example;
  std::size_t example_env = 0;

  bool passed() const { return expect_violation ? violations > 0 : violations == 0; }

  void record(std::size_t env_index, const std::vector<Violation>& found) {
    ++checks;
    if (found.empty()) return;
    violations += found.size();
    if (!example) {
      example = found.front();
      example_env = env_index;
    }
  }
};

struct SweepReport {
  std::size_t environments = 0;
  std::size_t histories = 0;
  std::size_t sampled_environments = 0;  // mechanism runs whose history tree was sampled
  std::vector<PropertyTally> tallies;

  bool passed() const {
    for (const auto& t : tallies)
      if (!t.passed()) return false;
    return true;
  }

  PropertyTally& tally(const std::string& mechanism, const std::string& property, bool expect_violation = false) {
    for (auto& t : tallies)
      if (t.mechanism == mechanism && t.property == property) return t;
    tallies.push_back({mechanism, property, expect_violation});
    return tallies.back();
  }

  const PropertyTally* find(const std::string& mechanism, const std::string& property) const {
    for (const auto& t : tallies)
      if (t.mechanism == mechanism && t.property == property) return &t;
    return nullptr;
  }
};

struct SweepConfig {
  std::size_t environments = 200;
  std::uint64_t seed = 1;
  SmallEnvironmentConfig env;
  SweepOptions histories;
  bool accept_first = true;
};

// Random small markets checked against every reachable decision history.
inline SweepReport run_property_sweep(const SweepConfig& cfg) {
  SweepReport rep;
  std::mt19937_64 rng(cfg.seed);
  const MechanismKind kinds[] = {MechanismKind::SeqDAHome, MechanismKind::HPDA, MechanismKind::CRDA,
                                 MechanismKind::HEDA, MechanismKind::HEDAStar};
  // Fix the tally order so reports are stable.
  for (auto k : kinds) {
    const std::string name(to_string(k));
    rep.tally(name, "ir");
    rep.tally(name, "patience", k == MechanismKind::SeqDAHome);
    if (k == MechanismKind::SeqDAHome) {
      rep.tally(name, "envy-both-matched");
      rep.tally(name, "strict-waste");
    }
    if (k == MechanismKind::HPDA || k == MechanismKind::CRDA) {
      rep.tally(name, "envy-both-matched");
      rep.tally(name, k == MechanismKind::HPDA ? "envy-unmatched-child" : "envy-unmatched-home");
      rep.tally(name, "weak-waste");
    }
    if (uses_endowment(k)) rep.tally(name, "endowment");
    if (k != MechanismKind::SeqDAHome) {
      if (cfg.accept_first) rep.tally(name, "accept-first");
      rep.tally(name, "best-response-accepts");
    }
  }
  rep.tally("hpda=crda", "compliant-placements");

  for (std::size_t i = 0; i < cfg.environments; ++i) {
    const Environment env = random_environment(rng, cfg.env);
    const Market m(env);
    ++rep.environments;

    for (auto k : kinds) {
      const std::string name(to_string(k));
      const auto spec = make_spec(k, env);
      SweepOptions opt = cfg.histories;
      opt.seed = cfg.seed * 1000003 + i;
      auto set = reachable_histories(m, spec, opt);
      rep.histories += set.histories.size();
      if (!set.exhaustive) ++rep.sampled_environments;
      CounterfactualCache cache(m, spec);

      for (const auto& hist : set.histories) {
        std::vector<Violation> ir, envy, envy_unmatched, waste, endow;
        for (const auto& rec : hist.periods) {
          auto x = check_individually_rational(m, rec.offers, rec.t);
          ir.insert(ir.end(), x.begin(), x.end());
          if (k == MechanismKind::SeqDAHome || k == MechanismKind::HPDA || k == MechanismKind::CRDA) {
            auto e = check_justified_envy_free(m, rec, EnvyMode::BothMatched);
            envy.insert(envy.end(), e.begin(), e.end());
          }
          if (k == MechanismKind::HPDA || k == MechanismKind::CRDA) {
            auto e = check_justified_envy_free(
                m, rec, k == MechanismKind::HPDA ? EnvyMode::AllowUnmatchedChild : EnvyMode::AllowUnmatchedHome);
            envy_unmatched.insert(envy_unmatched.end(), e.begin(), e.end());
          }
          if (uses_endowment(k)) {
            for (const auto& e : rec.offers.edges())
              if (!heda_eligible(m, *spec.schedule, k == MechanismKind::HEDA, e.home, e.child, rec.t))
                endow.push_back({ViolationKind::IR, rec.t, e.home, e.child, 0.0, "offer outside endowment"});
          }
        }
        rep.tally(name, "ir").record(i, ir);
        rep.tally(name, "patience").record(i, check_patience_free(m, hist, cache));
        if (k == MechanismKind::SeqDAHome) {
          rep.tally(name, "envy-both-matched").record(i, envy);
          rep.tally(name, "strict-waste").record(i, check_strictly_non_wasteful(m, hist));
        }
        if (k == MechanismKind::HPDA || k == MechanismKind::CRDA) {
          rep.tally(name, "envy-both-matched").record(i, envy);
          rep.tally(name, k == MechanismKind::HPDA ? "envy-unmatched-child" : "envy-unmatched-home")
              .record(i, envy_unmatched);
        }
        if (uses_endowment(k)) rep.tally(name, "endowment").record(i, endow);
      }

      if (k == MechanismKind::HPDA || k == MechanismKind::CRDA)
        rep.tally(name, "weak-waste").record(i, check_weakly_non_wasteful(m, spec));
      if (k != MechanismKind::SeqDAHome) {
        if (cfg.accept_first) {
          std::vector<Violation> dom;
          for (const auto& h : env.homes) {
            auto d = check_accept_first_dominant(m, spec, h.id, 6, 16, cfg.seed + i);
            dom.insert(dom.end(), d.begin(), d.end());
          }
          rep.tally(name, "accept-first").record(i, dom);
        }
        std::vector<Violation> declines;
        for (const auto& rec : run_mechanism(m, spec, best_response_decision).periods)
          for (const auto& d : rec.decisions)
            if (d.action == Action::Decline)
              declines.push_back({ViolationKind::Dominance, rec.t, d.home, rec.offers.partner(d.home), 0.0,
                                  "best response declined"});
        rep.tally(name, "best-response-accepts").record(i, declines);
      }
    }

    std::vector<Violation> diff;
    auto a = run_mechanism(m, make_spec(MechanismKind::HPDA, env), always_accept);
    auto b = run_mechanism(m, make_spec(MechanismKind::CRDA, env), always_accept);
    for (std::size_t p = 0; p < a.periods.size(); ++p) {
      const auto& ra = a.periods[p];
      const auto& rb = b.periods[p];
      if (ra.offers.size() != rb.offers.size() || ra.active_children != rb.active_children ||
          ra.active_homes != rb.active_homes)
        diff.push_back({ViolationKind::Waste, ra.t, std::nullopt, std::nullopt,
                        static_cast<double>(ra.offers.size()) - static_cast<double>(rb.offers.size()),
                        "placement count differs"});
    }
    rep.tally("hpda=crda", "compliant-placements").record(i, diff);
  }
  return rep;
}

struct StrategyProofSweep {
  std::size_t instances = 0;
  std::size_t violations = 0;
  std::optional<Violation> example;
  std::optional<Environment> example_env;
};

// HEDA (schedule built from the truthful market) against every report and
// plan of every home, on random markets with 1-2 homes, <= 3 children, T <= 3.
inline StrategyProofSweep run_strategy_proof_sweep(MechanismKind kind, std::size_t instances, std::uint64_t seed) {
  StrategyProofSweep out;
  std::mt19937_64 rng(seed);
  SmallEnvironmentConfig cfg{3, 2, 3, 0.2};
  for (std::size_t i = 0; i < instances; ++i) {
    auto env = random_environment(rng, cfg);
    const auto spec = make_spec(kind, env);
    ++out.instances;
    for (const auto& h : env.homes) {
      auto v = check_strategy_proof(env, spec, h.id);
      out.violations += v.size();
      if (!v.empty() && !out.example) {
        out.example = v.front();
        out.example_env = env;
      }
    }
  }
  return out;
}

}  // namespace dynmatch
