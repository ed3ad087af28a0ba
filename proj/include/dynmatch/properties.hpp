#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynmatch/da.hpp"
#include "dynmatch/dynamics.hpp"
#include "dynmatch/market.hpp"
#include "dynmatch/mechanisms.hpp"
#include "dynmatch/strategic.hpp"
#include "dynmatch/types.hpp"

namespace dynmatch {

inline constexpr double kTolerance = 1e-9;

enum class ViolationKind { Envy, IR, Patience, Waste, StrictWaste, Dominance, StrategyProof };

inline std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Envy: return "envy";
    case ViolationKind::IR: return "ir";
    case ViolationKind::Patience: return "patience";
    case ViolationKind::Waste: return "waste";
    case ViolationKind::StrictWaste: return "strict-waste";
    case ViolationKind::Dominance: return "dominance";
    case ViolationKind::StrategyProof: return "strategy-proof";
  }
  return "?";
}

struct Violation {
  ViolationKind kind = ViolationKind::Envy;
  Period period = 0;
  std::optional<HomeId> home;
  std::optional<ChildId> child;
  double magnitude = 0.0;  // utility gain of the block or deviation
  std::string detail;
};

enum class EnvyMode { BothMatched, AllowUnmatchedChild, AllowUnmatchedHome };

inline std::string_view to_string(EnvyMode m) {
  switch (m) {
    case EnvyMode::BothMatched: return "both-matched";
    case EnvyMode::AllowUnmatchedChild: return "unmatched-child";
    case EnvyMode::AllowUnmatchedHome: return "unmatched-home";
  }
  return "?";
}

// Pairs (c, h), both active at rec.t, that strictly prefer each other to
// their offers. Unmatched counts as 0; which sides may be unmatched depends on
// the mode.
inline std::vector<Violation> check_justified_envy_free(const Market& m, const PeriodRecord& rec, EnvyMode mode,
                                                        UtilityView view = UtilityView::Observed) {
  std::vector<Violation> out;
  auto v = [&](HomeId h, ChildId c) { return view == UtilityView::Observed ? m.v(h, c) : m.v_true(h, c); };
  for (ChildId c : rec.active_children) {
    const auto hc = rec.offers.partner(c);
    if (!hc && mode != EnvyMode::AllowUnmatchedChild) continue;
    for (HomeId h : rec.active_homes) {
      if (hc == h) continue;
      const auto ch = rec.offers.partner(h);
      if (!ch && mode != EnvyMode::AllowUnmatchedHome) continue;
      if (!is_acceptable(m.u(c, h)) || !is_acceptable(v(h, c))) continue;
      const bool child_gains = !hc || ranks_above(m.u(c, h), h.value, m.u(c, *hc), hc->value);
      const bool home_gains = !ch || ranks_above(v(h, c), c.value, v(h, *ch), ch->value);
      if (child_gains && home_gains)
        out.push_back({ViolationKind::Envy, rec.t, h, c, v(h, c) - (ch ? v(h, *ch) : 0.0),
                       std::string(to_string(mode))});
    }
  }
  return out;
}

inline std::vector<Violation> check_individually_rational(const Market& m, const Matching& offers, Period t = 0) {
  std::vector<Violation> out;
  for (const auto& e : offers.edges()) {
    if (!is_acceptable(m.u(e.child, e.home)))
      out.push_back({ViolationKind::IR, t, e.home, e.child, -m.u(e.child, e.home), "child"});
    if (!is_acceptable(m.v(e.home, e.child)))
      out.push_back({ViolationKind::IR, t, e.home, e.child, -m.v(e.home, e.child), "home"});
  }
  return out;
}

// Active, unoffered, mutually acceptable pairs in one period.
inline std::vector<Violation> idle_pairs(const Market& m, const PeriodRecord& rec, ViolationKind kind) {
  std::vector<Violation> out;
  for (HomeId h : rec.active_homes) {
    if (rec.offers.partner(h)) continue;
    for (ChildId c : rec.active_children) {
      if (rec.offers.partner(c)) continue;
      if (is_acceptable(m.u(c, h)) && is_acceptable(m.v(h, c)))
        out.push_back({kind, rec.t, h, c, m.v(h, c), "idle pair"});
    }
  }
  return out;
}

// Weak form: under full compliance no period leaves a mutually acceptable
// pair idle.
inline std::vector<Violation> check_weakly_non_wasteful(const Market& m, const MechanismSpec& spec) {
  std::vector<Violation> out;
  for (const auto& rec : run_mechanism(m, spec, always_accept).periods) {
    auto v = idle_pairs(m, rec, ViolationKind::Waste);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

inline std::vector<Violation> check_strictly_non_wasteful(const Market& m, const History& history) {
  std::vector<Violation> out;
  for (const auto& rec : history.periods) {
    auto v = idle_pairs(m, rec, ViolationKind::StrictWaste);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

// Memoized "what would h be offered at t' if it declined everything before
// t'". Only actions before t' can matter, so the key drops the rest.
class CounterfactualCache {
 public:
  CounterfactualCache(const Market& m, const MechanismSpec& spec) : m_(&m), spec_(&spec) {}

  std::optional<ChildId> offer(const ActionProfile& profile, HomeId h, Period t_prime) {
    auto cf = counterfactual_profile(profile, h, t_prime);
    std::string key = std::to_string(h.value) + ':' + std::to_string(t_prime) + ':';
    for (const auto& [k, a] : cf.entries())
      if (k.second < t_prime && k.first != h && a == Action::Decline)
        key += std::to_string(k.first.value) + '@' + std::to_string(k.second) + ',';
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto o = offer_at(*m_, *spec_, cf, h, t_prime);
    cache_.emplace(std::move(key), o);
    return o;
  }

 private:
  const Market* m_;
  const MechanismSpec* spec_;
  std::map<std::string, std::optional<ChildId>> cache_;
};

// For every offer mu_t(h) in the history and every t' > t: declining until t'
// and accepting there must not give h a better discounted (observed) value.
inline std::vector<Violation> check_patience_free(const Market& m, const History& history, CounterfactualCache& cache) {
  std::vector<Violation> out;
  const auto profile = history.actions();
  const auto horizon = m.env().horizon;
  for (const auto& rec : history.periods) {
    for (const auto& e : rec.offers.edges()) {
      const double now = m.v_at(e.home, e.child, rec.t);
      for (Period tp = rec.t + 1; tp <= horizon; ++tp) {
        auto later = cache.offer(profile, e.home, tp);
        if (!later) continue;
        const double then = m.v_at(e.home, *later, tp);
        if (then > now + kTolerance)
          out.push_back({ViolationKind::Patience, rec.t, e.home, *later, then - now,
                         "waiting until " + std::to_string(tp)});
      }
    }
  }
  return out;
}

inline std::vector<Violation> check_patience_free(const Environment& env, const MechanismSpec& spec,
                                                  const ActionProfile& a) {
  Market m(env);
  CounterfactualCache cache(m, spec);
  return check_patience_free(m, run_mechanism(m, spec, scripted(a)), cache);
}

struct SweepOptions {
  std::size_t max_leaves = 4096;  // exhaustive enumeration limit
  std::size_t samples = 256;      // sampled histories past the limit
  std::uint64_t seed = 0;
};

struct HistorySet {
  std::vector<History> histories;
  bool exhaustive = true;
};

// Every history reachable through home decisions. Last-period decisions
// change nothing downstream and are fixed to accept. Truly unacceptable
// offers are always declined. Falls back to seeded random decisions when the
// tree has more than max_leaves leaves.
inline HistorySet reachable_histories(const Market& m, const MechanismSpec& spec, const SweepOptions& opt = {}) {
  const auto& env = m.env();
  HistorySet out;
  bool overflow = false;

  auto recurse = [&](auto&& self, MarketState state, History hist) -> void {
    if (overflow) return;
    if (state.t > env.horizon) {
      if (out.histories.size() >= opt.max_leaves) {
        overflow = true;
        return;
      }
      out.histories.push_back(std::move(hist));
      return;
    }
    auto step = mechanism_step(m, spec, state);
    PeriodRecord rec;
    rec.t = state.t;
    rec.active_children = state.active_children(env);
    rec.active_homes = state.active_homes(env);
    rec.truncated = step.truncated;
    rec.rotation = step.rotation;
    std::vector<HomeId> free;
    for (const auto& e : step.offers.edges()) {
      rec.decisions.push_back({e.home, admissible(m, e.home, e.child, Action::Accept)});
      if (rec.decisions.back().action == Action::Accept && state.t < env.horizon) free.push_back(e.home);
    }
    rec.offers = std::move(step.offers);
    const std::size_t combos = std::size_t{1} << free.size();
    for (std::size_t mask = 0; mask < combos && !overflow; ++mask) {
      PeriodRecord r = rec;
      for (std::size_t i = 0; i < free.size(); ++i)
        if (mask >> i & 1)
          for (auto& d : r.decisions)
            if (d.home == free[i]) d.action = Action::Decline;
      auto next = advance(env, state, r.offers, r.decisions);
      History h = hist;
      h.periods.push_back(std::move(r));
      self(self, std::move(next), std::move(h));
    }
  };
  recurse(recurse, MarketState::initial(env), History{});
  if (!overflow) return out;

  out.histories.clear();
  out.exhaustive = false;
  std::mt19937_64 rng(opt.seed);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < opt.samples; ++i) {
    DecisionRule rule = [&](const DecisionContext&) { return coin(rng) ? Action::Accept : Action::Decline; };
    out.histories.push_back(run_mechanism(m, spec, rule));
  }
  return out;
}

// Open-loop plans: bit k of a plan is the action in period k+1.
inline ActionProfile plan_profile(HomeId h, std::uint32_t plan, Period horizon, ActionProfile base = {}) {
  for (Period t = 1; t <= horizon; ++t) base.set(h, t, (plan >> (t - 1) & 1) ? Action::Accept : Action::Decline);
  return base;
}

// Accept-first must do at least as well as every other open-loop plan of h,
// against each opponent plan (all of them when (homes-1)*T <= max_opponent_bits,
// otherwise a seeded sample).
inline std::vector<Violation> check_accept_first_dominant(const Market& m, const MechanismSpec& spec, HomeId h,
                                                          unsigned max_opponent_bits = 8, std::size_t samples = 64,
                                                          std::uint64_t seed = 0) {
  const auto& env = m.env();
  const Period T = env.horizon;
  if (T > 16) throw std::length_error("accept-first check enumerates 2^T plans; horizon too long");
  std::vector<HomeId> others;
  for (const auto& x : env.homes)
    if (x.id != h) others.push_back(x.id);
  const std::size_t bits = others.size() * static_cast<std::size_t>(T);

  std::vector<ActionProfile> opponents;
  auto from_bits = [&](std::uint64_t word) {
    ActionProfile p;
    std::size_t b = 0;
    for (HomeId o : others)
      for (Period t = 1; t <= T; ++t, ++b) p.set(o, t, (word >> b & 1) ? Action::Decline : Action::Accept);
    return p;
  };
  if (bits <= max_opponent_bits) {
    for (std::uint64_t w = 0; w < (std::uint64_t{1} << bits); ++w) opponents.push_back(from_bits(w));
  } else {
    std::mt19937_64 rng(seed);
    opponents.push_back(from_bits(0));
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 1; i < samples; ++i) {
      ActionProfile p;
      for (HomeId o : others)
        for (Period t = 1; t <= T; ++t) p.set(o, t, coin(rng) ? Action::Decline : Action::Accept);
      opponents.push_back(std::move(p));
    }
  }

  std::vector<Violation> out;
  const std::uint32_t all_accept = (1u << T) - 1;
  for (const auto& opp : opponents) {
    const double first = realized_utility(run_mechanism(m, spec, scripted(plan_profile(h, all_accept, T, opp))), env, h);
    for (std::uint32_t plan = 0; plan < all_accept; ++plan) {
      const double alt = realized_utility(run_mechanism(m, spec, scripted(plan_profile(h, plan, T, opp))), env, h);
      if (alt > first + kTolerance)
        out.push_back({ViolationKind::Dominance, 0, h, std::nullopt, alt - first, "plan " + std::to_string(plan)});
    }
  }
  return out;
}

// Every acceptability report of h combined with every open-loop plan, others
// truthful and accepting. Flags any pair beating truthful reporting plus
// always accepting, in true realized utility. The MechanismSpec (and any endowment
// schedule in it) is held fixed across reports.
inline std::vector<Violation> check_strategy_proof(const Environment& env, const MechanismSpec& spec, HomeId h,
                                                   std::size_t max_children = 10) {
  const auto nc = env.num_children();
  const Period T = env.horizon;
  if (nc > max_children || T > 16) throw std::length_error("strategy-proofness enumeration too large");
  const Report truthful = truthful_report(env.prefs.home_true_utility);
  auto truthful_env = with_report(env, truthful);
  const double base = realized_utility(run_mechanism(truthful_env, spec, always_accept), env, h);

  std::vector<Violation> out;
  for (std::uint64_t sigma = 0; sigma < (std::uint64_t{1} << nc); ++sigma) {
    Report r = truthful;
    for (std::size_t c = 0; c < nc; ++c) r.accepts[h.value][c] = sigma >> c & 1;
    auto reported = with_report(env, r);
    Market m(reported);
    for (std::uint32_t plan = 0; plan < (1u << T); ++plan) {
      const double u = realized_utility(run_mechanism(m, spec, scripted(plan_profile(h, plan, T))), env, h);
      if (u > base + kTolerance)
        out.push_back({ViolationKind::StrategyProof, 0, h, std::nullopt, u - base,
                       "report " + std::to_string(sigma) + " plan " + std::to_string(plan)});
    }
  }
  return out;
}

// Whether some stable matching of children R_C and homes R_H (observed
// preferences) gives every home in R_H a child.
inline bool check_h_perfect_condition(const Market& m, std::span<const ChildId> rc, std::span<const HomeId> rh) {
  if (rh.empty()) return true;
  ConstructedPreferences p;
  for (ChildId c : rc) p.proposer_ids.push_back(c.value);
  for (HomeId h : rh) p.receiver_ids.push_back(h.value);
  p.proposer_utility = UtilityMatrix(rc.size(), rh.size());
  p.receiver_utility = UtilityMatrix(rh.size(), rc.size());
  for (std::size_t i = 0; i < rc.size(); ++i)
    for (std::size_t j = 0; j < rh.size(); ++j) {
      p.proposer_utility(i, j) = m.u(rc[i], rh[j]);
      p.receiver_utility(j, i) = m.v(rh[j], rc[i]);
    }
  for (const auto& s : enumerate_stable(p)) {
    if (std::all_of(s.of_receiver.begin(), s.of_receiver.end(), [](const auto& x) { return x.has_value(); }))
      return true;
  }
  return false;
}

}  // namespace dynmatch
