#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dynmatch/types.hpp"

namespace dynmatch {

// V_h^t(c) = V_h(c) - (t - arrival(h)) * w_h
inline double discounted_home_utility(const Environment& env, HomeId h, ChildId c, Period t,
                                      UtilityView view = UtilityView::Observed) {
  const auto& home = env.home(h);
  if (t < home.arrival) throw std::invalid_argument("period precedes the home's arrival");
  return env.home_utility(h, c, view) - (t - home.arrival) * env.prefs.home_wait_cost;
}

// U_c^t(h) = U_c(h) - (t - arrival(c)) * w_c
inline double discounted_child_utility(const Environment& env, ChildId c, HomeId h, Period t) {
  const auto& child = env.child(c);
  if (t < child.arrival) throw std::invalid_argument("period precedes the child's arrival");
  return env.child_utility(c, h) - (t - child.arrival) * env.prefs.child_wait_cost;
}

struct PriorOffer {
  Period period = 0;
  ChildId child;
};

// Everything a mechanism may condition on at the start of period t: who has
// already left the market and each home's most recent offer.
struct MarketState {
  Period t = 1;
  std::vector<char> child_accepted;  // membership in A^C(t-1)
  std::vector<char> home_accepted;   // membership in A^H(t-1)
  std::vector<std::optional<PriorOffer>> last_offer;

  static MarketState initial(const Environment& env) {
    MarketState s;
    s.child_accepted.assign(env.num_children(), 0);
    s.home_accepted.assign(env.num_homes(), 0);
    s.last_offer.assign(env.num_homes(), std::nullopt);
    return s;
  }

  bool is_active(const Environment& env, ChildId c) const {
    return env.child(c).arrival <= t && !child_accepted[c.value];
  }
  bool is_active(const Environment& env, HomeId h) const {
    return env.home(h).arrival <= t && !home_accepted[h.value];
  }

  std::vector<ChildId> active_children(const Environment& env) const {
    std::vector<ChildId> out;
    for (const auto& c : env.children)
      if (is_active(env, c.id)) out.push_back(c.id);
    return out;
  }
  std::vector<HomeId> active_homes(const Environment& env) const {
    std::vector<HomeId> out;
    for (const auto& h : env.homes)
      if (is_active(env, h.id)) out.push_back(h.id);
    return out;
  }

  friend bool operator==(const MarketState&, const MarketState&) = default;
};

struct Decision {
  HomeId home;
  Action action = Action::Accept;
  friend bool operator==(const Decision&, const Decision&) = default;
};

// Sets built by the child-rotating mechanism when its truncation fires.
struct RotationTrace {
  std::vector<ChildId> candidates;  // children flagged for rotation or left unmatched
  std::vector<HomeId> homes;        // homes holding a candidate or unmatched
  std::vector<ChildId> rotated;     // candidates allowed back into the re-run
  friend bool operator==(const RotationTrace&, const RotationTrace&) = default;
};

struct PeriodRecord {
  Period t = 1;
  std::vector<ChildId> active_children;  // C(t)
  std::vector<HomeId> active_homes;      // H(t)
  Matching offers;                       // mu_t
  std::vector<Decision> decisions;       // one per offered home, by home id
  std::vector<HomeId> truncated;         // homes withheld from offers this period
  std::optional<RotationTrace> rotation;

  bool accepted(HomeId h) const {
    for (const auto& d : decisions)
      if (d.home == h) return d.action == Action::Accept;
    return false;
  }

  friend bool operator==(const PeriodRecord&, const PeriodRecord&) = default;
};

struct History {
  std::vector<PeriodRecord> periods;

  const PeriodRecord& at(Period t) const { return periods.at(static_cast<std::size_t>(t - 1)); }

  ActionProfile actions() const {
    ActionProfile a;
    for (const auto& p : periods)
      for (const auto& d : p.decisions) a.set(d.home, p.t, d.action);
    return a;
  }

  // A^C(t): children whose placement was accepted in some period k <= t.
  std::vector<ChildId> accepted_children(Period t) const {
    std::vector<ChildId> out;
    for (const auto& p : periods) {
      if (p.t > t) break;
      for (const auto& e : p.offers.edges())
        if (p.accepted(e.home)) out.push_back(e.child);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  std::vector<HomeId> accepted_homes(Period t) const {
    std::vector<HomeId> out;
    for (const auto& p : periods) {
      if (p.t > t) break;
      for (const auto& d : p.decisions)
        if (d.action == Action::Accept) out.push_back(d.home);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Period in which h accepted, if it ever did.
  std::optional<Period> acceptance_period(HomeId h) const {
    for (const auto& p : periods)
      if (p.accepted(h)) return p.t;
    return std::nullopt;
  }

  friend bool operator==(const History&, const History&) = default;
};

// Moves the market from t to t+1. Accepted pairs leave; declined pairs stay.
inline MarketState advance(const Environment& env, const MarketState& state, const Matching& offers,
                           std::span<const Decision> decisions) {
  for (const auto& e : offers.edges()) {
    if (!state.is_active(env, e.child) || !state.is_active(env, e.home))
      throw std::invalid_argument("offer involves an agent outside the active market");
  }
  for (const auto& d : decisions) {
    if (!offers.partner(d.home)) throw std::invalid_argument("decision supplied for a home without an offer");
  }
  for (const auto& e : offers.edges()) {
    auto n = std::count_if(decisions.begin(), decisions.end(),
                           [&](const Decision& d) { return d.home == e.home; });
    if (n != 1) throw std::invalid_argument("every offered home needs exactly one decision");
  }

  MarketState next = state;
  for (const auto& e : offers.edges()) {
    next.last_offer[e.home.value] = PriorOffer{state.t, e.child};
    auto it = std::find_if(decisions.begin(), decisions.end(),
                           [&](const Decision& d) { return d.home == e.home; });
    if (it->action == Action::Accept) {
      next.child_accepted[e.child.value] = 1;
      next.home_accepted[e.home.value] = 1;
    }
  }
  next.t = state.t + 1;
  return next;
}

// h declines every offer before t_prime and accepts at t_prime; every other
// entry is unchanged.
inline ActionProfile counterfactual_profile(const ActionProfile& profile, HomeId h, Period t_prime) {
  ActionProfile out = profile;
  for (Period k = 1; k < t_prime; ++k) out.set(h, k, Action::Decline);
  out.set(h, t_prime, Action::Accept);
  return out;
}

// W^C: every period a child is active and not placed by the end of it costs w_c.
inline double total_child_waiting_cost(const History& history, const Environment& env) {
  double total = 0.0;
  for (const auto& p : history.periods) {
    for (ChildId c : p.active_children) {
      auto h = p.offers.partner(c);
      if (!(h && p.accepted(*h))) total += env.prefs.child_wait_cost;
    }
  }
  return total;
}

// Per-agent preference orders over the observed tables, built once per
// environment. Holds a pointer to the environment, which must outlive it.
class Market {
 public:
  explicit Market(const Environment& env) : env_(&env) {
    env.validate();
    const auto nc = env.num_children();
    const auto nh = env.num_homes();
    home_rank_.resize(nh);
    for (std::size_t h = 0; h < nh; ++h) {
      auto& order = home_rank_[h];
      order.resize(nc);
      std::iota(order.begin(), order.end(), 0u);
      const auto& v = env.prefs.home_observed_utility;
      std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return ranks_above(v(h, a), a, v(h, b), b);
      });
    }
    child_rank_.resize(nc);
    for (std::size_t c = 0; c < nc; ++c) {
      auto& order = child_rank_[c];
      order.resize(nh);
      std::iota(order.begin(), order.end(), 0u);
      const auto& u = env.prefs.child_utility;
      std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return ranks_above(u(c, a), a, u(c, b), b);
      });
    }
  }

  const Environment& env() const noexcept { return *env_; }

  // Children by h's observed utility, best first.
  std::span<const std::uint32_t> ranking(HomeId h) const { return home_rank_.at(h.value); }
  // Homes by c's utility, best first.
  std::span<const std::uint32_t> ranking(ChildId c) const { return child_rank_.at(c.value); }

  double u(ChildId c, HomeId h) const noexcept { return env_->prefs.child_utility(c.value, h.value); }
  double v(HomeId h, ChildId c) const noexcept { return env_->prefs.home_observed_utility(h.value, c.value); }
  double v_true(HomeId h, ChildId c) const noexcept { return env_->prefs.home_true_utility(h.value, c.value); }

  double v_at(HomeId h, ChildId c, Period t) const noexcept {
    return v(h, c) - (t - env_->homes[h.value].arrival) * env_->prefs.home_wait_cost;
  }

 private:
  const Environment* env_;
  std::vector<std::vector<std::uint32_t>> home_rank_;
  std::vector<std::vector<std::uint32_t>> child_rank_;
};

}  // namespace dynmatch
