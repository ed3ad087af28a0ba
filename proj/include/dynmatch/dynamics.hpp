#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <vector>

#include "dynmatch/market.hpp"
#include "dynmatch/mechanisms.hpp"
#include "dynmatch/types.hpp"

namespace dynmatch {

// What a home sees when it has to answer an offer.
struct DecisionContext {
  const Market& market;
  const MechanismSpec& spec;
  const MarketState& state;
  const Matching& offers;
  HomeId home;
  ChildId child;
};

using DecisionRule = std::function<Action(const DecisionContext&)>;

inline Action always_accept(const DecisionContext&) { return Action::Accept; }

inline DecisionRule scripted(ActionProfile profile) {
  return [p = std::move(profile)](const DecisionContext& ctx) { return p.action(ctx.home, ctx.state.t); };
}

// No home accepts a child it truly finds unacceptable, whatever the rule says.
inline Action admissible(const Market& m, HomeId h, ChildId c, Action a) {
  return is_acceptable(m.v_true(h, c)) ? a : Action::Decline;
}

inline PeriodRecord play_period(const Market& m, const MechanismSpec& spec, MarketState& state,
                                const DecisionRule& rule) {
  const auto& env = m.env();
  auto step = mechanism_step(m, spec, state);
  PeriodRecord rec;
  rec.t = state.t;
  rec.active_children = state.active_children(env);
  rec.active_homes = state.active_homes(env);
  for (const auto& e : step.offers.edges()) {
    DecisionContext ctx{m, spec, state, step.offers, e.home, e.child};
    rec.decisions.push_back({e.home, admissible(m, e.home, e.child, rule(ctx))});
  }
  state = advance(env, state, step.offers, rec.decisions);
  rec.offers = std::move(step.offers);
  rec.truncated = std::move(step.truncated);
  rec.rotation = std::move(step.rotation);
  return rec;
}

// Plays periods state.t .. last (the horizon by default), appending to `history`.
inline void play(const Market& m, const MechanismSpec& spec, MarketState& state, const DecisionRule& rule,
                 History& history, Period last = std::numeric_limits<Period>::max()) {
  last = std::min(last, m.env().horizon);
  while (state.t <= last) history.periods.push_back(play_period(m, spec, state, rule));
}

inline History run_mechanism(const Market& m, const MechanismSpec& spec, const DecisionRule& rule) {
  spec.validate();
  History h;
  auto state = MarketState::initial(m.env());
  play(m, spec, state, rule, h);
  return h;
}

inline History run_mechanism(const Environment& env, const MechanismSpec& spec, const DecisionRule& rule) {
  Market m(env);
  return run_mechanism(m, spec, rule);
}

// Offer h receives at period t when every home follows `profile`, or nullopt.
// Only periods before t matter, so the run stops there.
inline std::optional<ChildId> offer_at(const Market& m, const MechanismSpec& spec, const ActionProfile& profile,
                                       HomeId h, Period t) {
  auto state = MarketState::initial(m.env());
  auto rule = scripted(profile);
  History scratch;
  play(m, spec, state, rule, scratch, t - 1);
  if (!state.is_active(m.env(), h)) return std::nullopt;
  return mechanism_step(m, spec, state).offers.partner(h);
}

}  // namespace dynmatch
