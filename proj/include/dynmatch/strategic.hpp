#pragma once

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dynmatch/dynamics.hpp"
#include "dynmatch/market.hpp"
#include "dynmatch/mechanisms.hpp"
#include "dynmatch/types.hpp"

namespace dynmatch {

// accepts[h][c]: whether home h declares child c acceptable.
struct Report {
  std::vector<std::vector<char>> accepts;

  bool operator()(HomeId h, ChildId c) const { return accepts.at(h.value).at(c.value) != 0; }
  friend bool operator==(const Report&, const Report&) = default;
};

inline Report truthful_report(const UtilityMatrix& true_home_utility) {
  Report r;
  r.accepts.assign(true_home_utility.rows(), std::vector<char>(true_home_utility.cols(), 0));
  for (std::size_t h = 0; h < true_home_utility.rows(); ++h)
    for (std::size_t c = 0; c < true_home_utility.cols(); ++c)
      r.accepts[h][c] = is_acceptable(true_home_utility(h, c));
  return r;
}

// The matchmaker sees the true value of declared children and -1 elsewhere.
inline UtilityMatrix observed_from_report(const UtilityMatrix& true_home_utility, const Report& report) {
  if (report.accepts.size() != true_home_utility.rows())
    throw std::invalid_argument("report does not cover every home");
  UtilityMatrix out(true_home_utility.rows(), true_home_utility.cols(), kUnacceptable);
  for (std::size_t h = 0; h < true_home_utility.rows(); ++h) {
    if (report.accepts[h].size() != true_home_utility.cols())
      throw std::invalid_argument("report does not cover every child");
    for (std::size_t c = 0; c < true_home_utility.cols(); ++c)
      if (report.accepts[h][c]) out(h, c) = true_home_utility(h, c);
  }
  return out;
}

// Copy of env whose observed table is filtered through `report`.
inline Environment with_report(const Environment& env, const Report& report) {
  Environment out = env;
  out.prefs.home_observed_utility = observed_from_report(env.prefs.home_true_utility, report);
  return out;
}

struct HomeBehavior {
  enum class Kind { AlwaysAccept, Scripted, BestResponseLookahead };
  Kind kind = Kind::AlwaysAccept;
  ActionProfile script;

  static HomeBehavior always_accept() { return {Kind::AlwaysAccept, {}}; }
  static HomeBehavior scripted(ActionProfile p) { return {Kind::Scripted, std::move(p)}; }
  static HomeBehavior best_response() { return {Kind::BestResponseLookahead, {}}; }
};

// h's true discounted value of being placed with c at t.
inline double true_value_at(const Market& m, HomeId h, ChildId c, Period t) {
  return m.v_true(h, c) - (t - m.env().homes[h.value].arrival) * m.env().prefs.home_wait_cost;
}

// Accept iff the offer is worth at least the best h could get by declining
// until some later period and accepting there, assuming every other home
// accepts whatever it is offered. Values use the home's true utilities; the
// forward run uses the matchmaker's observed ones.
inline Action best_response_decision(const DecisionContext& ctx) {
  const auto& m = ctx.market;
  const auto& env = m.env();
  const HomeId h = ctx.home;
  if (!is_acceptable(m.v_true(h, ctx.child))) return Action::Decline;
  const double current = true_value_at(m, h, ctx.child, ctx.state.t);

  auto others_accept = [h](const DecisionContext& c) { return c.home == h ? Action::Decline : Action::Accept; };
  std::vector<Decision> now;
  for (const auto& e : ctx.offers.edges())
    now.push_back({e.home, admissible(m, e.home, e.child, e.home == h ? Action::Decline : Action::Accept)});
  auto state = advance(env, ctx.state, ctx.offers, now);

  while (state.t <= env.horizon) {
    auto rec = play_period(m, ctx.spec, state, others_accept);
    if (auto c = rec.offers.partner(h); c && is_acceptable(m.v_true(h, *c))) {
      if (true_value_at(m, h, *c, rec.t) > current) return Action::Decline;
    }
  }
  return Action::Accept;
}

inline DecisionRule make_rule(const HomeBehavior& b) {
  switch (b.kind) {
    case HomeBehavior::Kind::AlwaysAccept: return always_accept;
    case HomeBehavior::Kind::Scripted: return scripted(b.script);
    case HomeBehavior::Kind::BestResponseLookahead: return best_response_decision;
  }
  throw std::logic_error("unknown behavior");
}

inline History run_mechanism(const Environment& env, const MechanismSpec& spec, const HomeBehavior& behavior) {
  return run_mechanism(env, spec, make_rule(behavior));
}

// Value of accepting at the acceptance period, or the pure waiting loss
// -(T - arrival) * w_h when h never accepts. True utilities.
inline double realized_utility(const History& history, const Environment& env, HomeId h) {
  const auto& home = env.home(h);
  if (auto t = history.acceptance_period(h)) {
    auto c = history.at(*t).offers.partner(h);
    return env.home_utility(h, *c, UtilityView::True) - (*t - home.arrival) * env.prefs.home_wait_cost;
  }
  return -(env.horizon - home.arrival) * env.prefs.home_wait_cost;
}

}  // namespace dynmatch
