#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dynmatch/da.hpp"
#include "dynmatch/market.hpp"
#include "dynmatch/types.hpp"

namespace dynmatch {

enum class MechanismKind { SeqDAHome, SeqDAChild, HPDA, CRDA, HEDA, HEDAStar };

inline constexpr MechanismKind kAllMechanisms[] = {MechanismKind::SeqDAHome, MechanismKind::SeqDAChild,
                                                   MechanismKind::HPDA,      MechanismKind::CRDA,
                                                   MechanismKind::HEDA,      MechanismKind::HEDAStar};

inline std::string_view to_string(MechanismKind k) {
  switch (k) {
    case MechanismKind::SeqDAHome: return "seqda-home";
    case MechanismKind::SeqDAChild: return "seqda-child";
    case MechanismKind::HPDA: return "hpda";
    case MechanismKind::CRDA: return "crda";
    case MechanismKind::HEDA: return "heda";
    case MechanismKind::HEDAStar: return "heda-star";
  }
  return "?";
}

// Accepts the canonical names plus "seqda" for the home-proposing variant.
inline std::optional<MechanismKind> parse_mechanism(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "seqda") return MechanismKind::SeqDAHome;
  if (s == "heda*") return MechanismKind::HEDAStar;
  for (auto k : kAllMechanisms)
    if (s == to_string(k)) return k;
  return std::nullopt;
}

inline bool uses_endowment(MechanismKind k) {
  return k == MechanismKind::HEDA || k == MechanismKind::HEDAStar;
}

struct EndowmentInterval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const EndowmentInterval&, const EndowmentInterval&) = default;
};

// E_0, E_1, ... indexed by a home's waiting age. Intervals are [lo, hi) except
// E_0, which also contains its upper end. Ages past the last interval only
// admit the floor value.
struct EndowmentSchedule {
  std::vector<EndowmentInterval> intervals;
  double floor = 0.0;

  void validate() const {
    if (intervals.empty()) throw std::invalid_argument("endowment schedule needs at least one interval");
    for (std::size_t i = 0; i < intervals.size(); ++i) {
      if (!(intervals[i].lo < intervals[i].hi)) throw std::invalid_argument("endowment interval must have lo < hi");
      if (i > 0 && intervals[i - 1].lo < intervals[i].hi)
        throw std::invalid_argument("endowment intervals must be disjoint and decreasing");
    }
  }

  bool contains(int age, double value) const {
    if (age < 0) return false;
    if (static_cast<std::size_t>(age) >= intervals.size()) return value == floor;
    const auto& e = intervals[static_cast<std::size_t>(age)];
    if (age == 0) return e.lo <= value && value <= e.hi;
    return e.lo <= value && value < e.hi;
  }

  friend bool operator==(const EndowmentSchedule&, const EndowmentSchedule&) = default;
};

// coarse_count intervals of coarse_width below max_u, then width-w_h intervals
// continuing down from 0; one interval per waiting age up to the horizon.
inline EndowmentSchedule build_endowment_schedule(double max_u, double w_h, double coarse_width, int coarse_count,
                                                  Period horizon) {
  if (!(coarse_width > 0.0) || !(w_h > 0.0)) throw std::invalid_argument("endowment widths must be positive");
  if (coarse_count < 1 || horizon < 1) throw std::invalid_argument("endowment schedule needs a positive size");
  if (std::abs(coarse_width * coarse_count - max_u) > 1e-9 * std::max(1.0, std::abs(max_u)))
    throw std::invalid_argument("coarse intervals must span (0, max utility]");

  EndowmentSchedule s;
  for (int i = 0; i < horizon; ++i) {
    if (i < coarse_count) {
      double hi = i == 0 ? max_u : max_u - i * coarse_width;
      double lo = i + 1 == coarse_count ? 0.0 : max_u - (i + 1) * coarse_width;
      s.intervals.push_back({lo, hi});
    } else {
      s.intervals.push_back({-(i - coarse_count + 1) * w_h, -(i - coarse_count) * w_h});
    }
  }
  s.floor = s.intervals.back().lo;
  return s;
}

inline double max_observed_utility(const Environment& env) {
  double m = 0.0;
  for (double v : env.prefs.home_observed_utility.values()) m = std::max(m, v);
  return m;
}

// Four coarse months splitting the top utility, then steps of w_h.
inline EndowmentSchedule default_endowment_schedule(const Environment& env) {
  double max_u = max_observed_utility(env);
  if (!(max_u > 0.0)) max_u = 1.0;
  return build_endowment_schedule(max_u, env.prefs.home_wait_cost, max_u / 4.0, 4, env.horizon);
}

struct MechanismSpec {
  MechanismKind kind = MechanismKind::SeqDAHome;
  std::optional<EndowmentSchedule> schedule;

  void validate() const {
    if (uses_endowment(kind) != schedule.has_value())
      throw std::invalid_argument("endowment schedule must be given exactly for the endowment mechanisms");
    if (schedule) schedule->validate();
  }
};

// Spec with the default schedule filled in where one is needed.
inline MechanismSpec make_spec(MechanismKind kind, const Environment& env) {
  MechanismSpec s{kind, std::nullopt};
  if (uses_endowment(kind)) s.schedule = default_endowment_schedule(env);
  return s;
}

struct StepResult {
  Matching offers;
  std::vector<HomeId> truncated;
  std::optional<RotationTrace> rotation;
};

namespace detail {

inline Matching to_matching_from_homes(const std::vector<std::optional<std::size_t>>& held_by_child) {
  std::vector<Edge> edges;
  for (std::size_t c = 0; c < held_by_child.size(); ++c)
    if (held_by_child[c]) edges.push_back({ChildId{static_cast<std::uint32_t>(c)},
                                           HomeId{static_cast<std::uint32_t>(*held_by_child[c])}});
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.home < b.home; });
  return Matching(std::move(edges));
}

inline Matching to_matching_from_children(const std::vector<std::optional<std::size_t>>& held_by_home) {
  std::vector<Edge> edges;
  for (std::size_t h = 0; h < held_by_home.size(); ++h)
    if (held_by_home[h]) edges.push_back({ChildId{static_cast<std::uint32_t>(*held_by_home[h])},
                                          HomeId{static_cast<std::uint32_t>(h)}});
  return Matching(std::move(edges));
}

// Homes propose down their rankings; `eligible(h, c)` filters children.
// `child_ok[c]` marks the children taking part.
template <class Eligible>
Matching home_proposing(const Market& m, const std::vector<HomeId>& homes, const std::vector<char>& child_ok,
                        Eligible&& eligible) {
  const auto& env = m.env();
  std::vector<std::size_t> cursor(env.num_homes(), 0);
  auto next = [&](std::size_t h) -> std::optional<std::size_t> {
    const HomeId hid{static_cast<std::uint32_t>(h)};
    auto order = m.ranking(hid);
    auto& i = cursor[h];
    while (i < order.size()) {
      const std::uint32_t c = order[i++];
      const ChildId cid{c};
      if (!is_acceptable(m.v(hid, cid))) {
        i = order.size();
        break;
      }
      if (!child_ok[c] || !is_acceptable(m.u(cid, hid))) continue;
      if (!eligible(hid, cid)) continue;
      return c;
    }
    return std::nullopt;
  };
  auto prefers = [&](std::size_t c, std::size_t h, std::optional<std::size_t> held) {
    const ChildId cid{static_cast<std::uint32_t>(c)};
    const double uh = m.u(cid, HomeId{static_cast<std::uint32_t>(h)});
    if (!is_acceptable(uh)) return false;
    if (!held) return true;
    return ranks_above(uh, static_cast<std::uint32_t>(h), m.u(cid, HomeId{static_cast<std::uint32_t>(*held)}),
                       static_cast<std::uint32_t>(*held));
  };
  std::vector<std::size_t> proposers;
  proposers.reserve(homes.size());
  for (HomeId h : homes) proposers.push_back(h.value);
  return to_matching_from_homes(deferred_acceptance(std::move(proposers), env.num_children(), next, prefers));
}

// Children propose down their rankings over homes flagged in `home_ok`.
inline Matching child_proposing(const Market& m, const std::vector<ChildId>& children,
                                const std::vector<char>& home_ok) {
  const auto& env = m.env();
  std::vector<std::size_t> cursor(env.num_children(), 0);
  auto next = [&](std::size_t c) -> std::optional<std::size_t> {
    const ChildId cid{static_cast<std::uint32_t>(c)};
    auto order = m.ranking(cid);
    auto& i = cursor[c];
    while (i < order.size()) {
      const std::uint32_t h = order[i++];
      const HomeId hid{h};
      if (!is_acceptable(m.u(cid, hid))) {
        i = order.size();
        break;
      }
      if (!home_ok[h] || !is_acceptable(m.v(hid, cid))) continue;
      return h;
    }
    return std::nullopt;
  };
  auto prefers = [&](std::size_t h, std::size_t c, std::optional<std::size_t> held) {
    const HomeId hid{static_cast<std::uint32_t>(h)};
    const double vc = m.v(hid, ChildId{static_cast<std::uint32_t>(c)});
    if (!is_acceptable(vc)) return false;
    if (!held) return true;
    return ranks_above(vc, static_cast<std::uint32_t>(c), m.v(hid, ChildId{static_cast<std::uint32_t>(*held)}),
                       static_cast<std::uint32_t>(*held));
  };
  std::vector<std::size_t> proposers;
  proposers.reserve(children.size());
  for (ChildId c : children) proposers.push_back(c.value);
  return to_matching_from_children(deferred_acceptance(std::move(proposers), env.num_homes(), next, prefers));
}

inline std::vector<char> child_flags(const Environment& env, const std::vector<ChildId>& children) {
  std::vector<char> f(env.num_children(), 0);
  for (ChildId c : children) f[c.value] = 1;
  return f;
}

inline std::vector<char> home_flags(const Environment& env, const std::vector<HomeId>& homes) {
  std::vector<char> f(env.num_homes(), 0);
  for (HomeId h : homes) f[h.value] = 1;
  return f;
}

}  // namespace detail

// V_h^k(mu_k(h)) for h's most recent offer, if it has one.
inline std::optional<double> prior_offer_value(const Market& m, const MarketState& s, HomeId h) {
  const auto& last = s.last_offer[h.value];
  if (!last) return std::nullopt;
  return m.v_at(h, last->child, last->period);
}

inline StepResult seq_da_step(const Market& m, const MarketState& s, bool home_proposing = true) {
  const auto& env = m.env();
  auto children = s.active_children(env);
  auto homes = s.active_homes(env);
  if (home_proposing) {
    auto ok = detail::child_flags(env, children);
    return {detail::home_proposing(m, homes, ok, [](HomeId, ChildId) { return true; }), {}, {}};
  }
  return {detail::child_proposing(m, children, detail::home_flags(env, homes)), {}, {}};
}

// p_h^t: h would now be offered something better than its last declined offer.
inline bool hpda_truncated(const Market& m, const MarketState& s, HomeId h) {
  auto bound = prior_offer_value(m, s, h);
  if (!bound || s.t <= 1) return false;
  const auto& env = m.env();
  for (std::uint32_t c : m.ranking(h)) {
    const ChildId cid{c};
    if (!s.is_active(env, cid) || !is_acceptable(m.u(cid, h))) continue;
    return m.v_at(h, cid, s.t) > *bound;
  }
  return false;
}

inline StepResult hpda_step(const Market& m, const MarketState& s) {
  const auto& env = m.env();
  StepResult out;
  std::vector<HomeId> proposers;
  for (HomeId h : s.active_homes(env)) {
    if (hpda_truncated(m, s, h))
      out.truncated.push_back(h);
    else
      proposers.push_back(h);
  }
  auto ok = detail::child_flags(env, s.active_children(env));
  out.offers = detail::home_proposing(m, proposers, ok, [](HomeId, ChildId) { return true; });
  return out;
}

inline StepResult crda_step(const Market& m, const MarketState& s) {
  const auto& env = m.env();
  auto children = s.active_children(env);
  auto homes = s.active_homes(env);
  auto home_ok = detail::home_flags(env, homes);
  StepResult out;
  out.offers = detail::child_proposing(m, children, home_ok);
  if (s.t <= 1) return out;

  std::vector<std::optional<double>> bound(env.num_homes());
  bool triggered = false;
  for (HomeId h : homes) {
    bound[h.value] = prior_offer_value(m, s, h);
    if (!bound[h.value]) continue;
    if (auto c = out.offers.partner(h); c && m.v_at(h, *c, s.t) > *bound[h.value]) triggered = true;
  }
  if (!triggered) return out;

  RotationTrace trace;
  std::vector<char> candidate(env.num_children(), 0);
  for (ChildId c : children) {
    const auto mine = out.offers.partner(c);
    const double current = mine ? m.u(c, *mine) : 0.0;
    bool flag = !mine;
    if (!flag) {
      for (HomeId h : homes) {
        if (is_acceptable(m.v(h, c)) && m.u(c, h) > current) {
          flag = true;
          break;
        }
      }
    }
    if (!flag && bound[mine->value] && m.v_at(*mine, c, s.t) > *bound[mine->value]) flag = true;
    if (flag) {
      candidate[c.value] = 1;
      trace.candidates.push_back(c);
    }
  }
  for (HomeId h : homes) {
    auto c = out.offers.partner(h);
    if (!c || candidate[c->value]) trace.homes.push_back(h);
  }
  for (ChildId c : trace.candidates) {
    bool keep = true;
    for (HomeId h : trace.homes) {
      if (!is_acceptable(m.u(c, h)) || !bound[h.value]) continue;
      if (m.v_at(h, c, s.t) > *bound[h.value]) {
        keep = false;
        break;
      }
    }
    if (keep) trace.rotated.push_back(c);
  }

  std::vector<Edge> edges;
  for (const auto& e : out.offers.edges())
    if (!candidate[e.child.value]) edges.push_back(e);
  auto rotation = detail::child_proposing(m, trace.rotated, detail::home_flags(env, trace.homes));
  for (const auto& e : rotation.edges()) edges.push_back(e);
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.home < b.home; });
  out.offers = Matching(std::move(edges));
  out.rotation = std::move(trace);
  return out;
}

// Endowment eligibility: the discounted value (undiscounted for HEDA*) must
// lie in the interval for the home's waiting age.
inline bool heda_eligible(const Market& m, const EndowmentSchedule& schedule, bool discounted, HomeId h, ChildId c,
                          Period t) {
  if (!is_acceptable(m.v(h, c))) return false;
  const int age = t - m.env().homes[h.value].arrival;
  return schedule.contains(age, discounted ? m.v_at(h, c, t) : m.v(h, c));
}

inline StepResult heda_step(const Market& m, const MarketState& s, const EndowmentSchedule& schedule,
                            bool discounted = true) {
  const auto& env = m.env();
  auto ok = detail::child_flags(env, s.active_children(env));
  auto eligible = [&](HomeId h, ChildId c) { return heda_eligible(m, schedule, discounted, h, c, s.t); };
  return {detail::home_proposing(m, s.active_homes(env), ok, eligible), {}, {}};
}

inline StepResult mechanism_step(const Market& m, const MechanismSpec& spec, const MarketState& s) {
  switch (spec.kind) {
    case MechanismKind::SeqDAHome: return seq_da_step(m, s, true);
    case MechanismKind::SeqDAChild: return seq_da_step(m, s, false);
    case MechanismKind::HPDA: return hpda_step(m, s);
    case MechanismKind::CRDA: return crda_step(m, s);
    case MechanismKind::HEDA:
    case MechanismKind::HEDAStar:
      if (!spec.schedule) throw std::invalid_argument("endowment mechanism run without a schedule");
      return heda_step(m, s, *spec.schedule, spec.kind == MechanismKind::HEDA);
  }
  throw std::logic_error("unknown mechanism");
}

}  // namespace dynmatch
