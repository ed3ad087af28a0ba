#pragma once

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dynmatch/dynamics.hpp"
#include "dynmatch/format.hpp"
#include "dynmatch/io.hpp"
#include "dynmatch/strategic.hpp"

namespace dynmatch {

// A fixture played twice: once with every home accepting and reporting
// truthfully, once with the fixture's deviation (script or misreport).
struct ReplayResult {
  MechanismKind kind;
  MechanismSpec spec;
  History compliant;
  History deviation;
  std::optional<Environment> reported_env;  // set when the deviation is a misreport
  std::optional<HomeId> deviator;
  double compliant_payoff = 0.0;
  double deviation_payoff = 0.0;

  double gain() const { return deviation_payoff - compliant_payoff; }
};

inline MechanismSpec fixture_spec(const Fixture& f, MechanismKind kind) {
  auto spec = make_spec(kind, f.env);
  if (uses_endowment(kind) && f.schedule) spec.schedule = *f.schedule;
  return spec;
}

inline std::optional<HomeId> scripted_home(const ActionProfile& script) {
  for (const auto& [key, a] : script.entries())
    if (a == Action::Decline) return key.first;
  return std::nullopt;
}

inline ReplayResult replay(const Fixture& f, MechanismKind kind) {
  ReplayResult r{kind, fixture_spec(f, kind), {}, {}, std::nullopt, std::nullopt};
  r.compliant = run_mechanism(f.env, r.spec, always_accept);
  if (f.misreport) {
    r.reported_env = with_report(f.env, *f.misreport);
    r.deviation = run_mechanism(*r.reported_env, r.spec, always_accept);
    r.deviator = f.misreporting_home;
  } else {
    r.deviation = run_mechanism(f.env, r.spec, scripted(f.script));
    r.deviator = scripted_home(f.script);
  }
  if (r.deviator) {
    r.compliant_payoff = realized_utility(r.compliant, f.env, *r.deviator);
    r.deviation_payoff = realized_utility(r.deviation, f.env, *r.deviator);
  }
  return r;
}

namespace detail {

template <class Ids>
std::string names(const Environment& env, const Ids& ids) {
  if (ids.empty()) return "-";
  std::string s;
  for (const auto& id : ids) {
    if (!s.empty()) s += ' ';
    s += env.name(id);
  }
  return s;
}

inline void write_history(std::ostringstream& out, const Environment& env, const History& hist) {
  for (const auto& rec : hist.periods) {
    out << "t=" << rec.t << " children " << names(env, rec.active_children) << " homes "
        << names(env, rec.active_homes) << '\n';
    if (!rec.truncated.empty()) out << "  truncated " << names(env, rec.truncated) << '\n';
    if (rec.rotation)
      out << "  rotation candidates " << names(env, rec.rotation->candidates) << " homes "
          << names(env, rec.rotation->homes) << " rotated " << names(env, rec.rotation->rotated) << '\n';
    if (rec.offers.empty()) out << "  no offers\n";
    for (const auto& e : rec.offers.edges()) {
      out << "  offer " << env.name(e.home) << ' ' << env.name(e.child) << " value "
          << format_number(discounted_home_utility(env, e.home, e.child, rec.t, UtilityView::True)) << ' '
          << (rec.accepted(e.home) ? "accept" : "decline") << '\n';
    }
  }
}

}  // namespace detail

inline std::string transcript(const Fixture& f, const ReplayResult& r) {
  std::ostringstream out;
  out << "fixture " << f.name << '\n';
  out << "mechanism " << to_string(r.kind) << '\n';
  if (r.spec.schedule) {
    out << "schedule";
    for (const auto& iv : r.spec.schedule->intervals)
      out << " [" << format_number(iv.lo) << ',' << format_number(iv.hi) << ']';
    out << " floor " << format_number(r.spec.schedule->floor) << '\n';
  }
  out << "compliant\n";
  detail::write_history(out, f.env, r.compliant);
  out << (f.misreport ? "misreport" : "scripted") << '\n';
  detail::write_history(out, f.env, r.deviation);
  if (r.deviator) {
    const auto& name = f.env.name(*r.deviator);
    out << "payoff " << name << " compliant " << format_number(r.compliant_payoff) << " deviation "
        << format_number(r.deviation_payoff) << '\n';
    out << (f.misreport ? "misreport gain " : "patience gain ") << name << ' ' << format_number(r.gain()) << '\n';
  }
  return out.str();
}

}  // namespace dynmatch
