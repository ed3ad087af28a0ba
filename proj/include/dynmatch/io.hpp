#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dynmatch/mechanisms.hpp"
#include "dynmatch/strategic.hpp"
#include "dynmatch/types.hpp"

namespace dynmatch {

using json = nlohmann::ordered_json;

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

namespace detail {

template <class Names>
std::map<std::string, std::uint32_t> index_names(const Names& names, const char* what) {
  std::map<std::string, std::uint32_t> out;
  for (std::uint32_t i = 0; i < names.size(); ++i)
    if (!out.emplace(names[i], i).second) throw std::invalid_argument(std::string("duplicate ") + what + " name " + names[i]);
  return out;
}

inline std::uint32_t lookup(const std::map<std::string, std::uint32_t>& idx, const std::string& name,
                            const char* what) {
  auto it = idx.find(name);
  if (it == idx.end()) throw std::invalid_argument(std::string("unknown ") + what + " '" + name + "'");
  return it->second;
}

// {"row": {"col": value}}; missing entries stay unacceptable.
inline UtilityMatrix read_table(const json& j, const std::map<std::string, std::uint32_t>& rows,
                                const std::map<std::string, std::uint32_t>& cols, const char* row_what,
                                const char* col_what) {
  UtilityMatrix m(rows.size(), cols.size(), kUnacceptable);
  for (const auto& [rname, row] : j.items())
    for (const auto& [cname, v] : row.items())
      m(lookup(rows, rname, row_what), lookup(cols, cname, col_what)) = v.get<double>();
  return m;
}

inline json write_table(const UtilityMatrix& m, const std::vector<std::string>& rows,
                        const std::vector<std::string>& cols) {
  json j = json::object();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::object();
    for (std::size_t c = 0; c < m.cols(); ++c) row[cols[c]] = m(r, c);
    j[rows[r]] = std::move(row);
  }
  return j;
}

}  // namespace detail

inline Environment environment_from_json(const json& j) {
  Environment env;
  env.horizon = j.at("horizon").get<Period>();
  const auto& costs = j.at("wait_cost");
  env.prefs.child_wait_cost = costs.at("child").get<double>();
  env.prefs.home_wait_cost = costs.at("home").get<double>();

  for (const auto& c : j.at("children")) {
    Child child;
    child.id = ChildId{static_cast<std::uint32_t>(env.children.size())};
    child.arrival = c.at("arrival").get<Period>();
    child.age = c.value("age", 0.0);
    child.high_needs = c.value("high_needs", false);
    env.child_names.push_back(c.value("name", "c" + std::to_string(child.id.value)));
    env.children.push_back(child);
  }
  for (const auto& h : j.at("homes")) {
    Home home;
    home.id = HomeId{static_cast<std::uint32_t>(env.homes.size())};
    home.arrival = h.at("arrival").get<Period>();
    home.accepts_high_needs = h.value("accepts_high_needs", true);
    env.home_names.push_back(h.value("name", "h" + std::to_string(home.id.value)));
    env.homes.push_back(home);
  }
  auto cidx = detail::index_names(env.child_names, "child");
  auto hidx = detail::index_names(env.home_names, "home");
  env.prefs.child_utility = detail::read_table(j.at("child_utility"), cidx, hidx, "child", "home");
  env.prefs.home_true_utility = detail::read_table(j.at("home_utility"), hidx, cidx, "home", "child");
  env.prefs.home_observed_utility =
      j.contains("home_observed_utility")
          ? detail::read_table(j.at("home_observed_utility"), hidx, cidx, "home", "child")
          : env.prefs.home_true_utility;
  env.validate();
  return env;
}

inline json environment_to_json(const Environment& env) {
  std::vector<std::string> cn, hn;
  for (const auto& c : env.children) cn.push_back(env.name(c.id));
  for (const auto& h : env.homes) hn.push_back(env.name(h.id));
  json j;
  j["horizon"] = env.horizon;
  j["wait_cost"] = {{"child", env.prefs.child_wait_cost}, {"home", env.prefs.home_wait_cost}};
  j["children"] = json::array();
  for (const auto& c : env.children)
    j["children"].push_back(
        {{"name", cn[c.id.value]}, {"arrival", c.arrival}, {"age", c.age}, {"high_needs", c.high_needs}});
  j["homes"] = json::array();
  for (const auto& h : env.homes)
    j["homes"].push_back(
        {{"name", hn[h.id.value]}, {"arrival", h.arrival}, {"accepts_high_needs", h.accepts_high_needs}});
  j["child_utility"] = detail::write_table(env.prefs.child_utility, cn, hn);
  j["home_utility"] = detail::write_table(env.prefs.home_true_utility, hn, cn);
  if (env.prefs.home_observed_utility != env.prefs.home_true_utility)
    j["home_observed_utility"] = detail::write_table(env.prefs.home_observed_utility, hn, cn);
  return j;
}

inline Action parse_action(const std::string& s) {
  if (s == "accept") return Action::Accept;
  if (s == "decline") return Action::Decline;
  throw std::invalid_argument("action must be 'accept' or 'decline', got '" + s + "'");
}

inline EndowmentSchedule schedule_from_json(const json& j) {
  EndowmentSchedule s;
  for (const auto& iv : j.at("intervals")) s.intervals.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
  s.floor = j.contains("floor") ? j.at("floor").get<double>() : s.intervals.back().lo;
  s.validate();
  return s;
}

// A scripted environment: the world plus the home actions and report used to
// replay it.
struct Fixture {
  std::string name;
  std::string description;
  Environment env;
  ActionProfile script;
  std::optional<Report> misreport;
  std::optional<HomeId> misreporting_home;
  std::optional<EndowmentSchedule> schedule;
};

inline Fixture fixture_from_json(const json& j) {
  Fixture f;
  f.name = j.value("name", "");
  f.description = j.value("description", "");
  f.env = environment_from_json(j);
  auto cidx = detail::index_names(f.env.child_names, "child");
  auto hidx = detail::index_names(f.env.home_names, "home");
  if (j.contains("script")) {
    for (const auto& a : j.at("script"))
      f.script.set(HomeId{detail::lookup(hidx, a.at("home").get<std::string>(), "home")}, a.at("period").get<Period>(),
                   parse_action(a.at("action").get<std::string>()));
  }
  if (j.contains("misreport")) {
    Report r = truthful_report(f.env.prefs.home_true_utility);
    for (const auto& [hname, row] : j.at("misreport").items()) {
      const auto h = detail::lookup(hidx, hname, "home");
      if (f.misreporting_home) throw std::invalid_argument("misreport may name a single home");
      f.misreporting_home = HomeId{h};
      for (const auto& [cname, v] : row.items()) r.accepts[h][detail::lookup(cidx, cname, "child")] = v.get<bool>();
    }
    f.misreport = std::move(r);
  }
  if (j.contains("schedule")) f.schedule = schedule_from_json(j.at("schedule"));
  return f;
}

inline Fixture load_fixture(const std::filesystem::path& path) { return fixture_from_json(read_json_file(path)); }

}  // namespace dynmatch
