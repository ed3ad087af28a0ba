#pragma once

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>

#include "dynmatch/io.hpp"
#include "dynmatch/simulation.hpp"

namespace dynmatch {

namespace detail {

inline void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument(std::string(where) + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw std::invalid_argument(std::string("unknown key '") + k + "' in " + where);
}

inline std::pair<int, int> read_range(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument(std::string(what) + " must be [min, max]");
  return {j.at(0).get<int>(), j.at(1).get<int>()};
}

}  // namespace detail

inline GeneratorConfig generator_from_json(const json& j) {
  detail::check_keys(j, "generator",
                     {"horizon", "children_per_month", "homes_per_month", "age", "p_child_high_needs",
                      "p_home_accepts_high_needs", "child_utility_eps", "v_bar", "home_utility_sd", "wait_cost"});
  GeneratorConfig g;
  g.horizon = j.value("horizon", g.horizon);
  if (j.contains("children_per_month"))
    std::tie(g.children_min, g.children_max) = detail::read_range(j.at("children_per_month"), "children_per_month");
  if (j.contains("homes_per_month"))
    std::tie(g.homes_min, g.homes_max) = detail::read_range(j.at("homes_per_month"), "homes_per_month");
  if (j.contains("age")) {
    detail::check_keys(j.at("age"), "age", {"mean", "sd"});
    g.age_mean = j.at("age").value("mean", g.age_mean);
    g.age_sd = j.at("age").value("sd", g.age_sd);
  }
  g.p_child_high_needs = j.value("p_child_high_needs", g.p_child_high_needs);
  g.p_home_accepts_high_needs = j.value("p_home_accepts_high_needs", g.p_home_accepts_high_needs);
  if (j.contains("child_utility_eps")) {
    detail::check_keys(j.at("child_utility_eps"), "child_utility_eps", {"mean", "sd"});
    g.eps_mean = j.at("child_utility_eps").value("mean", g.eps_mean);
    g.eps_sd = j.at("child_utility_eps").value("sd", g.eps_sd);
  }
  g.v_bar = j.value("v_bar", g.v_bar);
  g.delta_sd = j.value("home_utility_sd", g.delta_sd);
  if (j.contains("wait_cost")) {
    detail::check_keys(j.at("wait_cost"), "wait_cost", {"child", "home"});
    g.child_wait_cost = j.at("wait_cost").value("child", g.child_wait_cost);
    g.home_wait_cost = j.at("wait_cost").value("home", g.home_wait_cost);
  }
  g.validate();
  return g;
}

inline NoiseSpec noise_from_json(const json& j) {
  detail::check_keys(j, "noise entry", {"kind", "k"});
  NoiseSpec n;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "none")
    n.kind = NoiseSpec::Kind::None;
  else if (kind == "bias")
    n.kind = NoiseSpec::Kind::Bias;
  else if (kind == "variance")
    n.kind = NoiseSpec::Kind::Variance;
  else
    throw std::invalid_argument("noise kind must be none, bias or variance, got '" + kind + "'");
  n.k = n.kind == NoiseSpec::Kind::None ? 0.0 : j.at("k").get<double>();
  if (n.k < 0.0) throw std::invalid_argument("noise level k must be nonnegative");
  return n;
}

inline HomeBehavior::Kind parse_behavior(const std::string& s) {
  if (s == "best-response") return HomeBehavior::Kind::BestResponseLookahead;
  if (s == "always-accept") return HomeBehavior::Kind::AlwaysAccept;
  throw std::invalid_argument("behavior must be best-response or always-accept, got '" + s + "'");
}

inline ExperimentConfig experiment_config_from_json(const json& j) {
  detail::check_keys(j, "config", {"generator", "mechanisms", "noise", "seeds", "behavior", "report_months", "jobs"});
  ExperimentConfig cfg;
  if (j.contains("generator")) cfg.generator = generator_from_json(j.at("generator"));
  if (j.contains("mechanisms")) {
    cfg.mechanisms.clear();
    for (const auto& m : j.at("mechanisms")) {
      auto k = parse_mechanism(m.get<std::string>());
      if (!k) throw std::invalid_argument("unknown mechanism '" + m.get<std::string>() + "'");
      cfg.mechanisms.push_back(*k);
    }
  }
  if (j.contains("noise")) {
    cfg.noise.clear();
    for (const auto& n : j.at("noise")) cfg.noise.push_back(noise_from_json(n));
  }
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("behavior")) cfg.behavior = parse_behavior(j.at("behavior").get<std::string>());
  cfg.report_months = j.value("report_months", cfg.report_months);
  cfg.jobs = j.value("jobs", cfg.jobs);
  if (cfg.mechanisms.empty()) throw std::invalid_argument("config lists no mechanisms");
  if (cfg.noise.empty()) throw std::invalid_argument("config lists no noise cells");
  if (cfg.seeds.empty()) throw std::invalid_argument("config lists no seeds");
  if (cfg.report_months == 0) throw std::invalid_argument("report_months must be positive");
  return cfg;
}

}  // namespace dynmatch
