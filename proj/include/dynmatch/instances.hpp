#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "dynmatch/da.hpp"
#include "dynmatch/types.hpp"

namespace dynmatch {

// Random static market. Utilities are multiples of 1/4 so ties occur and the
// id tie-break gets exercised; each entry is unacceptable with probability
// p_unacceptable.
inline ConstructedPreferences random_preferences(std::mt19937_64& rng, std::size_t proposers, std::size_t receivers,
                                                 double p_unacceptable = 0.2) {
  std::uniform_int_distribution<int> quarter(0, 40);
  std::bernoulli_distribution drop(p_unacceptable);
  ConstructedPreferences p;
  p.proposer_ids.resize(proposers);
  p.receiver_ids.resize(receivers);
  std::iota(p.proposer_ids.begin(), p.proposer_ids.end(), 0u);
  std::iota(p.receiver_ids.begin(), p.receiver_ids.end(), 0u);
  p.proposer_utility = UtilityMatrix(proposers, receivers);
  p.receiver_utility = UtilityMatrix(receivers, proposers);
  for (std::size_t i = 0; i < proposers; ++i)
    for (std::size_t j = 0; j < receivers; ++j) p.proposer_utility(i, j) = drop(rng) ? kUnacceptable : quarter(rng) / 4.0;
  for (std::size_t j = 0; j < receivers; ++j)
    for (std::size_t i = 0; i < proposers; ++i) p.receiver_utility(j, i) = drop(rng) ? kUnacceptable : quarter(rng) / 4.0;
  return p;
}

// Calls visit on every n x n market where each agent ranks the whole other
// side strictly: (n!)^(2n) instances.
inline void for_each_permutation_instance(std::size_t n, const std::function<void(const ConstructedPreferences&)>& visit) {
  std::vector<std::vector<std::size_t>> perms;
  std::vector<std::size_t> base(n);
  std::iota(base.begin(), base.end(), std::size_t{0});
  do perms.push_back(base);
  while (std::next_permutation(base.begin(), base.end()));

  ConstructedPreferences p;
  p.proposer_ids.resize(n);
  p.receiver_ids.resize(n);
  std::iota(p.proposer_ids.begin(), p.proposer_ids.end(), 0u);
  std::iota(p.receiver_ids.begin(), p.receiver_ids.end(), 0u);
  p.proposer_utility = UtilityMatrix(n, n);
  p.receiver_utility = UtilityMatrix(n, n);

  std::vector<std::size_t> choice(2 * n, 0);
  for (;;) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t k = 0; k < n; ++k) {
        p.proposer_utility(a, perms[choice[a]][k]) = static_cast<double>(n - k);
        p.receiver_utility(a, perms[choice[n + a]][k]) = static_cast<double>(n - k);
      }
    visit(p);
    std::size_t d = 0;
    while (d < choice.size() && ++choice[d] == perms.size()) choice[d++] = 0;
    if (d == choice.size()) break;
  }
}

struct SmallEnvironmentConfig {
  std::size_t max_children = 6;
  std::size_t max_homes = 6;
  Period max_horizon = 4;
  double p_unacceptable = 0.2;
};

// Random dynamic market with integer-ish utilities and random arrivals.
inline Environment random_environment(std::mt19937_64& rng, const SmallEnvironmentConfig& cfg = {}) {
  std::uniform_int_distribution<std::size_t> nc(1, cfg.max_children), nh(1, cfg.max_homes);
  std::uniform_int_distribution<Period> horizon(1, cfg.max_horizon);
  std::uniform_real_distribution<double> util(0.0, 10.0);
  std::uniform_real_distribution<double> wait(0.1, 2.0);
  std::bernoulli_distribution drop(cfg.p_unacceptable);

  Environment env;
  env.horizon = horizon(rng);
  const auto n_c = nc(rng);
  const auto n_h = nh(rng);
  std::uniform_int_distribution<Period> arrival(1, env.horizon);
  for (std::size_t i = 0; i < n_c; ++i)
    env.children.push_back(Child{ChildId{static_cast<std::uint32_t>(i)}, arrival(rng), 0.0, false});
  for (std::size_t i = 0; i < n_h; ++i)
    env.homes.push_back(Home{HomeId{static_cast<std::uint32_t>(i)}, arrival(rng), true});
  env.prefs.child_utility = UtilityMatrix(n_c, n_h);
  env.prefs.home_true_utility = UtilityMatrix(n_h, n_c);
  for (std::size_t c = 0; c < n_c; ++c)
    for (std::size_t h = 0; h < n_h; ++h) env.prefs.child_utility(c, h) = drop(rng) ? kUnacceptable : util(rng);
  for (std::size_t h = 0; h < n_h; ++h)
    for (std::size_t c = 0; c < n_c; ++c) env.prefs.home_true_utility(h, c) = drop(rng) ? kUnacceptable : util(rng);
  env.prefs.home_observed_utility = env.prefs.home_true_utility;
  env.prefs.child_wait_cost = wait(rng);
  env.prefs.home_wait_cost = wait(rng);
  return env;
}

}  // namespace dynmatch
