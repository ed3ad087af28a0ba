#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dynmatch/types.hpp"

namespace dynmatch {

// Round-based deferred acceptance. Every free proposer proposes in the same
// round; receivers keep the best proposal seen so far.
//
//   next_choice(p) -> std::optional<std::size_t>
//     the next receiver p finds acceptable, advancing p's cursor
//   receiver_prefers(r, p, held) -> bool
//     whether r would hold p over `held` (std::nullopt when r holds nobody)
//
// Returns the proposer held by each receiver.
template <class NextChoice, class ReceiverPrefers>
std::vector<std::optional<std::size_t>> deferred_acceptance(std::vector<std::size_t> free,
                                                            std::size_t num_receivers,
                                                            NextChoice&& next_choice,
                                                            ReceiverPrefers&& receiver_prefers) {
  std::vector<std::optional<std::size_t>> held(num_receivers);
  std::vector<std::pair<std::size_t, std::size_t>> proposals;
  std::vector<std::size_t> next_free;
  std::sort(free.begin(), free.end());

  while (!free.empty()) {
    proposals.clear();
    for (std::size_t p : free)
      if (auto r = next_choice(p)) proposals.emplace_back(p, *r);
    if (proposals.empty()) break;

    next_free.clear();
    for (auto [p, r] : proposals) {
      if (receiver_prefers(r, p, held[r])) {
        if (held[r]) next_free.push_back(*held[r]);
        held[r] = p;
      } else {
        next_free.push_back(p);
      }
    }
    std::sort(next_free.begin(), next_free.end());
    free.swap(next_free);
  }
  return held;
}

// Preferences for one static market. Indices are local; ids break ties.
struct ConstructedPreferences {
  std::vector<std::uint32_t> proposer_ids;
  std::vector<std::uint32_t> receiver_ids;
  UtilityMatrix proposer_utility;  // [proposer][receiver]
  UtilityMatrix receiver_utility;  // [receiver][proposer]

  std::size_t proposers() const noexcept { return proposer_ids.size(); }
  std::size_t receivers() const noexcept { return receiver_ids.size(); }

  bool proposer_prefers(std::size_t p, std::size_t a, std::size_t b) const {
    return ranks_above(proposer_utility(p, a), receiver_ids[a], proposer_utility(p, b), receiver_ids[b]);
  }
  bool receiver_prefers(std::size_t r, std::size_t a, std::size_t b) const {
    return ranks_above(receiver_utility(r, a), proposer_ids[a], receiver_utility(r, b), proposer_ids[b]);
  }
  bool mutually_acceptable(std::size_t p, std::size_t r) const {
    return is_acceptable(proposer_utility(p, r)) && is_acceptable(receiver_utility(r, p));
  }
};

// Assignment seen from both sides; std::nullopt means unmatched.
struct StaticMatching {
  std::vector<std::optional<std::size_t>> of_proposer;
  std::vector<std::optional<std::size_t>> of_receiver;

  static StaticMatching from_proposers(std::vector<std::optional<std::size_t>> of_proposer,
                                       std::size_t receivers) {
    StaticMatching m;
    m.of_receiver.assign(receivers, std::nullopt);
    for (std::size_t p = 0; p < of_proposer.size(); ++p)
      if (of_proposer[p]) m.of_receiver[*of_proposer[p]] = p;
    m.of_proposer = std::move(of_proposer);
    return m;
  }

  friend bool operator==(const StaticMatching&, const StaticMatching&) = default;
};

inline StaticMatching run_da(const ConstructedPreferences& prefs) {
  const auto np = prefs.proposers();
  const auto nr = prefs.receivers();
  std::vector<std::vector<std::size_t>> lists(np);
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t r = 0; r < nr; ++r)
      if (is_acceptable(prefs.proposer_utility(p, r))) lists[p].push_back(r);
    std::sort(lists[p].begin(), lists[p].end(),
              [&](std::size_t a, std::size_t b) { return prefs.proposer_prefers(p, a, b); });
  }
  std::vector<std::size_t> cursor(np, 0);
  auto next = [&](std::size_t p) -> std::optional<std::size_t> {
    if (cursor[p] >= lists[p].size()) return std::nullopt;
    return lists[p][cursor[p]++];
  };
  auto prefers = [&](std::size_t r, std::size_t p, std::optional<std::size_t> held) {
    if (!is_acceptable(prefs.receiver_utility(r, p))) return false;
    return !held || prefs.receiver_prefers(r, p, *held);
  };
  std::vector<std::size_t> all(np);
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto held = deferred_acceptance(std::move(all), nr, next, prefers);
  std::vector<std::optional<std::size_t>> of_proposer(np);
  for (std::size_t r = 0; r < nr; ++r)
    if (held[r]) of_proposer[*held[r]] = r;
  return StaticMatching::from_proposers(std::move(of_proposer), nr);
}

struct BlockingPair {
  // Individual-rationality failures carry only one side.
  std::optional<std::size_t> proposer;
  std::optional<std::size_t> receiver;
  bool individual_rationality = false;
};

struct StabilityResult {
  bool stable = true;
  std::optional<BlockingPair> witness;
  explicit operator bool() const noexcept { return stable; }
};

// Unmatched agents get utility 0.
inline StabilityResult is_stable(const StaticMatching& m, const ConstructedPreferences& prefs) {
  const auto np = prefs.proposers();
  const auto nr = prefs.receivers();
  for (std::size_t p = 0; p < np; ++p) {
    if (auto r = m.of_proposer[p]) {
      if (!is_acceptable(prefs.proposer_utility(p, *r)))
        return {false, BlockingPair{p, std::nullopt, true}};
      if (!is_acceptable(prefs.receiver_utility(*r, p)))
        return {false, BlockingPair{std::nullopt, *r, true}};
    }
  }
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t r = 0; r < nr; ++r) {
      if (!prefs.mutually_acceptable(p, r) || m.of_proposer[p] == r) continue;
      const auto cur_r = m.of_proposer[p];
      const auto cur_p = m.of_receiver[r];
      const bool p_gains = !cur_r || prefs.proposer_prefers(p, r, *cur_r);
      const bool r_gains = !cur_p || prefs.receiver_prefers(r, p, *cur_p);
      if (p_gains && r_gains) return {false, BlockingPair{p, r, false}};
    }
  }
  return {};
}

inline constexpr std::size_t kMaxEnumerationSide = 7;

// Every stable matching, by exhaustive search over partial injections of
// mutually acceptable pairs.
inline std::vector<StaticMatching> enumerate_stable(const ConstructedPreferences& prefs) {
  const auto np = prefs.proposers();
  const auto nr = prefs.receivers();
  if (np > kMaxEnumerationSide || nr > kMaxEnumerationSide)
    throw std::length_error("enumerate_stable is limited to 7 agents per side");

  std::vector<StaticMatching> out;
  std::vector<std::optional<std::size_t>> assign(np);
  std::vector<char> used(nr, 0);

  auto recurse = [&](auto&& self, std::size_t p) -> void {
    if (p == np) {
      auto m = StaticMatching::from_proposers(assign, nr);
      if (is_stable(m, prefs)) out.push_back(std::move(m));
      return;
    }
    assign[p] = std::nullopt;
    self(self, p + 1);
    for (std::size_t r = 0; r < nr; ++r) {
      if (used[r] || !prefs.mutually_acceptable(p, r)) continue;
      used[r] = 1;
      assign[p] = r;
      self(self, p + 1);
      used[r] = 0;
    }
    assign[p] = std::nullopt;
  };
  recurse(recurse, 0);
  return out;
}

// True when every proposer weakly prefers `m` to each matching in `others`.
inline bool is_proposer_optimal(const StaticMatching& m, const std::vector<StaticMatching>& others,
                                const ConstructedPreferences& prefs) {
  for (const auto& other : others) {
    for (std::size_t p = 0; p < prefs.proposers(); ++p) {
      const auto mine = m.of_proposer[p];
      const auto theirs = other.of_proposer[p];
      if (!theirs) continue;
      if (!mine || prefs.proposer_prefers(p, *theirs, *mine)) return false;
    }
  }
  return true;
}

// Swaps sides: receivers become proposers.
inline ConstructedPreferences reversed(const ConstructedPreferences& prefs) {
  return ConstructedPreferences{prefs.receiver_ids, prefs.proposer_ids, prefs.receiver_utility,
                                prefs.proposer_utility};
}

}  // namespace dynmatch
