#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dynmatch {

struct ChildId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(ChildId, ChildId) = default;
};

struct HomeId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(HomeId, HomeId) = default;
};

// Months are numbered 1..T.
using Period = int;

inline constexpr double kUnacceptable = -1.0;

// Any negative utility marks the counterpart as unacceptable.
constexpr bool is_acceptable(double utility) noexcept { return utility >= 0.0; }

// Strict order used everywhere a ranking is needed: higher utility first,
// equal utilities broken towards the lower id.
constexpr bool ranks_above(double utility_a, std::uint32_t id_a, double utility_b,
                           std::uint32_t id_b) noexcept {
  return utility_a > utility_b || (utility_a == utility_b && id_a < id_b);
}

struct Child {
  ChildId id;
  Period arrival = 1;
  double age = 0.0;
  bool high_needs = false;
};

struct Home {
  HomeId id;
  Period arrival = 1;
  bool accepts_high_needs = true;
};

// Dense row-major matrix of utilities.
class UtilityMatrix {
 public:
  UtilityMatrix() = default;
  UtilityMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }

  double at(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) throw std::out_of_range("utility lookup outside table");
    return data_[r * cols_ + c];
  }
  double& at(std::size_t r, std::size_t c) {
    if (r >= rows_ || c >= cols_) throw std::out_of_range("utility lookup outside table");
    return data_[r * cols_ + c];
  }

  const std::vector<double>& values() const noexcept { return data_; }

  friend bool operator==(const UtilityMatrix&, const UtilityMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class UtilityView { Observed, True };

struct PreferenceTable {
  UtilityMatrix child_utility;          // [child][home], U_c(h)
  UtilityMatrix home_true_utility;      // [home][child], the home's own valuation
  UtilityMatrix home_observed_utility;  // [home][child], what the matchmaker uses
  double child_wait_cost = 1.0;
  double home_wait_cost = 1.0;

  friend bool operator==(const PreferenceTable&, const PreferenceTable&) = default;
};

// A complete deterministic world. Child and home ids equal their index.
struct Environment {
  Period horizon = 1;
  std::vector<Child> children;
  std::vector<Home> homes;
  PreferenceTable prefs;
  std::vector<std::string> child_names;  // optional display labels
  std::vector<std::string> home_names;

  std::size_t num_children() const noexcept { return children.size(); }
  std::size_t num_homes() const noexcept { return homes.size(); }

  const Child& child(ChildId c) const { return children.at(c.value); }
  const Home& home(HomeId h) const { return homes.at(h.value); }

  double child_utility(ChildId c, HomeId h) const { return prefs.child_utility.at(c.value, h.value); }

  double home_utility(HomeId h, ChildId c, UtilityView view = UtilityView::Observed) const {
    return view == UtilityView::Observed ? prefs.home_observed_utility.at(h.value, c.value)
                                         : prefs.home_true_utility.at(h.value, c.value);
  }

  std::string name(ChildId c) const {
    if (c.value < child_names.size() && !child_names[c.value].empty()) return child_names[c.value];
    return "c" + std::to_string(c.value);
  }
  std::string name(HomeId h) const {
    if (h.value < home_names.size() && !home_names[h.value].empty()) return home_names[h.value];
    return "h" + std::to_string(h.value);
  }

  std::vector<ChildId> child_arrivals(Period t) const {
    std::vector<ChildId> out;
    for (const auto& c : children)
      if (c.arrival == t) out.push_back(c.id);
    return out;
  }
  std::vector<HomeId> home_arrivals(Period t) const {
    std::vector<HomeId> out;
    for (const auto& h : homes)
      if (h.arrival == t) out.push_back(h.id);
    return out;
  }

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    for (std::size_t i = 0; i < children.size(); ++i) {
      const auto& c = children[i];
      if (c.id.value != i) throw std::invalid_argument("child ids must equal their index");
      if (c.arrival < 1 || c.arrival > horizon)
        throw std::invalid_argument("child arrival outside [1, T]");
      if (!(c.age >= 0.0 && c.age <= 18.0)) throw std::invalid_argument("child age outside [0, 18]");
    }
    for (std::size_t i = 0; i < homes.size(); ++i) {
      const auto& h = homes[i];
      if (h.id.value != i) throw std::invalid_argument("home ids must equal their index");
      if (h.arrival < 1 || h.arrival > horizon)
        throw std::invalid_argument("home arrival outside [1, T]");
    }
    const auto nc = children.size();
    const auto nh = homes.size();
    if (prefs.child_utility.rows() != nc || prefs.child_utility.cols() != nh)
      throw std::invalid_argument("child utility table does not cover every pair");
    if (prefs.home_true_utility.rows() != nh || prefs.home_true_utility.cols() != nc)
      throw std::invalid_argument("true home utility table does not cover every pair");
    if (prefs.home_observed_utility.rows() != nh || prefs.home_observed_utility.cols() != nc)
      throw std::invalid_argument("observed home utility table does not cover every pair");
    if (!(prefs.child_wait_cost > 0.0) || !(prefs.home_wait_cost > 0.0))
      throw std::invalid_argument("waiting costs must be positive");
  }
};

struct Edge {
  ChildId child;
  HomeId home;
  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

// One period's partial one-to-one assignment. Edges are kept sorted by home.
class Matching {
 public:
  Matching() = default;
  explicit Matching(std::vector<Edge> edges) {
    for (const auto& e : edges) add(e.child, e.home);
  }

  void add(ChildId c, HomeId h) {
    for (const auto& e : edges_)
      if (e.child == c || e.home == h) throw std::invalid_argument("matching must be one-to-one");
    auto pos = std::lower_bound(edges_.begin(), edges_.end(), h,
                                [](const Edge& e, HomeId key) { return e.home < key; });
    edges_.insert(pos, Edge{c, h});
  }

  std::optional<ChildId> partner(HomeId h) const {
    auto pos = std::lower_bound(edges_.begin(), edges_.end(), h,
                                [](const Edge& e, HomeId key) { return e.home < key; });
    if (pos != edges_.end() && pos->home == h) return pos->child;
    return std::nullopt;
  }
  std::optional<HomeId> partner(ChildId c) const {
    for (const auto& e : edges_)
      if (e.child == c) return e.home;
    return std::nullopt;
  }

  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return edges_.empty(); }

  friend bool operator==(const Matching&, const Matching&) = default;

 private:
  std::vector<Edge> edges_;
};

enum class Action : std::uint8_t { Decline = 0, Accept = 1 };

// Accept/decline choices keyed by (home, period). Periods without an entry
// read as Accept.
class ActionProfile {
 public:
  void set(HomeId h, Period t, Action a) { entries_[{h, t}] = a; }

  std::optional<Action> get(HomeId h, Period t) const {
    auto it = entries_.find({h, t});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  Action action(HomeId h, Period t) const { return get(h, t).value_or(Action::Accept); }

  const std::map<std::pair<HomeId, Period>, Action>& entries() const noexcept { return entries_; }

  friend bool operator==(const ActionProfile&, const ActionProfile&) = default;

 private:
  std::map<std::pair<HomeId, Period>, Action> entries_;
};

}  // namespace dynmatch
