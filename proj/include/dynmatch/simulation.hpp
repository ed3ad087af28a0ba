#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dynmatch/dynamics.hpp"
#include "dynmatch/market.hpp"
#include "dynmatch/mechanisms.hpp"
#include "dynmatch/strategic.hpp"
#include "dynmatch/types.hpp"

namespace dynmatch {

struct GeneratorConfig {
  Period horizon = 24;
  int children_min = 15, children_max = 20;  // arrivals per month, inclusive
  int homes_min = 12, homes_max = 15;
  double age_mean = 8.0, age_sd = 4.0;
  double p_child_high_needs = 1.0 / 3.0;
  double p_home_accepts_high_needs = 1.0 / 5.0;
  double eps_mean = 0.3, eps_sd = 0.1;  // U = clamp(1 - eps, 0, 1)
  double v_bar = 100.0;
  double delta_sd = 10.0;
  double child_wait_cost = 14000.0 / 12.0;
  double home_wait_cost = 4.0;

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (children_min < 0 || children_min > children_max) throw std::invalid_argument("bad children-per-month bounds");
    if (homes_min < 0 || homes_min > homes_max) throw std::invalid_argument("bad homes-per-month bounds");
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(p_child_high_needs) || !prob(p_home_accepts_high_needs))
      throw std::invalid_argument("probabilities must lie in [0, 1]");
    if (!(age_sd > 0.0) || !(eps_sd > 0.0) || !(delta_sd > 0.0)) throw std::invalid_argument("sds must be positive");
    if (!(child_wait_cost > 0.0) || !(home_wait_cost > 0.0)) throw std::invalid_argument("waiting costs must be positive");
    if (!(v_bar > 0.0)) throw std::invalid_argument("v_bar must be positive");
  }
};

// Age value: v_bar at birth, 0 at 18.
inline double age_value(double v_bar, double age) { return v_bar - v_bar * (age / 18.0) * (age / 18.0); }

inline Environment generate_environment(const GeneratorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> n_children(cfg.children_min, cfg.children_max);
  std::uniform_int_distribution<int> n_homes(cfg.homes_min, cfg.homes_max);
  std::normal_distribution<double> age(cfg.age_mean, cfg.age_sd);
  std::bernoulli_distribution child_hn(cfg.p_child_high_needs);
  std::bernoulli_distribution home_hn(cfg.p_home_accepts_high_needs);
  std::normal_distribution<double> eps(cfg.eps_mean, cfg.eps_sd);
  std::normal_distribution<double> delta(0.0, cfg.delta_sd);

  Environment env;
  env.horizon = cfg.horizon;
  for (Period t = 1; t <= cfg.horizon; ++t) {
    const int nc = n_children(rng);
    for (int i = 0; i < nc; ++i) {
      Child c;
      c.id = ChildId{static_cast<std::uint32_t>(env.children.size())};
      c.arrival = t;
      c.age = std::clamp(age(rng), 0.0, 18.0);
      c.high_needs = child_hn(rng);
      env.children.push_back(c);
    }
    const int nh = n_homes(rng);
    for (int i = 0; i < nh; ++i) {
      Home h;
      h.id = HomeId{static_cast<std::uint32_t>(env.homes.size())};
      h.arrival = t;
      h.accepts_high_needs = home_hn(rng);
      env.homes.push_back(h);
    }
  }
  const auto nc = env.num_children();
  const auto nh = env.num_homes();
  env.prefs.child_utility = UtilityMatrix(nc, nh);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t h = 0; h < nh; ++h) env.prefs.child_utility(c, h) = std::clamp(1.0 - eps(rng), 0.0, 1.0);
  env.prefs.home_true_utility = UtilityMatrix(nh, nc);
  for (std::size_t h = 0; h < nh; ++h)
    for (std::size_t c = 0; c < nc; ++c) {
      const double d = delta(rng);
      const bool compatible = !env.children[c].high_needs || env.homes[h].accepts_high_needs;
      env.prefs.home_true_utility(h, c) = compatible ? age_value(cfg.v_bar, env.children[c].age) + d : kUnacceptable;
    }
  env.prefs.home_observed_utility = env.prefs.home_true_utility;
  env.prefs.child_wait_cost = cfg.child_wait_cost;
  env.prefs.home_wait_cost = cfg.home_wait_cost;
  return env;
}

struct NoiseSpec {
  enum class Kind { None, Bias, Variance };
  Kind kind = Kind::None;
  double k = 0.0;  // fraction of v_bar

  std::string label() const {
    const auto pct = std::to_string(static_cast<int>(std::lround(k * 100)));
    switch (kind) {
      case Kind::None: return "none";
      case Kind::Bias: return "bias-" + pct;
      case Kind::Variance: return "variance-" + pct;
    }
    return "?";
  }
  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

// Observed = true + gamma on acceptable pairs, floored at 0 so noise never
// changes acceptability. Bias: gamma ~ N(-K v_bar, v_bar / 100). Variance:
// gamma ~ N(0, K v_bar).
inline UtilityMatrix apply_noise(const UtilityMatrix& true_home_utility, const NoiseSpec& spec, double v_bar,
                                 std::uint64_t seed) {
  if (spec.k < 0.0) throw std::invalid_argument("noise level must be nonnegative");
  UtilityMatrix out = true_home_utility;
  if (spec.kind == NoiseSpec::Kind::None) return out;
  double mean = 0.0, sd = 0.0;
  if (spec.kind == NoiseSpec::Kind::Bias) {
    mean = -spec.k * v_bar;
    sd = v_bar / 100.0;
  } else {
    sd = spec.k * v_bar;
  }
  if (sd == 0.0 && mean == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gamma(mean, sd > 0.0 ? sd : 1.0);
  for (std::size_t h = 0; h < out.rows(); ++h)
    for (std::size_t c = 0; c < out.cols(); ++c) {
      const double g = sd > 0.0 ? gamma(rng) : mean;
      if (is_acceptable(out(h, c))) out(h, c) = std::max(0.0, out(h, c) + g);
    }
  return out;
}

inline double empirical_rmse(const UtilityMatrix& truth, const UtilityMatrix& observed) {
  if (truth.rows() != observed.rows() || truth.cols() != observed.cols())
    throw std::invalid_argument("rmse needs tables of the same shape");
  const auto& a = truth.values();
  const auto& b = observed.values();
  if (a.empty()) return 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(ss / static_cast<double>(a.size()));
}

inline double mean_error(const UtilityMatrix& truth, const UtilityMatrix& observed) {
  const auto& a = truth.values();
  const auto& b = observed.values();
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += b[i] - a[i];
  return s / static_cast<double>(a.size());
}

struct NoiseCalibration {
  NoiseSpec noise;
  std::size_t pairs = 0;
  double rmse = 0.0;
  double mean_error = 0.0;
  double target_rmse = 0.0;  // K * v_bar
  double target_mean = 0.0;  // -K * v_bar for bias, 0 for variance

  double rmse_rel_error() const {
    return target_rmse > 0 ? std::abs(rmse - target_rmse) / target_rmse : std::abs(rmse - target_rmse);
  }
  double mean_rel_error() const {
    return target_mean != 0 ? std::abs(mean_error - target_mean) / std::abs(target_mean) : std::abs(mean_error);
  }
};

// Noise applied to a rows x cols table whose true values all equal v_bar.
inline NoiseCalibration calibrate_noise(const NoiseSpec& noise, double v_bar, std::size_t rows, std::size_t cols,
                                        std::uint64_t seed) {
  UtilityMatrix truth(rows, cols, v_bar);
  auto observed = apply_noise(truth, noise, v_bar, seed);
  NoiseCalibration out;
  out.noise = noise;
  out.pairs = rows * cols;
  out.rmse = empirical_rmse(truth, observed);
  out.mean_error = dynmatch::mean_error(truth, observed);
  out.target_rmse = noise.kind == NoiseSpec::Kind::None ? 0.0 : noise.k * v_bar;
  out.target_mean = noise.kind == NoiseSpec::Kind::Bias ? -noise.k * v_bar : 0.0;
  return out;
}

inline constexpr double kTeenAge = 13.0;

// One value per month; index 0 is month 1.
struct MetricsReport {
  std::vector<double> placements;
  std::vector<double> cumulative_placements;
  std::vector<double> waiting_cost;
  std::vector<double> envy_share;
  std::vector<double> waste;
  std::vector<double> teen_placed;
  std::vector<double> high_needs_placed;
  std::vector<double> non_disruption;

  static constexpr std::size_t kSeries = 8;

  std::size_t months() const { return placements.size(); }
};

inline const char* const kMetricNames[MetricsReport::kSeries] = {
    "placements", "cumulative_placements", "waiting_cost",       "envy_share",
    "waste",      "teen_placed",           "high_needs_placed", "non_disruption"};

inline std::vector<double>& metric_series(MetricsReport& r, std::size_t i) {
  switch (i) {
    case 0: return r.placements;
    case 1: return r.cumulative_placements;
    case 2: return r.waiting_cost;
    case 3: return r.envy_share;
    case 4: return r.waste;
    case 5: return r.teen_placed;
    case 6: return r.high_needs_placed;
    default: return r.non_disruption;
  }
}

inline const std::vector<double>& metric_series(const MetricsReport& r, std::size_t i) {
  return metric_series(const_cast<MetricsReport&>(r), i);
}

inline MetricsReport compute_metrics(const History& history, const Environment& env) {
  MetricsReport r;
  double cumulative = 0, envious = 0, teen_placed = 0, teen_arrived = 0, hn_placed = 0, hn_arrived = 0;
  double u_sum = 0;
  for (const auto& rec : history.periods) {
    for (const auto& c : env.children) {
      if (c.arrival != rec.t) continue;
      if (c.age >= kTeenAge) ++teen_arrived;
      if (c.high_needs) ++hn_arrived;
    }
    double placed = 0, waiting = 0;
    for (const auto& e : rec.offers.edges()) {
      if (!rec.accepted(e.home)) continue;
      ++placed;
      const auto& c = env.child(e.child);
      if (c.age >= kTeenAge) ++teen_placed;
      if (c.high_needs) ++hn_placed;
      u_sum += env.child_utility(e.child, e.home);

      const double mine = env.home_utility(e.home, e.child, UtilityView::True);
      for (const auto& other : rec.offers.edges()) {
        if (other.child == e.child) continue;
        if (env.home_utility(e.home, other.child, UtilityView::True) > mine &&
            env.child_utility(other.child, e.home) > env.child_utility(other.child, other.home)) {
          ++envious;
          break;
        }
      }
    }
    for (ChildId c : rec.active_children) {
      auto h = rec.offers.partner(c);
      if (!(h && rec.accepted(*h))) waiting += env.prefs.child_wait_cost;
    }
    double idle = 0;
    for (HomeId h : rec.active_homes)
      if (!rec.offers.partner(h)) ++idle;
    cumulative += placed;
    r.placements.push_back(placed);
    r.cumulative_placements.push_back(cumulative);
    r.waiting_cost.push_back(waiting);
    r.envy_share.push_back(cumulative > 0 ? envious / cumulative : 0.0);
    r.waste.push_back(idle);
    r.teen_placed.push_back(teen_arrived > 0 ? teen_placed / teen_arrived : 0.0);
    r.high_needs_placed.push_back(hn_arrived > 0 ? hn_placed / hn_arrived : 0.0);
    r.non_disruption.push_back(cumulative > 0 ? u_sum / cumulative : 0.0);
  }
  return r;
}

// Element-wise mean of reports with the same number of months.
inline MetricsReport average(const std::vector<MetricsReport>& reports) {
  MetricsReport out;
  if (reports.empty()) return out;
  for (std::size_t i = 0; i < MetricsReport::kSeries; ++i) {
    auto& dst = metric_series(out, i);
    dst.assign(metric_series(reports.front(), i).size(), 0.0);
    for (const auto& r : reports) {
      const auto& src = metric_series(r, i);
      if (src.size() != dst.size()) throw std::invalid_argument("cannot average reports of different lengths");
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
    for (auto& v : dst) v /= static_cast<double>(reports.size());
  }
  return out;
}

// Mean of months 1..months (clipped to the series length).
inline double window_mean(const std::vector<double>& series, std::size_t months) {
  const auto n = std::min(months, series.size());
  if (n == 0) return 0.0;
  return std::accumulate(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / static_cast<double>(n);
}

struct ExperimentConfig {
  GeneratorConfig generator;
  std::vector<MechanismKind> mechanisms{MechanismKind::SeqDAHome, MechanismKind::HPDA, MechanismKind::CRDA,
                                        MechanismKind::HEDA};
  std::vector<NoiseSpec> noise{{NoiseSpec::Kind::None, 0.0},      {NoiseSpec::Kind::Bias, 0.10},
                               {NoiseSpec::Kind::Bias, 0.25},     {NoiseSpec::Kind::Bias, 0.50},
                               {NoiseSpec::Kind::Variance, 0.10}, {NoiseSpec::Kind::Variance, 0.25},
                               {NoiseSpec::Kind::Variance, 0.50}};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  HomeBehavior::Kind behavior = HomeBehavior::Kind::BestResponseLookahead;
  std::size_t report_months = 12;
  unsigned jobs = 1;
};

struct CellResult {
  NoiseSpec noise;
  std::vector<MechanismKind> mechanisms;
  std::vector<MetricsReport> mean;                  // per mechanism, averaged over seeds
  std::vector<std::vector<MetricsReport>> by_seed;  // [mechanism][seed]
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<CellResult> cells;

  const CellResult* cell(const NoiseSpec& n) const {
    for (const auto& c : cells)
      if (c.noise == n) return &c;
    return nullptr;
  }
};

// Noise draws depend on the seed and the noise cell only, so every mechanism
// in a cell sees the same observed table.
inline std::uint64_t noise_seed(std::uint64_t seed, const NoiseSpec& n) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(n.kind), static_cast<std::uint32_t>(std::lround(n.k * 1e6))};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (std::uint64_t{out[0]} << 32) | out[1];
}

inline Environment noisy_environment(const Environment& base, const NoiseSpec& n, double v_bar, std::uint64_t seed) {
  Environment env = base;
  env.prefs.home_observed_utility = apply_noise(base.prefs.home_true_utility, n, v_bar, noise_seed(seed, n));
  return env;
}

inline MetricsReport simulate_once(const Environment& env, MechanismKind kind, HomeBehavior::Kind behavior) {
  Market m(env);
  auto spec = make_spec(kind, env);
  return compute_metrics(run_mechanism(m, spec, make_rule(HomeBehavior{behavior, {}})), env);
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) throw std::invalid_argument("experiment needs at least one seed");
  if (cfg.mechanisms.empty()) throw std::invalid_argument("experiment needs at least one mechanism");
  cfg.generator.validate();

  const auto nm = cfg.mechanisms.size();
  const auto ns = cfg.seeds.size();
  const auto nn = cfg.noise.size();
  std::vector<Environment> bases;
  for (auto s : cfg.seeds) bases.push_back(generate_environment(cfg.generator, s));

  std::vector<MetricsReport> results(nn * nm * ns);
  auto work = [&](std::size_t idx) {
    const auto n = idx / (nm * ns);
    const auto mech = idx / ns % nm;
    const auto s = idx % ns;
    auto env = noisy_environment(bases[s], cfg.noise[n], cfg.generator.v_bar, cfg.seeds[s]);
    results[idx] = simulate_once(env, cfg.mechanisms[mech], cfg.behavior);
  };

  const unsigned jobs = std::max(1u, cfg.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < results.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j)
      pool.emplace_back([&, j] {
        try {
          for (std::size_t i; (i = next++) < results.size();) work(i);
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  ExperimentResult out{cfg, {}};
  for (std::size_t n = 0; n < nn; ++n) {
    CellResult cell{cfg.noise[n], cfg.mechanisms, {}, {}};
    for (std::size_t mech = 0; mech < nm; ++mech) {
      std::vector<MetricsReport> runs(results.begin() + static_cast<std::ptrdiff_t>((n * nm + mech) * ns),
                                      results.begin() + static_cast<std::ptrdiff_t>((n * nm + mech + 1) * ns));
      cell.mean.push_back(average(runs));
      cell.by_seed.push_back(std::move(runs));
    }
    out.cells.push_back(std::move(cell));
  }
  return out;
}

}  // namespace dynmatch
