#include <gtest/gtest.h>

#include <map>

#include "dynmatch/report.hpp"
#include "dynmatch/simulation.hpp"
#include "fixtures.hpp"

using namespace dynmatch;

TEST(Generator, SameSeedSameMarket) {
  GeneratorConfig cfg;
  auto a = generate_environment(cfg, 11);
  auto b = generate_environment(cfg, 11);
  EXPECT_EQ(a.prefs.home_true_utility, b.prefs.home_true_utility);
  EXPECT_EQ(a.prefs.child_utility, b.prefs.child_utility);
  EXPECT_NE(generate_environment(cfg, 12).prefs.child_utility, a.prefs.child_utility);
}

TEST(Generator, ArrivalsAndValuesInRange) {
  GeneratorConfig cfg;
  auto env = generate_environment(cfg, 3);
  EXPECT_NO_THROW(env.validate());
  EXPECT_EQ(env.horizon, 24);
  std::map<Period, int> kids, homes;
  for (const auto& c : env.children) {
    ++kids[c.arrival];
    EXPECT_GE(c.age, 0.0);
    EXPECT_LE(c.age, 18.0);
  }
  for (const auto& h : env.homes) ++homes[h.arrival];
  for (Period t = 1; t <= 24; ++t) {
    EXPECT_GE(kids[t], 15);
    EXPECT_LE(kids[t], 20);
    EXPECT_GE(homes[t], 12);
    EXPECT_LE(homes[t], 15);
  }
  for (const auto& c : env.children)
    for (const auto& h : env.homes) {
      const double u = env.child_utility(c.id, h.id);
      EXPECT_GE(u, 0.0);
      EXPECT_LE(u, 1.0);
      const bool compatible = !c.high_needs || h.accepts_high_needs;
      if (!compatible) EXPECT_DOUBLE_EQ(env.home_utility(h.id, c.id, UtilityView::True), kUnacceptable);
    }
  EXPECT_DOUBLE_EQ(env.prefs.child_wait_cost, 14000.0 / 12.0);
  EXPECT_DOUBLE_EQ(env.prefs.home_wait_cost, 4.0);
}

TEST(Generator, AgeValueEndpoints) {
  EXPECT_DOUBLE_EQ(age_value(100, 0), 100);
  EXPECT_DOUBLE_EQ(age_value(100, 18), 0);
  EXPECT_DOUBLE_EQ(age_value(100, 9), 75);
}

TEST(Generator, RejectsBadConfig) {
  GeneratorConfig cfg;
  cfg.children_min = 5;
  cfg.children_max = 4;
  EXPECT_THROW(generate_environment(cfg, 1), std::invalid_argument);
}

TEST(Noise, NoneIsIdentity) {
  UtilityMatrix m(3, 4, 50.0);
  EXPECT_EQ(apply_noise(m, {NoiseSpec::Kind::None, 0.0}, 100, 1), m);
  EXPECT_EQ(apply_noise(m, {NoiseSpec::Kind::Variance, 0.0}, 100, 1), m);
}

TEST(Noise, KeepsAcceptabilityAndFloorsAtZero) {
  UtilityMatrix m(20, 20, 5.0);
  for (std::size_t i = 0; i < 20; ++i) m(i, i) = kUnacceptable;
  auto out = apply_noise(m, {NoiseSpec::Kind::Bias, 0.5}, 100, 9);
  for (std::size_t h = 0; h < 20; ++h)
    for (std::size_t c = 0; c < 20; ++c) {
      if (h == c)
        EXPECT_DOUBLE_EQ(out(h, c), kUnacceptable);
      else
        EXPECT_DOUBLE_EQ(out(h, c), 0.0);  // 5 - 50 floors at 0
    }
}

TEST(Noise, CalibrationMatchesNominalLevels) {
  for (double k : {0.1, 0.25, 0.5}) {
    auto b = calibrate_noise({NoiseSpec::Kind::Bias, k}, 100, 100, 100, 5);
    EXPECT_LT(b.rmse_rel_error(), 0.05);
    EXPECT_LT(b.mean_rel_error(), 0.02);
    auto v = calibrate_noise({NoiseSpec::Kind::Variance, k}, 100, 100, 100, 5);
    EXPECT_LT(v.rmse_rel_error(), 0.05);
  }
}

TEST(Noise, RmseOfKnownTables) {
  UtilityMatrix a(1, 2, 0.0), b(1, 2, 0.0);
  b(0, 0) = 3;
  b(0, 1) = -4;
  EXPECT_DOUBLE_EQ(empirical_rmse(a, b), std::sqrt(12.5));
  EXPECT_DOUBLE_EQ(mean_error(a, b), -0.5);
  EXPECT_THROW(empirical_rmse(a, UtilityMatrix(2, 1)), std::invalid_argument);
}

TEST(Noise, SeedDependsOnCell) {
  EXPECT_EQ(noise_seed(4, {NoiseSpec::Kind::Bias, 0.1}), noise_seed(4, {NoiseSpec::Kind::Bias, 0.1}));
  EXPECT_NE(noise_seed(4, {NoiseSpec::Kind::Bias, 0.1}), noise_seed(4, {NoiseSpec::Kind::Variance, 0.1}));
  EXPECT_NE(noise_seed(4, {NoiseSpec::Kind::Bias, 0.1}), noise_seed(5, {NoiseSpec::Kind::Bias, 0.1}));
}

TEST(Metrics, EnvyShareOnHandBuiltE1Period) {
  auto f = fixture("E1");
  auto c1 = child_named(f.env, "c1"), c2 = child_named(f.env, "c2");
  auto h1 = home_named(f.env, "h1"), h2 = home_named(f.env, "h2");
  History hist;
  PeriodRecord p1;
  p1.t = 1;
  p1.active_children = {c1};
  p1.active_homes = {h1};
  hist.periods.push_back(p1);
  PeriodRecord p2;
  p2.t = 2;
  p2.active_children = {c1, c2};
  p2.active_homes = {h1, h2};
  p2.offers = Matching({{c1, h1}, {c2, h2}});
  p2.decisions = {{h1, Action::Accept}, {h2, Action::Accept}};
  hist.periods.push_back(p2);

  auto r = compute_metrics(hist, f.env);
  ASSERT_EQ(r.months(), 2u);
  EXPECT_EQ(r.placements, (std::vector<double>{0, 2}));
  EXPECT_EQ(r.cumulative_placements, (std::vector<double>{0, 2}));
  EXPECT_EQ(r.envy_share, (std::vector<double>{0, 1}));  // both homes prefer the other's child, who agrees
  EXPECT_EQ(r.waste, (std::vector<double>{1, 0}));
  EXPECT_DOUBLE_EQ(r.waiting_cost[0], f.env.prefs.child_wait_cost);
  EXPECT_DOUBLE_EQ(r.waiting_cost[1], 0.0);
  EXPECT_DOUBLE_EQ(r.non_disruption[1], (1.0 + 1.0) / 2);
}

TEST(Metrics, StableOffersCarryNoEnvy) {
  auto f = fixture("E1");
  auto hist = run_mechanism(f.env, make_spec(MechanismKind::SeqDAHome, f.env), scripted(f.script));
  auto r = compute_metrics(hist, f.env);
  EXPECT_EQ(r.envy_share, (std::vector<double>{0, 0}));
  EXPECT_EQ(r.placements, (std::vector<double>{0, 2}));
}

TEST(Metrics, TeenAndHighNeedsShares) {
  auto f = fixture("E2");
  f.env.children[0].age = 14;
  f.env.children[1].high_needs = true;
  auto hist = run_mechanism(f.env, make_spec(MechanismKind::SeqDAHome, f.env), always_accept);
  auto r = compute_metrics(hist, f.env);
  EXPECT_EQ(r.teen_placed, (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(r.high_needs_placed, (std::vector<double>{0, 0, 0}));
}

TEST(Metrics, WindowMean) {
  EXPECT_DOUBLE_EQ(window_mean({1, 2, 3, 4}, 2), 1.5);
  EXPECT_DOUBLE_EQ(window_mean({1, 2}, 5), 1.5);
  EXPECT_DOUBLE_EQ(window_mean({}, 3), 0.0);
}

namespace {

ExperimentConfig small_experiment() {
  ExperimentConfig cfg;
  cfg.generator.horizon = 6;
  cfg.generator.children_min = 4;
  cfg.generator.children_max = 6;
  cfg.generator.homes_min = 3;
  cfg.generator.homes_max = 5;
  cfg.noise = {{NoiseSpec::Kind::None, 0.0}, {NoiseSpec::Kind::Bias, 0.25}, {NoiseSpec::Kind::Variance, 0.25}};
  cfg.seeds = {1, 2};
  cfg.report_months = 4;
  return cfg;
}

}  // namespace

TEST(Experiment, NoiselessHpdaAndCrdaPlaceAlike) {
  auto r = run_experiment(small_experiment());
  const auto* none = r.cell({NoiseSpec::Kind::None, 0.0});
  ASSERT_NE(none, nullptr);
  EXPECT_EQ(none->by_seed[1][0].placements, none->by_seed[2][0].placements);
  EXPECT_EQ(none->by_seed[1][1].placements, none->by_seed[2][1].placements);
  for (std::size_t m = 0; m < 3; ++m)
    for (double e : none->mean[m].envy_share) EXPECT_EQ(e, 0.0);
}

TEST(Experiment, OutputIsByteIdenticalAcrossRunsAndThreadCounts) {
  auto cfg = small_experiment();
  auto a = run_experiment(cfg);
  cfg.jobs = 3;
  auto b = run_experiment(cfg);
  EXPECT_EQ(summary_csv(a), summary_csv(b));
  for (std::size_t i = 0; i < a.cells.size(); ++i)
    EXPECT_EQ(cell_csv(a.cells[i], a.config.seeds), cell_csv(b.cells[i], b.config.seeds));
}

TEST(Experiment, SummaryLayout) {
  auto r = run_experiment(small_experiment());
  auto csv = summary_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "table,metric,mechanism,k_0,k_25");
  EXPECT_NE(csv.find("\nbias,placements,seqda-home,"), std::string::npos);
  EXPECT_NE(csv.find("\nvariance,waste,heda,"), std::string::npos);
  auto cell = cell_csv(r.cells[0], r.config.seeds);
  EXPECT_EQ(cell.substr(0, cell.find('\n')),
            "month,mechanism,seed,placements,cumulative_placements,waiting_cost,envy_share,waste,teen_placed,"
            "high_needs_placed,non_disruption");
  // 6 months x 4 mechanisms x (2 seeds + mean) rows plus the header
  EXPECT_EQ(std::count(cell.begin(), cell.end(), '\n'), 1 + 6 * 4 * 3);
}

TEST(Experiment, RejectsEmptySeedList) {
  auto cfg = small_experiment();
  cfg.seeds.clear();
  EXPECT_THROW(run_experiment(cfg), std::invalid_argument);
}
