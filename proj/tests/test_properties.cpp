#include <gtest/gtest.h>

#include "dynmatch/instances.hpp"
#include "dynmatch/properties.hpp"
#include "fixtures.hpp"

using namespace dynmatch;

namespace {

// E1 at t=2 with every agent present and the given offers.
PeriodRecord e1_second_period(const Environment& env, std::vector<Edge> offers) {
  PeriodRecord rec;
  rec.t = 2;
  rec.active_children = {child_named(env, "c1"), child_named(env, "c2")};
  rec.active_homes = {home_named(env, "h1"), home_named(env, "h2")};
  rec.offers = Matching(std::move(offers));
  return rec;
}

}  // namespace

TEST(JustifiedEnvy, StraightMatchingOnE1IsBlocked) {
  auto f = fixture("E1");
  Market m(f.env);
  auto c1 = child_named(f.env, "c1"), c2 = child_named(f.env, "c2");
  auto h1 = home_named(f.env, "h1"), h2 = home_named(f.env, "h2");
  auto rec = e1_second_period(f.env, {{c1, h1}, {c2, h2}});
  auto v = check_justified_envy_free(m, rec, EnvyMode::BothMatched);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_TRUE(check_justified_envy_free(m, e1_second_period(f.env, {{c2, h1}, {c1, h2}}), EnvyMode::BothMatched).empty());
}

TEST(JustifiedEnvy, UnmatchedModes) {
  auto f = fixture("E1");
  Market m(f.env);
  auto c1 = child_named(f.env, "c1");
  auto h2 = home_named(f.env, "h2");
  // Only (h2,c1) offered: c2 and h1 idle and mutually acceptable.
  auto rec = e1_second_period(f.env, {{c1, h2}});
  EXPECT_TRUE(check_justified_envy_free(m, rec, EnvyMode::BothMatched).empty());
  // (h1,c2) has both sides unmatched: waste, not envy, in every mode.
  EXPECT_TRUE(check_justified_envy_free(m, rec, EnvyMode::AllowUnmatchedChild).empty());
  EXPECT_TRUE(check_justified_envy_free(m, rec, EnvyMode::AllowUnmatchedHome).empty());
  EXPECT_EQ(idle_pairs(m, rec, ViolationKind::StrictWaste).size(), 1u);
}

TEST(JustifiedEnvy, UnmatchedChildEnviesMatchedHome) {
  auto f = fixture("E1");
  Market m(f.env);
  auto c1 = child_named(f.env, "c1");
  auto h1 = home_named(f.env, "h1");
  // h1 holds c1 but values c2 more; c2 is unmatched and finds h1 acceptable.
  auto rec = e1_second_period(f.env, {{c1, h1}});
  auto v = check_justified_envy_free(m, rec, EnvyMode::AllowUnmatchedChild);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].home, h1);
  EXPECT_EQ(v[0].child, child_named(f.env, "c2"));
  EXPECT_TRUE(check_justified_envy_free(m, rec, EnvyMode::BothMatched).empty());
}

TEST(IndividualRationality, FlagsUnacceptableSide) {
  auto f = fixture("E1");
  f.env.prefs.home_observed_utility(0, 0) = kUnacceptable;
  Market m(f.env);
  auto v = check_individually_rational(m, Matching({{ChildId{0}, HomeId{0}}}), 1);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].detail, "home");
}

TEST(Patience, SequentialDaRewardsWaitingOnE1) {
  auto f = fixture("E1");
  auto v = check_patience_free(f.env, make_spec(MechanismKind::SeqDAHome, f.env), ActionProfile{});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].home, home_named(f.env, "h1"));
  EXPECT_NEAR(v[0].magnitude, 0.5, 1e-9);
}

TEST(Patience, TruncatingMechanismsDoNotOnE1AndE2) {
  for (const char* name : {"E1", "E2"})
    for (auto k : {MechanismKind::HPDA, MechanismKind::CRDA, MechanismKind::HEDA}) {
      auto f = fixture(name);
      Market m(f.env);
      auto spec = make_spec(k, f.env);
      CounterfactualCache cache(m, spec);
      for (const auto& h : reachable_histories(m, spec).histories)
        EXPECT_TRUE(check_patience_free(m, h, cache).empty()) << name << ' ' << to_string(k);
    }
}

TEST(ReachableHistories, E1SequentialDaHasTwo) {
  auto f = fixture("E1");
  Market m(f.env);
  auto set = reachable_histories(m, make_spec(MechanismKind::SeqDAHome, f.env));
  EXPECT_TRUE(set.exhaustive);
  EXPECT_EQ(set.histories.size(), 2u);
}

TEST(ReachableHistories, SamplesPastTheLeafLimit) {
  auto f = fixture("E2");
  Market m(f.env);
  SweepOptions opt;
  opt.max_leaves = 1;
  opt.samples = 5;
  auto set = reachable_histories(m, make_spec(MechanismKind::SeqDAHome, f.env), opt);
  EXPECT_FALSE(set.exhaustive);
  EXPECT_LE(set.histories.size(), 5u);
  EXPECT_FALSE(set.histories.empty());
}

TEST(StrictWaste, SequentialDaNeverLeavesIdlePairs) {
  auto f = fixture("E1");
  Market m(f.env);
  auto spec = make_spec(MechanismKind::SeqDAHome, f.env);
  for (const auto& h : reachable_histories(m, spec).histories) EXPECT_TRUE(check_strictly_non_wasteful(m, h).empty());
}

TEST(WeakWaste, CompliantTruncatingMechanismsOnE1) {
  auto f = fixture("E1");
  Market m(f.env);
  EXPECT_TRUE(check_weakly_non_wasteful(m, make_spec(MechanismKind::HPDA, f.env)).empty());
  EXPECT_TRUE(check_weakly_non_wasteful(m, make_spec(MechanismKind::CRDA, f.env)).empty());
}

TEST(AcceptFirst, DominantUnderHpdaNotUnderSequentialDa) {
  auto f = fixture("E2");
  Market m(f.env);
  auto h = home_named(f.env, "h");
  EXPECT_TRUE(check_accept_first_dominant(m, make_spec(MechanismKind::HPDA, f.env), h).empty());
  auto v = check_accept_first_dominant(m, make_spec(MechanismKind::SeqDAHome, f.env), h);
  ASSERT_FALSE(v.empty());
  EXPECT_NEAR(v[0].magnitude, 0.5, 1e-9);
}

TEST(StrategyProof, E3MisreportPaysUnderTruncationOnly) {
  auto f = fixture("E3");
  auto h = home_named(f.env, "h");
  for (auto k : {MechanismKind::HPDA, MechanismKind::CRDA}) {
    auto v = check_strategy_proof(f.env, make_spec(k, f.env), h);
    ASSERT_FALSE(v.empty()) << to_string(k);
    double best = 0;
    for (const auto& x : v) best = std::max(best, x.magnitude);
    EXPECT_NEAR(best, 0.5, 1e-9);
  }
  auto spec = make_spec(MechanismKind::HEDA, f.env);
  spec.schedule = *f.schedule;
  EXPECT_TRUE(check_strategy_proof(f.env, spec, h).empty());
}

TEST(StrategyProof, SizeGuard) {
  std::mt19937_64 rng(3);
  SmallEnvironmentConfig cfg{11, 1, 1, 0.0};
  Environment env;
  do env = random_environment(rng, cfg);
  while (env.num_children() < 11);
  EXPECT_THROW(check_strategy_proof(env, make_spec(MechanismKind::HEDA, env), HomeId{0}), std::length_error);
}

TEST(HPerfect, SatisfiedWhenEveryHomeCanBeFilled) {
  auto f = fixture("E1");
  Market m(f.env);
  std::vector<ChildId> rc{child_named(f.env, "c2")};
  std::vector<HomeId> rh{home_named(f.env, "h1")};
  EXPECT_TRUE(check_h_perfect_condition(m, rc, rh));
  EXPECT_FALSE(check_h_perfect_condition(m, {}, rh));
  EXPECT_TRUE(check_h_perfect_condition(m, rc, {}));
}
