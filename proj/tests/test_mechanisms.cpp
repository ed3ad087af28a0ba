#include <gtest/gtest.h>

#include "dynmatch/dynamics.hpp"
#include "dynmatch/mechanisms.hpp"
#include "fixtures.hpp"

using namespace dynmatch;

TEST(SeqDa, E1FirstPeriodOffersH1C1) {
  auto f = fixture("E1");
  Market m(f.env);
  auto s = MarketState::initial(f.env);
  auto step = seq_da_step(m, s);
  EXPECT_EQ(step.offers, Matching({{child_named(f.env, "c1"), home_named(f.env, "h1")}}));
}

TEST(SeqDa, E1SecondPeriodAfterDecline) {
  auto f = fixture("E1");
  auto hist = run_mechanism(f.env, make_spec(MechanismKind::SeqDAHome, f.env), scripted(f.script));
  ASSERT_EQ(hist.periods.size(), 2u);
  auto c1 = child_named(f.env, "c1");
  auto c2 = child_named(f.env, "c2");
  auto h1 = home_named(f.env, "h1");
  auto h2 = home_named(f.env, "h2");
  EXPECT_EQ(hist.at(1).offers, Matching({{c1, h1}}));
  EXPECT_EQ(hist.at(2).offers, Matching({{c2, h1}, {c1, h2}}));
  EXPECT_DOUBLE_EQ(total_child_waiting_cost(hist, f.env), 2.0);
}

TEST(SeqDa, AlwaysAcceptOnE1PlacesBoth) {
  auto f = fixture("E1");
  auto hist = run_mechanism(f.env, make_spec(MechanismKind::SeqDAHome, f.env), always_accept);
  EXPECT_EQ(hist.at(1).offers.size(), 1u);
  EXPECT_EQ(hist.at(2).offers, Matching({{child_named(f.env, "c2"), home_named(f.env, "h2")}}));
  EXPECT_EQ(hist.accepted_homes(2).size(), 2u);
}

TEST(SeqDa, EmptyPeriodGivesEmptyMatching) {
  Environment env;
  env.horizon = 2;
  env.children = {Child{ChildId{0}, 2}};
  env.homes = {Home{HomeId{0}, 2}};
  env.prefs.child_utility = UtilityMatrix(1, 1, 1.0);
  env.prefs.home_true_utility = UtilityMatrix(1, 1, 1.0);
  env.prefs.home_observed_utility = env.prefs.home_true_utility;
  auto hist = run_mechanism(env, make_spec(MechanismKind::SeqDAHome, env), always_accept);
  EXPECT_TRUE(hist.at(1).offers.empty());
  EXPECT_EQ(hist.at(2).offers.size(), 1u);
}

TEST(Hpda, E2TruncatesAtTwoNotThree) {
  auto f = fixture("E2");
  Market m(f.env);
  auto h = home_named(f.env, "h");
  auto c1 = child_named(f.env, "c1");
  auto s = MarketState::initial(f.env);
  EXPECT_FALSE(hpda_truncated(m, s, h));
  Decision decline[] = {{h, Action::Decline}};
  s = advance(f.env, s, Matching({{c1, h}}), decline);
  EXPECT_TRUE(hpda_truncated(m, s, h));
  auto step2 = hpda_step(m, s);
  EXPECT_TRUE(step2.offers.empty());
  EXPECT_EQ(step2.truncated, std::vector<HomeId>{h});

  s = advance(f.env, s, step2.offers, {});
  EXPECT_FALSE(hpda_truncated(m, s, h));
  EXPECT_EQ(hpda_step(m, s).offers, Matching({{child_named(f.env, "c2"), h}}));
}

TEST(Hpda, ScriptedE2OffersAtOneAndThree) {
  auto f = fixture("E2");
  auto hist = run_mechanism(f.env, make_spec(MechanismKind::HPDA, f.env), scripted(f.script));
  ASSERT_EQ(hist.periods.size(), 3u);
  EXPECT_EQ(hist.at(1).offers.size(), 1u);
  EXPECT_TRUE(hist.at(2).offers.empty());
  EXPECT_EQ(hist.at(3).offers.size(), 1u);
  EXPECT_EQ(hist.acceptance_period(home_named(f.env, "h")), 3);
}

TEST(Hpda, CompliantRunEqualsSequentialDa) {
  for (const char* name : {"E1", "E2", "E3"}) {
    auto f = fixture(name);
    auto a = run_mechanism(f.env, make_spec(MechanismKind::HPDA, f.env), always_accept);
    auto b = run_mechanism(f.env, make_spec(MechanismKind::SeqDAHome, f.env), always_accept);
    for (Period t = 1; t <= f.env.horizon; ++t) EXPECT_EQ(a.at(t).offers, b.at(t).offers) << name << " t=" << t;
  }
}

TEST(Crda, E1RotationAfterDecline) {
  auto f = fixture("E1");
  auto hist = run_mechanism(f.env, make_spec(MechanismKind::CRDA, f.env), scripted(f.script));
  auto c1 = child_named(f.env, "c1");
  auto c2 = child_named(f.env, "c2");
  auto h1 = home_named(f.env, "h1");
  auto h2 = home_named(f.env, "h2");
  EXPECT_EQ(hist.at(1).offers, Matching({{c1, h1}}));
  EXPECT_EQ(hist.at(2).offers, Matching({{c1, h2}}));
  ASSERT_TRUE(hist.at(2).rotation);
  EXPECT_EQ(hist.at(2).rotation->candidates, std::vector<ChildId>{c2});
  EXPECT_EQ(hist.at(2).rotation->homes, std::vector<HomeId>{h1});
  EXPECT_TRUE(hist.at(2).rotation->rotated.empty());
}

TEST(Crda, NoPriorOfferMeansChildProposingDa) {
  auto f = fixture("E1");
  auto a = run_mechanism(f.env, make_spec(MechanismKind::CRDA, f.env), always_accept);
  auto b = run_mechanism(f.env, make_spec(MechanismKind::SeqDAChild, f.env), always_accept);
  EXPECT_EQ(a.at(1).offers, b.at(1).offers);
  EXPECT_EQ(a.at(2).offers, b.at(2).offers);
  EXPECT_FALSE(a.at(2).rotation);
}

TEST(Endowment, BuildsCoarseThenFine) {
  auto s = build_endowment_schedule(100, 4, 25, 4, 6);
  ASSERT_EQ(s.intervals.size(), 6u);
  EXPECT_EQ(s.intervals[0], (EndowmentInterval{75, 100}));
  EXPECT_EQ(s.intervals[1], (EndowmentInterval{50, 75}));
  EXPECT_EQ(s.intervals[2], (EndowmentInterval{25, 50}));
  EXPECT_EQ(s.intervals[3], (EndowmentInterval{0, 25}));
  EXPECT_EQ(s.intervals[4], (EndowmentInterval{-4, 0}));
  EXPECT_EQ(s.intervals[5], (EndowmentInterval{-8, -4}));
  EXPECT_DOUBLE_EQ(s.floor, -8);
  EXPECT_TRUE(s.contains(0, 100));
  EXPECT_FALSE(s.contains(1, 75));
  EXPECT_TRUE(s.contains(9, -8));
  EXPECT_FALSE(s.contains(9, -7));

  auto one = build_endowment_schedule(100, 4, 25, 4, 1);
  EXPECT_EQ(one.intervals.size(), 1u);
  EXPECT_THROW(build_endowment_schedule(100, 0, 25, 4, 4), std::invalid_argument);
  EXPECT_THROW(build_endowment_schedule(100, 4, -25, 4, 4), std::invalid_argument);
  EXPECT_THROW(build_endowment_schedule(100, 4, 20, 4, 4), std::invalid_argument);
}

TEST(Heda, ArrivalMonthEligibility) {
  EndowmentSchedule s{{{75, 100}}, 75};
  Environment env;
  env.horizon = 1;
  env.children = {Child{ChildId{0}, 1}, Child{ChildId{1}, 1}, Child{ChildId{2}, 1}};
  env.homes = {Home{HomeId{0}, 1}};
  env.prefs.child_utility = UtilityMatrix(3, 1, 1.0);
  env.prefs.home_true_utility = UtilityMatrix(1, 3);
  env.prefs.home_true_utility(0, 0) = 80;
  env.prefs.home_true_utility(0, 1) = 70;
  env.prefs.home_true_utility(0, 2) = kUnacceptable;
  env.prefs.home_observed_utility = env.prefs.home_true_utility;
  Market m(env);
  EXPECT_TRUE(heda_eligible(m, s, true, HomeId{0}, ChildId{0}, 1));
  EXPECT_FALSE(heda_eligible(m, s, true, HomeId{0}, ChildId{1}, 1));
  EXPECT_FALSE(heda_eligible(m, s, true, HomeId{0}, ChildId{2}, 1));
}

TEST(Heda, E3WithFixtureSchedule) {
  auto f = fixture("E3");
  ASSERT_TRUE(f.schedule);
  MechanismSpec spec{MechanismKind::HEDA, f.schedule};
  auto hist = run_mechanism(f.env, spec, always_accept);
  EXPECT_TRUE(hist.at(1).offers.empty());
  // V_h^2(c1) = 1/2 lies in [1/2, 3/2); V_h^2(c2) = 3/2 does not.
  EXPECT_EQ(hist.at(2).offers, Matching({{child_named(f.env, "c1"), home_named(f.env, "h")}}));
}

TEST(Heda, StarUsesUndiscountedValues) {
  auto f = fixture("E3");
  MechanismSpec spec{MechanismKind::HEDAStar, f.schedule};
  auto hist = run_mechanism(f.env, spec, always_accept);
  // Undiscounted: V(c1) = 1 is outside [3/2, 2] at t=1, and inside [1/2, 3/2) at t=2.
  EXPECT_TRUE(hist.at(1).offers.empty());
  EXPECT_EQ(hist.at(2).offers, Matching({{child_named(f.env, "c1"), home_named(f.env, "h")}}));
}

TEST(Spec, ScheduleRequiredExactlyForEndowmentKinds) {
  auto f = fixture("E1");
  EXPECT_THROW((MechanismSpec{MechanismKind::HEDA, std::nullopt}.validate()), std::invalid_argument);
  EXPECT_THROW((MechanismSpec{MechanismKind::HPDA, default_endowment_schedule(f.env)}.validate()),
               std::invalid_argument);
  EXPECT_EQ(parse_mechanism("SeqDA"), MechanismKind::SeqDAHome);
  EXPECT_EQ(parse_mechanism("heda*"), MechanismKind::HEDAStar);
  EXPECT_FALSE(parse_mechanism("rsd"));
}
