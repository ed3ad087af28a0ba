#include <gtest/gtest.h>

#include "dynmatch/market.hpp"
#include "fixtures.hpp"

using namespace dynmatch;

namespace {

Environment one_pair(double v, double w_h, Period horizon) {
  Environment env;
  env.horizon = horizon;
  env.children = {Child{ChildId{0}, 1}};
  env.homes = {Home{HomeId{0}, 1}};
  env.prefs.child_utility = UtilityMatrix(1, 1, 1.0);
  env.prefs.home_true_utility = UtilityMatrix(1, 1, v);
  env.prefs.home_observed_utility = env.prefs.home_true_utility;
  env.prefs.child_wait_cost = 2.0;
  env.prefs.home_wait_cost = w_h;
  return env;
}

}  // namespace

TEST(DiscountedUtility, HomeLosesWaitCostPerPeriod) {
  auto f = fixture("E1");
  const auto& env = f.env;
  auto h1 = home_named(env, "h1");
  auto c2 = child_named(env, "c2");
  EXPECT_DOUBLE_EQ(discounted_home_utility(env, h1, c2, 2), 1.5);
  EXPECT_DOUBLE_EQ(discounted_home_utility(env, h1, c2, 1), 2.0);

  auto single = one_pair(7.25, 4.0, 4);
  EXPECT_DOUBLE_EQ(discounted_home_utility(single, HomeId{0}, ChildId{0}, 4), -4.75);
}

TEST(DiscountedUtility, ChildMirror) {
  auto f = fixture("E1");
  const auto& env = f.env;
  EXPECT_DOUBLE_EQ(discounted_child_utility(env, child_named(env, "c1"), home_named(env, "h2"), 2), -0.5);

  auto single = one_pair(1.0, 4.0, 2);
  single.prefs.child_wait_cost = 14000.0 / 12.0;
  EXPECT_NEAR(discounted_child_utility(single, ChildId{0}, HomeId{0}, 2), 1.0 - 14000.0 / 12.0, 1e-9);
  EXPECT_DOUBLE_EQ(discounted_child_utility(single, ChildId{0}, HomeId{0}, 1), 1.0);
}

TEST(DiscountedUtility, RejectsPeriodBeforeArrivalAndUnknownPair) {
  auto f = fixture("E1");
  EXPECT_THROW(discounted_home_utility(f.env, home_named(f.env, "h2"), ChildId{0}, 1), std::invalid_argument);
  EXPECT_THROW(discounted_home_utility(f.env, HomeId{0}, ChildId{9}, 1), std::out_of_range);
}

TEST(Advance, AcceptRemovesBothDeclineKeepsBoth) {
  auto f = fixture("E2");
  const auto& env = f.env;
  auto h = home_named(env, "h");
  auto c1 = child_named(env, "c1");
  auto s = MarketState::initial(env);
  Matching mu({{c1, h}});

  Decision accept[] = {{h, Action::Accept}};
  auto next = advance(env, s, mu, accept);
  EXPECT_EQ(next.t, 2);
  EXPECT_FALSE(next.is_active(env, h));
  EXPECT_FALSE(next.is_active(env, c1));
  EXPECT_EQ(next.active_children(env), std::vector<ChildId>{child_named(env, "c2")});

  Decision decline[] = {{h, Action::Decline}};
  next = advance(env, s, mu, decline);
  EXPECT_TRUE(next.is_active(env, h));
  EXPECT_TRUE(next.is_active(env, c1));
  EXPECT_EQ(next.active_children(env).size(), 2u);
  ASSERT_TRUE(next.last_offer[h.value]);
  EXPECT_EQ(next.last_offer[h.value]->period, 1);
  EXPECT_EQ(next.last_offer[h.value]->child, c1);
}

TEST(Advance, EmptyMatchingOnlyAddsArrivals) {
  auto f = fixture("E1");
  auto s = MarketState::initial(f.env);
  EXPECT_EQ(s.active_children(f.env).size(), 1u);
  auto next = advance(f.env, s, Matching{}, {});
  EXPECT_EQ(next.active_children(f.env).size(), 2u);
  EXPECT_EQ(next.active_homes(f.env).size(), 2u);
}

TEST(Advance, ContractViolations) {
  auto f = fixture("E1");
  const auto& env = f.env;
  auto s = MarketState::initial(env);
  auto h1 = home_named(env, "h1");
  auto h2 = home_named(env, "h2");
  auto c1 = child_named(env, "c1");
  Decision stray[] = {{h1, Action::Accept}};
  EXPECT_THROW(advance(env, s, Matching{}, stray), std::invalid_argument);
  EXPECT_THROW(advance(env, s, Matching({{c1, h2}}), {}), std::invalid_argument);
  EXPECT_THROW(advance(env, s, Matching({{c1, h1}}), {}), std::invalid_argument);
}

TEST(MatchingType, OneToOne) {
  Matching m;
  m.add(ChildId{0}, HomeId{1});
  EXPECT_THROW(m.add(ChildId{0}, HomeId{2}), std::invalid_argument);
  EXPECT_THROW(m.add(ChildId{3}, HomeId{1}), std::invalid_argument);
  EXPECT_EQ(m.partner(HomeId{1}), ChildId{0});
  EXPECT_EQ(m.partner(ChildId{0}), HomeId{1});
  EXPECT_FALSE(m.partner(HomeId{0}));
}

TEST(Counterfactual, DeclinesBeforeAcceptsAt) {
  ActionProfile a;
  HomeId h{0}, other{1};
  a.set(h, 1, Action::Accept);
  a.set(other, 1, Action::Decline);
  auto cf = counterfactual_profile(a, h, 3);
  EXPECT_EQ(cf.action(h, 1), Action::Decline);
  EXPECT_EQ(cf.action(h, 2), Action::Decline);
  EXPECT_EQ(cf.action(h, 3), Action::Accept);
  EXPECT_EQ(cf.action(other, 1), Action::Decline);
  EXPECT_EQ(cf.action(other, 2), Action::Accept);
}

TEST(WaitingCost, CountsUnplacedActivePeriods) {
  auto env = one_pair(1.0, 1.0, 3);
  History idle;
  auto s = MarketState::initial(env);
  for (int t = 1; t <= 3; ++t) {
    PeriodRecord r;
    r.t = t;
    r.active_children = s.active_children(env);
    idle.periods.push_back(r);
    s = advance(env, s, Matching{}, {});
  }
  EXPECT_DOUBLE_EQ(total_child_waiting_cost(idle, env), 6.0);

  History placed;
  PeriodRecord r;
  r.t = 1;
  r.active_children = {ChildId{0}};
  r.offers = Matching({{ChildId{0}, HomeId{0}}});
  r.decisions = {{HomeId{0}, Action::Accept}};
  placed.periods.push_back(r);
  EXPECT_DOUBLE_EQ(total_child_waiting_cost(placed, env), 0.0);
}

TEST(MarketRanking, TieBreaksTowardsLowerId) {
  Environment env;
  env.horizon = 1;
  env.children = {Child{ChildId{0}, 1}, Child{ChildId{1}, 1}, Child{ChildId{2}, 1}};
  env.homes = {Home{HomeId{0}, 1}};
  env.prefs.child_utility = UtilityMatrix(3, 1, 1.0);
  env.prefs.home_true_utility = UtilityMatrix(1, 3, 5.0);
  env.prefs.home_true_utility(0, 0) = 4.0;
  env.prefs.home_observed_utility = env.prefs.home_true_utility;
  Market m(env);
  auto r = m.ranking(HomeId{0});
  EXPECT_EQ(std::vector<std::uint32_t>(r.begin(), r.end()), (std::vector<std::uint32_t>{1, 2, 0}));
}
