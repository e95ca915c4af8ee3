#include <cmath>

#include <gtest/gtest.h>

#include "levybsde/error.hpp"
#include "levybsde/pricing.hpp"

using namespace levybsde;

namespace {

MarketSpec meixner_market() {
  MarketSpec m{LevyModel::meixner(MeixnerParams{0.5, 0.0, 1.0, 0.0}), Vector::Constant(1, 100.0), 0.05, 1.0};
  m.model = m.model.with_drift(risk_neutral_drift(m.model));
  return m;
}

PideGridSpec coarse() {
  PideGridSpec g;
  g.nodes = 401;
  return g;
}

}  // namespace

TEST(Pricing, MartingaleResidualVanishesAfterRiskNeutralDrift) {
  EXPECT_LT(std::abs(check_martingale_condition(meixner_market().model)[0]), 1e-6);
  EXPECT_EQ(check_martingale_condition(LevyModel::pure_drift(Vector::Zero(1)))[0], 0.0);
}

TEST(Pricing, ConstantPayoffMc) {
  const auto m = meixner_market();
  const auto res = price_mc(m, Payoff::make_custom([](std::span<const double>) { return 90.0; }, 0.0), 1000, 1);
  EXPECT_NEAR(res.price, 90.0 * std::exp(-0.05), 1e-12);
  EXPECT_EQ(res.stderr_, 0.0);
}

TEST(Pricing, ConstantPayoffPideDiscountsExactly) {
  const auto m = meixner_market();
  const auto res = price_pide(m, Payoff::make_custom([](std::span<const double>) { return 90.0; }, 0.0), coarse());
  for (double t : {0.0, 0.5, 1.0}) {
    const double S[1] = {87.0};
    EXPECT_NEAR(res.value(t, S), 90.0 * std::exp(-0.05 * (1.0 - t)), 1e-8);
  }
}

TEST(Pricing, PideParity) {
  const auto m = meixner_market();
  const auto c = price_pide(m, Payoff::call(0, 100.0), coarse());
  const auto p = price_pide(m, Payoff::put(0, 100.0), coarse());
  EXPECT_LT(std::abs(c.price - p.price - (100.0 - 100.0 * std::exp(-0.05))), 0.5);
}

TEST(Pricing, McParityOnSharedPaths) {
  const auto m = meixner_market();
  const auto res = price_mc(m, {Payoff::call(0, 100.0), Payoff::put(0, 100.0)}, 20000, 5);
  EXPECT_LT(std::abs(res[0].price - res[1].price - (100.0 - 100.0 * std::exp(-0.05))), 0.5);
}

TEST(Pricing, CallNonincreasingInStrike) {
  const auto m = meixner_market();
  double prev_pide = INFINITY, prev_mc = INFINITY;
  std::vector<Payoff> ladder;
  for (double K : {80.0, 90.0, 100.0, 110.0, 120.0}) ladder.push_back(Payoff::call(0, K));
  const auto mc = price_mc(m, ladder, 10000, 9);
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const double pide = price_pide(m, ladder[i], coarse()).price;
    EXPECT_LE(pide, prev_pide);
    EXPECT_LE(mc[i].price, prev_mc);
    prev_pide = pide;
    prev_mc = mc[i].price;
  }
}

TEST(Pricing, DiscountedStockIsMartingale) {
  const auto m = meixner_market();
  const auto res = discounted_stock_mc(m, 0, 20000, 13);
  EXPECT_LT(std::abs(res.price - 100.0), 3 * res.stderr_);
}

TEST(Pricing, PideAgreesWithMc) {
  const auto m = meixner_market();
  const auto pide = price_pide(m, Payoff::call(0, 100.0));
  const auto mc = price_mc(m, Payoff::call(0, 100.0), 20000, 21);
  EXPECT_LT(std::abs(pide.price - mc.price), std::max(0.01 * mc.price, 3 * mc.stderr_));
}

TEST(Pricing, RejectsNonpositiveSpot) {
  auto m = meixner_market();
  m.S0[0] = 0.0;
  EXPECT_THROW(m.validate(), std::exception);
}

TEST(Pricing, BasketPayoffEvaluation) {
  Vector w(2);
  w << 0.5, 0.5;
  const auto p = Payoff::basket_call(w, 100.0);
  const double S[2] = {90.0, 130.0};
  EXPECT_DOUBLE_EQ(p(S), 10.0);
}
