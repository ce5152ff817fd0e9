#include <gtest/gtest.h>

#include "flexbid/evaluation.hpp"
#include "support/instances.hpp"

using namespace flexbid;

namespace {

FrequencyMinute fm(double lo, double hi) { return {Minute{0}, lo, hi}; }

PriceRecord price(int hour, double up, double down) { return {start_of(Day{0}) + hour * 60, up, down}; }

std::vector<FlexTriple> flat(FlexTriple f, int n = 60) { return std::vector<FlexTriple>(n, f); }

}  // namespace

TEST(Activation, DroopExamples) {
  auto a = activation_from_frequency(fm(50.0, 50.0));
  EXPECT_EQ(a.up, 0.0);
  EXPECT_EQ(a.down, 0.0);
  EXPECT_EQ(activation_from_frequency(fm(49.5, 50.0)).up, 1.0);
  EXPECT_NEAR(activation_from_frequency(fm(49.7, 50.0)).up, 0.5, 1e-12);
  EXPECT_EQ(activation_from_frequency(fm(49.0, 50.0)).up, 1.0);
  EXPECT_NEAR(activation_from_frequency(fm(50.0, 50.3)).down, 0.5, 1e-12);
  // Both bands touched in one minute: the stronger deviation wins.
  a = activation_from_frequency(fm(49.8, 50.4));
  EXPECT_EQ(a.up, 0.0);
  EXPECT_NEAR(a.down, 0.75, 1e-12);
  EXPECT_THROW(activation_from_frequency(fm(50.2, 50.1)), DataError);
}

TEST(EvaluateHour, ZeroBid) {
  const auto ev = evaluate_hour(Bid{0, 0, 3}, flat({1, 2, 2}), ActivationSignal::quiet(60), price(3, 100, 100), {},
                                LerMask::base());
  EXPECT_EQ(ev.p_up, 0.0);
  EXPECT_EQ(ev.p_down, 0.0);
  EXPECT_EQ(ev.profit, 0.0);
  EXPECT_EQ(ev.overbid_minutes(), 0);
}

TEST(EvaluateHour, UpwardShortfallFixture) {
  const Bid bid{1.0, 5.0, 0};
  const auto ev = evaluate_hour(bid, flat({1.9, 100, 100}), ActivationSignal::quiet(60), price(0, 10, 10), {},
                                LerMask::base());
  EXPECT_NEAR(ev.p_up, 0.1, 1e-15);
  EXPECT_EQ(ev.p_down, 0.0);
  EXPECT_NEAR(ev.profit, 1e-3 * (1.0 * 10 + 5.0 * 10 - 5.0 * 10 * 0.1), 1e-12);
  EXPECT_EQ(ev.overbid_minutes(), 60);
}

TEST(EvaluateHour, DownwardShortfallUsesEnergyLimit) {
  const Bid bid{0.0, 8.0, 0};
  auto realized = flat({10, 9, 9});
  realized[17] = {10, 9, 6.5};  // energy short by 1.5
  realized[40] = {10, 7, 7};    // power short by 1.0
  const auto ev = evaluate_hour(bid, realized, ActivationSignal::quiet(60), price(0, 30, 20), {}, LerMask::base());
  EXPECT_EQ(ev.p_down, 1.5);
  EXPECT_EQ(ev.overbid_minutes(), 2);
  EXPECT_NEAR(ev.profit, 1e-3 * (8.0 * 20 - 5.0 * 20 * 1.5), 1e-12);
  // Without the energy limit only the power shortfall remains.
  const auto relaxed =
      evaluate_hour(bid, realized, ActivationSignal::quiet(60), price(0, 30, 20), {}, LerMask::energy_relaxation());
  EXPECT_EQ(relaxed.p_down, 1.0);
  EXPECT_EQ(relaxed.overbid_minutes(), 1);
}

TEST(EvaluateHour, ActivationEnergyAndWeighting) {
  const Bid bid{6.0, 0.0, 0};
  ActivationSignal sig = ActivationSignal::quiet(60);
  sig.a_up[5] = 0.5;
  sig.a_up[6] = 1.0;
  auto realized = flat({10, 0, 0});
  realized[5] = {4, 0, 0};  // shortfall 2 at half activation
  const auto plain = evaluate_hour(bid, realized, sig, price(0, 10, 10), {}, LerMask::base());
  EXPECT_NEAR(plain.activation_energy_up, 1.5 * 6.0 / 60.0, 1e-15);
  EXPECT_EQ(plain.p_up, 2.0);
  PenaltyPricing weighted;
  weighted.activation_weighted = true;
  const auto w = evaluate_hour(bid, realized, sig, price(0, 10, 10), weighted, LerMask::base());
  EXPECT_EQ(w.p_up, 1.0);
}

TEST(EvaluateHour, Errors) {
  EXPECT_THROW(evaluate_hour(Bid{}, flat({1, 1, 1}), ActivationSignal::quiet(59), price(0, 1, 1), {}, LerMask::base()),
               HourMismatch);
  EXPECT_THROW(evaluate_hour(Bid{0, 0, 2}, flat({1, 1, 1}), ActivationSignal::quiet(60), price(3, 1, 1), {},
                             LerMask::base()),
               HourMismatch);
  PenaltyPricing bad;
  bad.multiplier = -1;
  EXPECT_THROW(evaluate_hour(Bid{}, flat({1, 1, 1}), ActivationSignal::quiet(60), price(0, 1, 1), bad, LerMask::base()),
               ConfigError);
}

TEST(EvaluateHour, PenaltiesMonotoneInBid) {
  Rng rng(4);
  const auto s = instances::random_set(rng, 1, 60);
  std::vector<FlexTriple> realized(s.values.begin(), s.values.end());
  double prev_up = 0, prev_down = 0;
  for (double scale = 0.0; scale <= 3.0; scale += 0.25) {
    const Bid bid{scale * 2.0, scale * 4.0, 0};
    const auto ev = evaluate_hour(bid, realized, ActivationSignal::quiet(60), price(0, 5, 5), {}, LerMask::base());
    EXPECT_GE(ev.p_up, prev_up);
    EXPECT_GE(ev.p_down, prev_down);
    prev_up = ev.p_up, prev_down = ev.p_down;
  }
}

TEST(EvaluateHour, OracleBidHasNoPenalty) {
  Rng rng(6);
  const LerMask masks[] = {LerMask::base(), LerMask::upwards_relaxation(), LerMask::energy_relaxation()};
  for (int t = 0; t < 200; ++t) {
    const auto s = instances::random_set(rng, 1, 60);
    const auto& mask = masks[t % 3];
    const auto bid = oracle_bid(s.values, mask);
    const auto ev = evaluate_hour(bid, s.values, ActivationSignal::quiet(60), price(0, 7, 9), {}, mask);
    EXPECT_EQ(ev.p_up, 0.0);
    EXPECT_EQ(ev.p_down, 0.0);
    EXPECT_EQ(ev.overbid_minutes(), 0);
  }
}

TEST(OverbidCounter, Frequency) {
  OverbidCounter c;
  const int H = 7;
  int k = 0;
  for (int h = 0; h < H; ++h) {
    HourEvaluation ev;
    ev.overbid_flags.assign(60, 0);
    for (int m = 0; m < h * 3; ++m) ev.overbid_flags[m] = 1;
    k += h * 3;
    c.add(ev);
  }
  EXPECT_DOUBLE_EQ(c.frequency(), static_cast<double>(k) / (H * 60));
  EXPECT_EQ(OverbidCounter{}.frequency(), 0.0);
}

TEST(Utilization, Examples) {
  const auto realized = flat({4, 8, 8});
  UtilizationAccumulator full;
  full.add(Bid{4, 8}, realized);
  EXPECT_DOUBLE_EQ(*full.overall(), 1.0);
  EXPECT_DOUBLE_EQ(*full.up(), 1.0);
  UtilizationAccumulator zero;
  zero.add(Bid{}, realized);
  EXPECT_DOUBLE_EQ(*zero.overall(), 0.0);
  const auto r48 = flat({18, 30, 30});
  std::vector<std::pair<Bid, std::span<const FlexTriple>>> hours{{Bid{2, 10}, r48}, {Bid{6, 6}, r48}};
  EXPECT_DOUBLE_EQ(*utilized_capacity(hours), 0.25);
  UtilizationAccumulator none;
  none.add(Bid{}, flat({0, 0, 0}));
  EXPECT_FALSE(none.overall());
}

TEST(Compliance, Thresholds) {
  EXPECT_EQ(p90_compliance(0.0389), Compliance::Compliant);
  EXPECT_EQ(p90_compliance(0.10), Compliance::Compliant);
  EXPECT_EQ(p90_compliance(0.1015), Compliance::BufferZone);
  EXPECT_EQ(p90_compliance(0.15), Compliance::BufferZone);
  EXPECT_EQ(p90_compliance(0.151), Compliance::Excluded);
  EXPECT_THROW(p90_compliance(1.5), ConfigError);
  EXPECT_EQ(compliance_name(Compliance::BufferZone), "BufferZone");
}
