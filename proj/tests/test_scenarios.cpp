#include <gtest/gtest.h>

#include <set>

#include "flexbid/scenarios.hpp"

using namespace flexbid;

namespace {

std::vector<FlexSeries> days(std::size_t n) {
  std::vector<FlexSeries> out(n);
  for (std::size_t d = 0; d < n; ++d) {
    out[d].day = Day{static_cast<std::int32_t>(100 + d)};
    for (int m = 0; m < kMinutesPerDay; ++m)
      out[d].values[m] = {static_cast<double>(d), static_cast<double>(m), static_cast<double>(d + m) / 2.0};
  }
  return out;
}

}  // namespace

TEST(RequiredSamples, PaperValue) { EXPECT_EQ(required_samples({0.1, 0.01, 2}), 216u); }

TEST(RequiredSamples, SingleDimension) {
  // 20 ln 100 + 2 + 20 ln 20 = 154.01...
  EXPECT_EQ(required_samples({0.1, 0.01, 1}), 155u);
}

TEST(RequiredSamples, Monotonicity) {
  EXPECT_GT(required_samples({0.1, 0.01, 3}), required_samples({0.1, 0.01, 2}));
  for (double eps : {0.02, 0.05, 0.1, 0.2, 0.4})
    for (double delta : {0.001, 0.01, 0.1})
      for (int n : {1, 2, 3, 5}) {
        const auto here = required_samples({eps, delta, n});
        EXPECT_GE(here, required_samples({eps * 1.5, delta, n}));
        EXPECT_GE(here, required_samples({eps, delta * 2.0, n}));
        EXPECT_LE(here, required_samples({eps, delta, n + 1}));
      }
  EXPECT_THROW(required_samples({0.0, 0.01, 2}), ConfigError);
  EXPECT_THROW(required_samples({0.1, 1.0, 2}), ConfigError);
  EXPECT_THROW(required_samples({0.1, 0.01, 0}), ConfigError);
}

TEST(BuildScenarios, DistinctDaysAndReferentialConsistency) {
  const auto pool = days(242);
  const auto s = build_scenarios(pool, 7, 216, 123);
  EXPECT_EQ(s.size(), 216u);
  EXPECT_EQ(s.minutes, 60);
  std::set<std::int32_t> distinct;
  for (auto d : s.source_days) distinct.insert(d.index);
  EXPECT_EQ(distinct.size(), 216u);
  for (std::size_t w = 0; w < s.size(); ++w) {
    const auto& src = pool[static_cast<std::size_t>(s.source_days[w].index - 100)];
    auto row = s.row(w);
    for (int m = 0; m < 60; ++m) EXPECT_EQ(row[m], src.values[7 * 60 + m]);
  }
  double total = 0.0;
  for (std::size_t w = 0; w < s.size(); ++w) total += s.weight();
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(BuildScenarios, ExhaustiveDrawAndErrors) {
  const auto pool = days(10);
  const auto s = build_scenarios(pool, 0, 10, 5);
  std::set<std::int32_t> all;
  for (auto d : s.source_days) all.insert(d.index);
  EXPECT_EQ(all.size(), 10u);
  try {
    build_scenarios(pool, 0, 11, 5);
    FAIL();
  } catch (const InsufficientTrainingDays& e) {
    EXPECT_EQ(e.available(), 10u);
    EXPECT_EQ(e.requested(), 11u);
  }
  EXPECT_THROW(build_scenarios(pool, 24, 3, 5), HourMismatch);
}

TEST(BuildScenarios, DeterministicGivenSeed) {
  const auto pool = days(50);
  EXPECT_EQ(build_scenarios(pool, 3, 20, 8).source_days, build_scenarios(pool, 3, 20, 8).source_days);
  EXPECT_NE(build_scenarios(pool, 3, 20, 8).source_days, build_scenarios(pool, 3, 20, 9).source_days);
}

TEST(ConditionalCdf, Basics) {
  const std::vector<double> v{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(conditional_cdf(v, 2.5), 0.5);
  EXPECT_DOUBLE_EQ(conditional_cdf(v, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(conditional_cdf(v, 4.0), 1.0);
  const std::vector<double> same{3, 3, 3};
  EXPECT_DOUBLE_EQ(conditional_cdf(same, 3.0), 1.0);
  EXPECT_THROW(conditional_cdf(std::vector<double>{}, 1.0), EmptyInput);
}

TEST(DumpScenarios, Format) {
  const auto s = ScenarioSet::from_rows(4, {{{1, 2, 1.5}}, {{0.25, 3, 3}}});
  EXPECT_EQ(dump_scenarios(s),
            "hour,scenario,minute,f_up_kw,f_down_kw,f_energy_kw\n4,0,0,1,2,1.5\n4,1,0,0.25,3,3\n");
}
