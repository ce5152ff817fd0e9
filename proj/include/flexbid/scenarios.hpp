#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "flexbid/csv.hpp"
#include "flexbid/errors.hpp"
#include "flexbid/flexibility.hpp"
#include "flexbid/random.hpp"

namespace flexbid {

struct SampleComplexityInput {
  double epsilon{0.1};
  double delta{0.01};
  int dim{2};
};

// Smallest N with N >= (2/eps) ln(1/delta) + 2n + (2n/eps) ln(2/eps).
inline std::size_t required_samples(const SampleComplexityInput& in) {
  if (!(in.epsilon > 0.0 && in.epsilon < 1.0)) throw ConfigError("required_samples: epsilon must lie in (0, 1)");
  if (!(in.delta > 0.0 && in.delta < 1.0)) throw ConfigError("required_samples: delta must lie in (0, 1)");
  if (in.dim < 1) throw ConfigError("required_samples: dim must be >= 1");
  const double n = in.dim;
  const double bound = 2.0 / in.epsilon * std::log(1.0 / in.delta) + 2.0 * n +
                       2.0 * n / in.epsilon * std::log(2.0 / in.epsilon);
  return static_cast<std::size_t>(std::ceil(bound));
}

// Equiprobable flexibility scenarios for one hour. Row w holds the
// `minutes` consecutive triples of one historical day.
struct ScenarioSet {
  int hour{0};
  int minutes{kMinutesPerHour};
  std::vector<FlexTriple> values;
  std::vector<Day> source_days;

  std::size_t size() const noexcept { return source_days.size(); }
  std::size_t pair_count() const noexcept { return values.size(); }
  double weight() const { return 1.0 / static_cast<double>(size()); }

  std::span<const FlexTriple> row(std::size_t w) const {
    return std::span<const FlexTriple>(values).subspan(w * static_cast<std::size_t>(minutes),
                                                       static_cast<std::size_t>(minutes));
  }

  // Builds a set directly from rows; used by tests and tools.
  static ScenarioSet from_rows(int hour, const std::vector<std::vector<FlexTriple>>& rows) {
    ScenarioSet s;
    s.hour = hour;
    if (rows.empty()) throw EmptyInput("scenario rows");
    s.minutes = static_cast<int>(rows.front().size());
    if (s.minutes == 0) throw EmptyInput("scenario minutes");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.front().size()) throw DataError("scenario rows differ in length");
      s.values.insert(s.values.end(), rows[i].begin(), rows[i].end());
      s.source_days.push_back(Day{static_cast<std::int32_t>(i)});
    }
    return s;
  }
};

// Draws `sample_count` distinct training days uniformly without replacement
// and slices each at the given hour, so minutes stay coherent within a day.
inline ScenarioSet build_scenarios(std::span<const FlexSeries> training_days, int hour, std::size_t sample_count,
                                   std::uint64_t rng_seed) {
  if (hour < 0 || hour >= kHoursPerDay) throw HourMismatch("hour outside [0, 24)");
  if (sample_count == 0) throw ConfigError("sample_count must be >= 1");
  if (sample_count > training_days.size()) throw InsufficientTrainingDays(training_days.size(), sample_count);
  std::vector<std::size_t> idx(training_days.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(rng_seed);
  // Partial Fisher-Yates: the first sample_count slots are the draw, in draw order.
  for (std::size_t i = 0; i < sample_count; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  ScenarioSet s;
  s.hour = hour;
  s.minutes = kMinutesPerHour;
  s.values.reserve(sample_count * kMinutesPerHour);
  for (std::size_t i = 0; i < sample_count; ++i) {
    const auto& day = training_days[idx[i]];
    auto slice = day.hour(hour);
    s.values.insert(s.values.end(), slice.begin(), slice.end());
    s.source_days.push_back(day.day);
  }
  return s;
}

// Empirical P(X <= level).
inline double conditional_cdf(std::span<const double> values, double level) {
  if (values.empty()) throw EmptyInput("conditional_cdf values");
  const auto below = std::count_if(values.begin(), values.end(), [&](double v) { return v <= level; });
  return static_cast<double>(below) / static_cast<double>(values.size());
}

inline std::string dump_scenarios(const ScenarioSet& s) {
  std::string out = "hour,scenario,minute,f_up_kw,f_down_kw,f_energy_kw\n";
  for (std::size_t w = 0; w < s.size(); ++w) {
    auto row = s.row(w);
    for (std::size_t m = 0; m < row.size(); ++m)
      out += std::to_string(s.hour) + "," + std::to_string(w) + "," + std::to_string(m) + "," + csv::fmt(row[m].f_up) +
             "," + csv::fmt(row[m].f_down) + "," + csv::fmt(row[m].f_energy) + "\n";
  }
  return out;
}

}  // namespace flexbid
