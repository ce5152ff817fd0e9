#pragma once

// Random scenario sets for property suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "flexbid/random.hpp"
#include "flexbid/scenarios.hpp"

namespace instances {

using flexbid::FlexTriple;

// |Omega| x minutes scenarios: a per-scenario (day) factor times
// per-minute noise, occasional disconnected days, f_energy <= f_down.
inline flexbid::ScenarioSet random_set(flexbid::Rng& rng, std::size_t scenarios, int minutes) {
  const double scale = std::pow(10.0, rng.uniform(0.0, 3.0));
  const double up_level = scale * rng.uniform(0.2, 1.0);
  const double down_level = scale * rng.uniform(0.5, 2.0);
  std::vector<std::vector<FlexTriple>> rows;
  for (std::size_t w = 0; w < scenarios; ++w) {
    const bool off = rng.bernoulli(0.05);
    const double g = std::exp(rng.normal(0.0, 0.5));
    std::vector<FlexTriple> row;
    for (int m = 0; m < minutes; ++m) {
      if (off) {
        row.push_back({0.0, 0.0, 0.0});
        continue;
      }
      const double up = std::max(0.0, up_level * g * (1.0 + 0.2 * rng.normal()));
      const double down = std::max(0.0, down_level * g * (1.0 + 0.2 * rng.normal()));
      const double energy = rng.bernoulli(0.3) ? down : down * rng.uniform(0.3, 1.0);
      row.push_back({up, down, energy});
    }
    rows.push_back(std::move(row));
  }
  return flexbid::ScenarioSet::from_rows(0, rows);
}

// Small instances on a coarse grid, so ties and degenerate vertices occur.
inline flexbid::ScenarioSet tiny_set(flexbid::Rng& rng, std::size_t scenarios, int minutes) {
  std::vector<std::vector<FlexTriple>> rows;
  for (std::size_t w = 0; w < scenarios; ++w) {
    std::vector<FlexTriple> row;
    for (int m = 0; m < minutes; ++m) {
      const double up = static_cast<double>(rng.below(11));
      const double down = static_cast<double>(rng.below(21));
      const double energy = std::min(down, static_cast<double>(rng.below(21)));
      row.push_back({up, down, energy});
    }
    rows.push_back(std::move(row));
  }
  return flexbid::ScenarioSet::from_rows(0, rows);
}

// Continuous-valued tiny instances (generic position).
inline flexbid::ScenarioSet tiny_continuous(flexbid::Rng& rng, std::size_t scenarios, int minutes) {
  std::vector<std::vector<FlexTriple>> rows;
  for (std::size_t w = 0; w < scenarios; ++w) {
    std::vector<FlexTriple> row;
    for (int m = 0; m < minutes; ++m) {
      const double up = rng.uniform(0.0, 10.0);
      const double down = rng.uniform(0.0, 20.0);
      row.push_back({up, down, down * rng.uniform(0.2, 1.0)});
    }
    rows.push_back(std::move(row));
  }
  return flexbid::ScenarioSet::from_rows(0, rows);
}

}  // namespace instances
