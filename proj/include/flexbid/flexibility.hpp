#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "flexbid/errors.hpp"
#include "flexbid/market_data.hpp"
#include "flexbid/random.hpp"
#include "flexbid/time.hpp"

namespace flexbid {

// Length of the continuous-delivery requirement for limited energy reservoirs.
inline constexpr int kEnergyWindowMinutes = 20;
// kWh sustainable for 20 minutes -> kW: divide by 1/3 h.
inline constexpr double kEnergyToPower = 60.0 / kEnergyWindowMinutes;
// Share of the session's charged energy assumed to remain as battery headroom.
inline constexpr double kHeadroomShare = 0.10;

// Available flexibility in one minute, all in kW.
//   f_up     decrease of consumption (upward regulation)
//   f_down   increase of consumption (downward regulation)
//   f_energy downward power sustainable for the next 20 minutes
struct FlexTriple {
  double f_up{0.0};
  double f_down{0.0};
  double f_energy{0.0};

  FlexTriple& operator+=(const FlexTriple& o) {
    f_up += o.f_up;
    f_down += o.f_down;
    f_energy += o.f_energy;
    return *this;
  }
  FlexTriple operator*(double s) const { return {f_up * s, f_down * s, f_energy * s}; }
  friend bool operator==(const FlexTriple&, const FlexTriple&) = default;
};

// One calendar day of minute-resolution flexibility.
struct FlexSeries {
  Day day{};
  std::vector<FlexTriple> values = std::vector<FlexTriple>(kMinutesPerDay);

  std::span<const FlexTriple> hour(int h) const {
    return std::span<const FlexTriple>(values).subspan(static_cast<std::size_t>(h) * kMinutesPerHour,
                                                       kMinutesPerHour);
  }
};

// Flexibility for a contiguous run of connected minutes (one charging
// session). `baseline` and `headroom_kwh` are indexed by minute from the
// session start; every minute is connected and the session ends right after
// the last one, so windows reaching past the end deliver no energy.
inline std::vector<FlexTriple> session_flexibility(std::span<const double> baseline, double rated_power,
                                                   std::span<const double> headroom_kwh) {
  const std::size_t n = baseline.size();
  std::vector<FlexTriple> out(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double b = std::clamp(baseline[m], 0.0, rated_power);
    out[m].f_up = b;
    out[m].f_down = rated_power - b;
  }
  // Sliding minimum of f_down over [m, m + 20), right to left.
  std::deque<std::size_t> window;
  for (std::size_t i = n; i-- > 0;) {
    while (!window.empty() && out[window.back()].f_down >= out[i].f_down) window.pop_back();
    window.push_back(i);
    while (window.front() >= i + kEnergyWindowMinutes) window.pop_front();
    if (i + kEnergyWindowMinutes > n) {
      out[i].f_energy = 0.0;
      continue;
    }
    const double by_power = out[window.front()].f_down;
    const double by_energy = kEnergyToPower * std::max(0.0, headroom_kwh[i]);
    out[i].f_energy = std::min(by_power, by_energy);
  }
  return out;
}

// Per-EV flexibility for one day. The spans cover the day's 1440 minutes
// and may extend further (lookahead for the 20-minute window); minutes
// beyond the spans count as disconnected.
inline FlexSeries ev_flexibility(Day day, std::span<const double> baseline, std::span<const std::uint8_t> connected,
                                 double rated_power, std::span<const double> headroom_kwh) {
  FlexSeries series{day};
  const std::size_t n = std::min({baseline.size(), connected.size(), headroom_kwh.size()});
  std::size_t m = 0;
  while (m < n && m < static_cast<std::size_t>(kMinutesPerDay)) {
    if (!connected[m]) {
      ++m;
      continue;
    }
    std::size_t end = m;
    while (end < n && connected[end]) ++end;
    auto run = session_flexibility(baseline.subspan(m, end - m), rated_power, headroom_kwh.subspan(m, end - m));
    for (std::size_t k = 0; k < run.size() && m + k < static_cast<std::size_t>(kMinutesPerDay); ++k)
      series.values[m + k] = run[k];
    m = end;
  }
  return series;
}

// Element-wise sum over EVs or bundles.
inline FlexSeries aggregate(std::span<const FlexSeries> series) {
  if (series.empty()) throw EmptyInput("aggregate");
  FlexSeries out{series.front().day};
  for (const auto& s : series) {
    if (s.day != out.day) throw DayMismatch();
    for (int m = 0; m < kMinutesPerDay; ++m) out.values[m] += s.values[m];
  }
  return out;
}

struct BundleConfig {
  std::size_t bundle_count{1};
  std::unordered_map<std::string, std::size_t> assignment;

  std::vector<std::vector<std::string>> members(std::span<const std::string> ordered_ids) const {
    std::vector<std::vector<std::string>> out(bundle_count);
    for (const auto& id : ordered_ids) out[assignment.at(id)].push_back(id);
    return out;
  }
};

// Uniform random equal-size partition: shuffle, then deal round-robin.
inline BundleConfig partition_bundles(std::vector<std::string> ev_ids, std::size_t bundle_count,
                                      std::uint64_t rng_seed) {
  if (bundle_count == 0 || bundle_count > ev_ids.size()) throw TooManyBundles(bundle_count, ev_ids.size());
  std::sort(ev_ids.begin(), ev_ids.end());
  ev_ids.erase(std::unique(ev_ids.begin(), ev_ids.end()), ev_ids.end());
  if (bundle_count > ev_ids.size()) throw TooManyBundles(bundle_count, ev_ids.size());
  Rng rng(rng_seed);
  rng.shuffle(ev_ids);
  BundleConfig cfg{bundle_count, {}};
  for (std::size_t i = 0; i < ev_ids.size(); ++i) cfg.assignment.emplace(ev_ids[i], i % bundle_count);
  return cfg;
}

// Battery headroom available to downward regulation, per connected minute:
// 10 % of the session's charged energy, held fixed for bidding.
inline std::vector<double> session_headroom(const ChargingSession& s) {
  const auto n = static_cast<std::size_t>(std::max<std::int64_t>(0, s.duration_minutes()));
  return std::vector<double>(n, kHeadroomShare * std::max(0.0, s.session_energy_kwh));
}

inline std::vector<FlexTriple> session_flexibility(const ChargingSession& s) {
  const auto baseline = session_baseline(s);
  const auto headroom = session_headroom(s);
  return session_flexibility(baseline, s.rated_power_kw, headroom);
}

// Sessions grouped by EV, with per-bundle aggregation over a day horizon.
class Fleet {
 public:
  explicit Fleet(std::vector<ChargingSession> sessions) : sessions_(std::move(sessions)) {
    canonicalize_sessions(sessions_);
    for (std::size_t i = 0; i < sessions_.size(); ++i) {
      if (ev_ids_.empty() || ev_ids_.back() != sessions_[i].ev_id) {
        ev_ids_.push_back(sessions_[i].ev_id);
        ranges_.emplace(sessions_[i].ev_id, std::pair{i, i + 1});
      } else {
        ranges_[sessions_[i].ev_id].second = i + 1;
      }
    }
  }

  const std::vector<std::string>& ev_ids() const noexcept { return ev_ids_; }
  const std::vector<ChargingSession>& sessions() const noexcept { return sessions_; }

  // Sum of the members' flexibility for days [first_day, first_day + n_days).
  // Members are summed in the given order, sessions in time order.
  std::vector<FlexSeries> aggregate_series(std::span<const std::string> members, Day first_day,
                                           std::size_t n_days) const {
    std::vector<FlexSeries> out(n_days);
    for (std::size_t d = 0; d < n_days; ++d) out[d].day = Day{first_day.index + static_cast<std::int32_t>(d)};
    const Minute origin = start_of(first_day);
    const auto horizon = static_cast<std::int64_t>(n_days) * kMinutesPerDay;
    for (const auto& id : members) {
      auto it = ranges_.find(id);
      if (it == ranges_.end()) continue;
      for (std::size_t i = it->second.first; i < it->second.second; ++i) {
        const auto& s = sessions_[i];
        const std::int64_t offset = s.start - origin;
        if (offset >= horizon || offset + s.duration_minutes() <= 0) continue;
        const auto flex = session_flexibility(s);
        for (std::size_t k = 0; k < flex.size(); ++k) {
          const std::int64_t pos = offset + static_cast<std::int64_t>(k);
          if (pos < 0 || pos >= horizon) continue;
          out[static_cast<std::size_t>(pos / kMinutesPerDay)].values[static_cast<std::size_t>(pos % kMinutesPerDay)] +=
              flex[k];
        }
      }
    }
    return out;
  }

 private:
  std::vector<ChargingSession> sessions_;
  std::vector<std::string> ev_ids_;
  std::unordered_map<std::string, std::pair<std::size_t, std::size_t>> ranges_;
};

}  // namespace flexbid
