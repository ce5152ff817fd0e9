#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "flexbid/bidding.hpp"
#include "flexbid/errors.hpp"
#include "flexbid/flexibility.hpp"
#include "flexbid/market_data.hpp"

namespace flexbid {

// Linear droop across the FCR-D bands.
struct DroopLaw {
  double up_start{49.9};
  double up_full{49.5};
  double down_start{50.1};
  double down_full{50.5};
};

struct Activation {
  double up{0.0};
  double down{0.0};
};

inline Activation activation_from_frequency(const FrequencyMinute& fm, const DroopLaw& law = {}) {
  validate_frequency(fm);
  Activation a;
  a.up = std::clamp((law.up_start - fm.f_min) / (law.up_start - law.up_full), 0.0, 1.0);
  a.down = std::clamp((fm.f_max - law.down_start) / (law.down_full - law.down_start), 0.0, 1.0);
  if (a.up > 0.0 && a.down > 0.0) (a.up >= a.down ? a.down : a.up) = 0.0;
  return a;
}

struct ActivationSignal {
  std::vector<double> a_up;
  std::vector<double> a_down;

  std::size_t size() const noexcept { return a_up.size(); }
  static ActivationSignal quiet(std::size_t minutes) { return {std::vector<double>(minutes), std::vector<double>(minutes)}; }
};

inline ActivationSignal activation_signal(std::span<const FrequencyMinute> minutes, const DroopLaw& law = {}) {
  ActivationSignal s;
  s.a_up.reserve(minutes.size());
  s.a_down.reserve(minutes.size());
  for (const auto& fm : minutes) {
    const auto a = activation_from_frequency(fm, law);
    s.a_up.push_back(a.up);
    s.a_down.push_back(a.down);
  }
  return s;
}

struct PenaltyPricing {
  double multiplier{5.0};
  // Scale each minute's shortfall by that minute's activation fraction
  // before taking the hourly maximum.
  bool activation_weighted{false};

  void validate() const {
    if (!(multiplier >= 0.0)) throw ConfigError("penalty multiplier must be >= 0");
  }
};

// Prices are DKK/MW/h, bids kW.
inline constexpr double kKwToMw = 1e-3;

struct HourEvaluation {
  double p_up{0.0};    // kW
  double p_down{0.0};  // kW
  std::vector<std::uint8_t> overbid_flags;
  double profit{0.0};  // DKK
  double activation_energy_up{0.0};    // kWh
  double activation_energy_down{0.0};  // kWh

  int overbid_minutes() const { return static_cast<int>(std::count(overbid_flags.begin(), overbid_flags.end(), 1)); }
};

inline double settle(const Bid& bid, double p_up, double p_down, const PriceRecord& price, const PenaltyPricing& pricing) {
  return kKwToMw * (bid.c_up * price.lambda_up + bid.c_down * price.lambda_down -
                    pricing.multiplier * price.lambda_up * p_up - pricing.multiplier * price.lambda_down * p_down);
}

// Backtests one hourly bid against realized minutes. Shortfalls use the same
// masked slacks as the solvers: the upward one includes the downward
// reservation, the downward one covers both the power and the energy limit.
inline HourEvaluation evaluate_hour(const Bid& bid, std::span<const FlexTriple> realized,
                                    const ActivationSignal& activation, const PriceRecord& price,
                                    const PenaltyPricing& pricing, const LerMask& mask) {
  pricing.validate();
  if (realized.size() != activation.size()) throw HourMismatch("activation length differs from realized minutes");
  if (price.hour.minute_of_day() / kMinutesPerHour != bid.hour) throw HourMismatch("price hour differs from bid hour");
  HourEvaluation ev;
  ev.overbid_flags.resize(realized.size());
  for (std::size_t m = 0; m < realized.size(); ++m) {
    const auto& f = realized[m];
    const double up = std::max(0.0, slack_up(bid.c_up, bid.c_down, f, mask));
    const double down = std::max({0.0, slack_down(bid.c_down, f, mask), slack_energy(bid.c_down, f, mask)});
    ev.overbid_flags[m] = violates(bid.c_up, bid.c_down, f, mask) ? 1 : 0;
    const double wu = pricing.activation_weighted ? activation.a_up[m] : 1.0;
    const double wd = pricing.activation_weighted ? activation.a_down[m] : 1.0;
    ev.p_up = std::max(ev.p_up, wu * up);
    ev.p_down = std::max(ev.p_down, wd * down);
    ev.activation_energy_up += activation.a_up[m] * bid.c_up / 60.0;
    ev.activation_energy_down += activation.a_down[m] * bid.c_down / 60.0;
  }
  ev.profit = settle(bid, ev.p_up, ev.p_down, price, pricing);
  return ev;
}

// Running sums for the utilized share of realized flexibility.
struct UtilizationAccumulator {
  double bid_up{0.0}, bid_down{0.0};
  double flex_up{0.0}, flex_down{0.0};

  void add(const Bid& bid, std::span<const FlexTriple> realized) {
    for (const auto& f : realized) {
      bid_up += bid.c_up;
      bid_down += bid.c_down;
      flex_up += f.f_up;
      flex_down += f.f_down;
    }
  }
  void merge(const UtilizationAccumulator& o) {
    bid_up += o.bid_up;
    bid_down += o.bid_down;
    flex_up += o.flex_up;
    flex_down += o.flex_down;
  }

  static std::optional<double> ratio(double num, double den) {
    if (den == 0.0) return std::nullopt;
    return num / den;
  }
  std::optional<double> up() const { return ratio(bid_up, flex_up); }
  std::optional<double> down() const { return ratio(bid_down, flex_down); }
  std::optional<double> overall() const { return ratio(bid_up + bid_down, flex_up + flex_down); }
};

// Share of realized flexibility that was bid, bids held constant within each
// hour. `hours` pairs a bid with the realized minutes of its hour.
inline std::optional<double> utilized_capacity(std::span<const std::pair<Bid, std::span<const FlexTriple>>> hours) {
  UtilizationAccumulator acc;
  for (const auto& [bid, realized] : hours) acc.add(bid, realized);
  return acc.overall();
}

struct OverbidCounter {
  std::uint64_t flagged{0};
  std::uint64_t minutes{0};

  void add(const HourEvaluation& ev) {
    flagged += static_cast<std::uint64_t>(ev.overbid_minutes());
    minutes += ev.overbid_flags.size();
  }
  void merge(const OverbidCounter& o) {
    flagged += o.flagged;
    minutes += o.minutes;
  }
  double frequency() const { return minutes == 0 ? 0.0 : static_cast<double>(flagged) / static_cast<double>(minutes); }
};

enum class Compliance { Compliant, BufferZone, Excluded };

inline std::string_view compliance_name(Compliance c) {
  switch (c) {
    case Compliance::Compliant: return "Compliant";
    case Compliance::BufferZone: return "BufferZone";
    case Compliance::Excluded: return "Excluded";
  }
  return "?";
}

inline Compliance p90_compliance(double overbid_frequency) {
  if (!(overbid_frequency >= 0.0 && overbid_frequency <= 1.0)) throw ConfigError("overbid frequency outside [0, 1]");
  if (overbid_frequency <= 0.10) return Compliance::Compliant;
  if (overbid_frequency <= 0.15) return Compliance::BufferZone;
  return Compliance::Excluded;
}

}  // namespace flexbid
