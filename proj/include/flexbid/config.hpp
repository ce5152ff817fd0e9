#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flexbid/bidding.hpp"
#include "flexbid/csv.hpp"
#include "flexbid/errors.hpp"
#include "flexbid/evaluation.hpp"
#include "flexbid/market_data.hpp"
#include "flexbid/scenarios.hpp"

namespace flexbid {

struct SynthesisConfig {
  FleetSynthesisConfig fleet;
  double price_mean_up{250.0};
  double price_mean_down{120.0};
};

struct NamedMask {
  std::string name;
  LerMask mask;
};

struct ExperimentConfig {
  // Directory with sessions.csv, readings.csv, prices.csv, frequency.csv.
  // When empty, the dataset is synthesized from `synthesis`.
  std::string data_dir;
  SynthesisConfig synthesis;
  std::size_t n_days{363};
  std::size_t folds{3};
  std::vector<std::size_t> bundle_counts{70, 28, 14, 10, 7, 4, 2, 1};
  std::vector<Engine> engines{Engine::AlsoX, Engine::CVaR, Engine::Oracle};
  std::vector<NamedMask> masks{{"base", LerMask::base()}};
  RiskConfig risk;
  double delta{0.01};
  std::optional<std::size_t> sample_count;  // default: required_samples(epsilon, delta, 2)
  bool share_hour_draws{false};
  PenaltyPricing penalty;
  DroopLaw droop;
  std::uint64_t master_seed{42};
  unsigned jobs{1};

  std::size_t samples() const {
    return sample_count ? *sample_count : required_samples({risk.epsilon, delta, 2});
  }

  void validate() const {
    if (folds < 2) throw ConfigError("folds must be >= 2");
    if (n_days < folds) throw ConfigError("n_days must be >= folds");
    if (bundle_counts.empty()) throw ConfigError("bundle_counts is empty");
    for (auto k : bundle_counts)
      if (k < 1) throw ConfigError("bundle counts must be >= 1");
    if (std::set(bundle_counts.begin(), bundle_counts.end()).size() != bundle_counts.size())
      throw ConfigError("bundle_counts has duplicates");
    if (engines.empty()) throw ConfigError("engines is empty");
    if (std::set(engines.begin(), engines.end()).size() != engines.size()) throw ConfigError("engines has duplicates");
    if (masks.empty()) throw ConfigError("masks is empty");
    std::set<std::string> names;
    for (const auto& m : masks) {
      if (!m.mask.valid()) throw ConfigError("mask '" + m.name + "' leaves the downward bid unbounded");
      if (!names.insert(m.name).second) throw ConfigError("masks has duplicates");
    }
    risk.validate();
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (sample_count && *sample_count < 1) throw ConfigError("sample_count must be >= 1");
    penalty.validate();
    if (!(droop.up_full < droop.up_start && droop.down_start < droop.down_full))
      throw ConfigError("droop bands are empty");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (data_dir.empty()) synthesis.fleet.validate();
  }
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline std::vector<Engine> parse_engines(const std::vector<std::string>& names) {
  std::vector<Engine> out;
  for (const auto& n : names) {
    auto e = parse_engine(n);
    if (!e) throw ConfigError("unknown engine '" + n + "'");
    out.push_back(*e);
  }
  return out;
}

inline std::vector<NamedMask> parse_masks(const std::vector<std::string>& names) {
  std::vector<NamedMask> out;
  for (const auto& n : names) {
    auto m = parse_mask(n);
    if (!m) throw ConfigError("unknown mask '" + n + "'");
    out.push_back({mask_name(*m), *m});
  }
  return out;
}

}  // namespace detail

// Comma-separated list splitting for CLI overrides.
inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline ExperimentConfig parse_config(const std::string& text) {
  using detail::read;
  detail::json j;
  try {
    j = detail::json::parse(text);
  } catch (const detail::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  detail::reject_unknown(j, "config",
                         {"data_dir", "synthesis", "n_days", "folds", "bundle_counts", "engines", "masks", "risk",
                          "delta", "sample_count", "share_hour_draws", "penalty", "droop", "master_seed", "jobs"});
  ExperimentConfig c;
  read(j, "data_dir", c.data_dir);
  read(j, "n_days", c.n_days);
  read(j, "folds", c.folds);
  read(j, "bundle_counts", c.bundle_counts);
  read(j, "delta", c.delta);
  read(j, "share_hour_draws", c.share_hour_draws);
  read(j, "master_seed", c.master_seed);
  read(j, "jobs", c.jobs);
  if (j.contains("sample_count") && !j["sample_count"].is_null()) {
    std::size_t n = 0;
    read(j, "sample_count", n);
    c.sample_count = n;
  }
  if (j.contains("engines")) {
    std::vector<std::string> names;
    read(j, "engines", names);
    c.engines = detail::parse_engines(names);
  }
  if (j.contains("masks")) {
    std::vector<std::string> names;
    read(j, "masks", names);
    c.masks = detail::parse_masks(names);
  }
  if (j.contains("risk")) {
    const auto& r = j["risk"];
    detail::reject_unknown(r, "risk",
                           {"epsilon", "alpha", "bisection_tol", "big_m_margin", "continuous_q", "max_iterations"});
    read(r, "epsilon", c.risk.epsilon);
    read(r, "alpha", c.risk.alpha);
    read(r, "bisection_tol", c.risk.bisection_tol);
    read(r, "big_m_margin", c.risk.big_m_margin);
    read(r, "continuous_q", c.risk.continuous_q);
    read(r, "max_iterations", c.risk.max_iterations);
  }
  if (j.contains("penalty")) {
    const auto& p = j["penalty"];
    detail::reject_unknown(p, "penalty", {"multiplier", "activation_weighted"});
    read(p, "multiplier", c.penalty.multiplier);
    read(p, "activation_weighted", c.penalty.activation_weighted);
  }
  if (j.contains("droop")) {
    const auto& d = j["droop"];
    detail::reject_unknown(d, "droop", {"up_start", "up_full", "down_start", "down_full"});
    read(d, "up_start", c.droop.up_start);
    read(d, "up_full", c.droop.up_full);
    read(d, "down_start", c.droop.down_start);
    read(d, "down_full", c.droop.down_full);
  }
  if (j.contains("synthesis")) {
    const auto& s = j["synthesis"];
    detail::reject_unknown(s, "synthesis",
                           {"n_ev", "n_days", "seed", "start_day", "evening_peak_hour", "night_peak_hour",
                            "peak_spread_hours", "evening_share", "daily_session_probability", "departure_hour",
                            "mean_session_energy", "midday_session_probability", "midday_peak_hour", "rated_power_choices", "reading_interval_minutes",
                            "price_mean_up", "price_mean_down"});
    auto& f = c.synthesis.fleet;
    read(s, "n_ev", f.n_ev);
    read(s, "n_days", f.n_days);
    read(s, "seed", f.rng_seed);
    if (s.contains("start_day")) {
      std::string day;
      read(s, "start_day", day);
      auto d = parse_day(day);
      if (!d) throw ConfigError("synthesis.start_day must be YYYY-MM-DD");
      f.start_day = *d;
    }
    read(s, "evening_peak_hour", f.evening_peak_hour);
    read(s, "night_peak_hour", f.night_peak_hour);
    read(s, "peak_spread_hours", f.peak_spread_hours);
    read(s, "evening_share", f.evening_share);
    read(s, "daily_session_probability", f.daily_session_probability);
    read(s, "departure_hour", f.departure_hour);
    read(s, "mean_session_energy", f.mean_session_energy);
    read(s, "midday_session_probability", f.midday_session_probability);
    read(s, "midday_peak_hour", f.midday_peak_hour);
    read(s, "rated_power_choices", f.rated_power_choices);
    read(s, "reading_interval_minutes", f.reading_interval_minutes);
    read(s, "price_mean_up", c.synthesis.price_mean_up);
    read(s, "price_mean_down", c.synthesis.price_mean_down);
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  auto in = csv::open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Datasets

struct Dataset {
  std::vector<ChargingSession> sessions;
  std::vector<PriceRecord> prices;        // one per hour of the horizon
  std::vector<FrequencyMinute> frequency;  // one per minute of the horizon
  Day first_day{0};
  std::size_t n_days{0};

  const PriceRecord& price(std::size_t day, int hour) const {
    return prices[day * kHoursPerDay + static_cast<std::size_t>(hour)];
  }
  std::span<const FrequencyMinute> frequency_hour(std::size_t day, int hour) const {
    return std::span<const FrequencyMinute>(frequency)
        .subspan(day * kMinutesPerDay + static_cast<std::size_t>(hour) * kMinutesPerHour, kMinutesPerHour);
  }

  // Prices and frequency must tile [first_day, first_day + n_days) exactly.
  void validate() const {
    if (n_days == 0) throw EmptyInput("dataset horizon");
    if (prices.size() != n_days * kHoursPerDay) throw DataError("prices do not cover every hour of the horizon");
    if (frequency.size() != n_days * kMinutesPerDay)
      throw DataError("frequency does not cover every minute of the horizon");
    const Minute origin = start_of(first_day);
    for (std::size_t i = 0; i < prices.size(); ++i)
      if (prices[i].hour != origin + static_cast<std::int64_t>(i) * kMinutesPerHour)
        throw DataError("prices: missing or misplaced hour " + format_minute(prices[i].hour));
    for (std::size_t i = 0; i < frequency.size(); ++i)
      if (frequency[i].minute != origin + static_cast<std::int64_t>(i))
        throw DataError("frequency: missing or misplaced minute " + format_minute(frequency[i].minute));
  }

  // Keeps only the first n days.
  void truncate(std::size_t n) {
    if (n > n_days) throw DataError("dataset has " + std::to_string(n_days) + " days, " + std::to_string(n) + " requested");
    n_days = n;
    prices.resize(n * kHoursPerDay);
    frequency.resize(n * kMinutesPerDay);
  }
};

inline Dataset synthesize_dataset(const SynthesisConfig& cfg) {
  Dataset d;
  d.sessions = synthesize_fleet(cfg.fleet);
  d.first_day = cfg.fleet.start_day;
  d.n_days = cfg.fleet.n_days;
  d.prices = synthesize_prices(d.first_day, d.n_days, cfg.fleet.rng_seed, cfg.price_mean_up, cfg.price_mean_down);
  d.frequency = synthesize_frequency(d.first_day, d.n_days, cfg.fleet.rng_seed);
  d.validate();
  return d;
}

inline Dataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  Dataset d;
  {
    auto s = csv::open_in(path("sessions.csv"));
    auto r = csv::open_in(path("readings.csv"));
    d.sessions = ingest_sessions(s, r, path("sessions.csv"), path("readings.csv"));
  }
  {
    auto p = csv::open_in(path("prices.csv"));
    d.prices = ingest_prices(p, path("prices.csv"));
  }
  {
    auto f = csv::open_in(path("frequency.csv"));
    d.frequency = ingest_frequency(f, path("frequency.csv"));
  }
  if (d.prices.empty()) throw EmptyInput("prices.csv");
  if (d.prices.front().hour.minute_of_day() != 0) throw DataError("prices.csv must start at midnight");
  d.first_day = d.prices.front().hour.day();
  d.n_days = d.prices.size() / kHoursPerDay;
  d.prices.resize(d.n_days * kHoursPerDay);
  if (d.frequency.size() > d.n_days * kMinutesPerDay) d.frequency.resize(d.n_days * kMinutesPerDay);
  d.validate();
  return d;
}

inline void write_dataset(const Dataset& d, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir);
  auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  const auto sc = write_sessions(d.sessions);
  csv::write_file(path("sessions.csv"), sc.sessions);
  csv::write_file(path("readings.csv"), sc.readings);
  csv::write_file(path("prices.csv"), write_prices(d.prices));
  csv::write_file(path("frequency.csv"), write_frequency(d.frequency));
}

inline Dataset load_or_synthesize(const ExperimentConfig& cfg) {
  Dataset d = cfg.data_dir.empty() ? synthesize_dataset(cfg.synthesis) : load_dataset(cfg.data_dir);
  d.truncate(std::min(d.n_days, cfg.n_days));
  if (d.n_days < cfg.n_days)
    throw DataError("dataset has " + std::to_string(d.n_days) + " days, config asks for " + std::to_string(cfg.n_days));
  return d;
}

}  // namespace flexbid
