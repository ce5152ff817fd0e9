#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "flexbid/csv.hpp"
#include "flexbid/errors.hpp"
#include "flexbid/random.hpp"
#include "flexbid/time.hpp"

namespace flexbid {

struct Reading {
  Minute time;
  double power_kw{0.0};
  friend bool operator==(const Reading&, const Reading&) = default;
};

// One plug-in period of one charge box. The EV is connected for the minutes
// [start, end).
struct ChargingSession {
  std::string ev_id;
  Minute start;
  Minute end;
  double rated_power_kw{0.0};
  std::vector<Reading> readings;
  double session_energy_kwh{0.0};

  std::int64_t duration_minutes() const { return end - start; }
  friend bool operator==(const ChargingSession&, const ChargingSession&) = default;
};

// Hourly FCR-D reservation prices, DKK per MW per hour.
struct PriceRecord {
  Minute hour;
  double lambda_up{0.0};
  double lambda_down{0.0};
  friend bool operator==(const PriceRecord&, const PriceRecord&) = default;
};

struct FrequencyMinute {
  Minute minute;
  double f_min{50.0};
  double f_max{50.0};
  bool carried_forward{false};
  friend bool operator==(const FrequencyMinute&, const FrequencyMinute&) = default;
};

struct FleetSynthesisConfig {
  std::size_t n_ev{100};
  std::size_t n_days{363};
  std::uint64_t rng_seed{1};
  Day start_day{make_day(2022, 1, 1)};
  double evening_peak_hour{18.0};
  double night_peak_hour{23.0};
  double peak_spread_hours{1.5};
  double evening_share{0.6};
  double daily_session_probability{0.85};
  double departure_hour{7.5};
  double mean_session_energy{15.0};
  double midday_session_probability{0.25};
  double midday_peak_hour{12.5};
  std::vector<double> rated_power_choices{3.7, 7.4, 11.0};
  double reading_interval_minutes{10.0};

  void validate() const {
    if (n_ev < 1) throw ConfigError("fleet: n_ev must be >= 1");
    if (n_days < 1) throw ConfigError("fleet: n_days must be >= 1");
    auto hour_ok = [](double h) { return h >= 0.0 && h < 24.0; };
    if (!hour_ok(evening_peak_hour) || !hour_ok(night_peak_hour) || !hour_ok(departure_hour))
      throw ConfigError("fleet: peak and departure hours must lie in [0, 24)");
    if (rated_power_choices.empty()) throw ConfigError("fleet: rated_power_choices is empty");
    for (double p : rated_power_choices)
      if (!(p > 0.0)) throw ConfigError("fleet: rated powers must be > 0");
    if (!(mean_session_energy > 0.0)) throw ConfigError("fleet: mean_session_energy must be > 0");
    if (!(peak_spread_hours >= 0.0)) throw ConfigError("fleet: peak_spread_hours must be >= 0");
    if (!(evening_share >= 0.0 && evening_share <= 1.0)) throw ConfigError("fleet: evening_share must lie in [0, 1]");
    if (!(daily_session_probability >= 0.0 && daily_session_probability <= 1.0))
      throw ConfigError("fleet: daily_session_probability must lie in [0, 1]");
    if (!(midday_session_probability >= 0.0 && midday_session_probability <= 1.0))
      throw ConfigError("fleet: midday_session_probability must lie in [0, 1]");
    if (!hour_ok(midday_peak_hour)) throw ConfigError("fleet: midday_peak_hour must lie in [0, 24)");
    if (!(reading_interval_minutes >= 1.0)) throw ConfigError("fleet: reading_interval_minutes must be >= 1");
  }
};

// ---------------------------------------------------------------------------
// Baseline reconstruction

// Piecewise-linear interpolation of the session's readings on the minute
// grid [grid_start, grid_start + n). Constant extrapolation before the first
// and after the last reading, 0 kW outside [start, end], clamped to
// [0, rated_power].
inline std::vector<double> interpolate_baseline(const ChargingSession& s, Minute grid_start, std::size_t n) {
  std::vector<double> out(n, 0.0);
  if (s.readings.empty()) return out;
  const auto& r = s.readings;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Minute t = grid_start + static_cast<std::int64_t>(i);
    if (t < s.start || t > s.end) continue;
    while (k + 1 < r.size() && r[k + 1].time <= t) ++k;
    double v;
    if (t <= r.front().time) {
      v = r.front().power_kw;
    } else if (k + 1 >= r.size()) {
      v = r.back().power_kw;
    } else {
      const double span = static_cast<double>(r[k + 1].time - r[k].time);
      const double frac = static_cast<double>(t - r[k].time) / span;
      v = r[k].power_kw + frac * (r[k + 1].power_kw - r[k].power_kw);
    }
    out[i] = std::clamp(v, 0.0, s.rated_power_kw);
  }
  return out;
}

// Baseline over the connected minutes [start, end).
inline std::vector<double> session_baseline(const ChargingSession& s) {
  return interpolate_baseline(s, s.start, static_cast<std::size_t>(std::max<std::int64_t>(0, s.duration_minutes())));
}

inline double integrate_baseline_kwh(const ChargingSession& s) {
  double e = 0.0;
  for (double p : session_baseline(s)) e += p / 60.0;
  return e;
}

// ---------------------------------------------------------------------------
// Validation

inline void validate_session(const ChargingSession& s) {
  if (!(s.start < s.end)) throw NonMonotoneTimestamps(s.ev_id);
  if (!(s.rated_power_kw > 0.0) || !std::isfinite(s.rated_power_kw))
    throw DataError("session of " + s.ev_id + ": rated power must be > 0");
  if (!(s.session_energy_kwh >= 0.0)) throw DataError("session of " + s.ev_id + ": negative session energy");
  for (std::size_t i = 0; i < s.readings.size(); ++i) {
    const auto& r = s.readings[i];
    if (r.time < s.start || r.time > s.end)
      throw DataError("reading of " + s.ev_id + " at " + format_minute(r.time) + " lies outside its session");
    if (i > 0 && !(s.readings[i - 1].time < r.time)) throw NonMonotoneTimestamps(s.ev_id);
    if (!(r.power_kw >= 0.0) || r.power_kw > s.rated_power_kw)
      throw DataError("reading of " + s.ev_id + " at " + format_minute(r.time) + " outside [0, rated_power]");
  }
}

// Sorts by (ev_id, start) and rejects overlapping sessions of one EV.
inline void canonicalize_sessions(std::vector<ChargingSession>& sessions) {
  std::sort(sessions.begin(), sessions.end(), [](const ChargingSession& a, const ChargingSession& b) {
    return std::tie(a.ev_id, a.start) < std::tie(b.ev_id, b.start);
  });
  for (std::size_t i = 1; i < sessions.size(); ++i)
    if (sessions[i].ev_id == sessions[i - 1].ev_id && sessions[i].start < sessions[i - 1].end)
      throw OverlappingSessions(sessions[i].ev_id);
}

// ---------------------------------------------------------------------------
// CSV ingestion

inline constexpr const char* kSessionsHeader = "ev_id,start,end,rated_power_kw,session_energy_kwh";
inline constexpr const char* kReadingsHeader = "ev_id,timestamp,power_kw";
inline constexpr const char* kPricesHeader = "hour,lambda_up_dkk_mw,lambda_down_dkk_mw";
inline constexpr const char* kFrequencyHeader = "minute,f_min_hz,f_max_hz,carried_forward";
inline constexpr const char* kRawFrequencyHeader = "timestamp,hz";

// sessions.csv + readings.csv. An empty session_energy_kwh field means
// "unknown": it is then computed as the integral of the interpolated baseline.
inline std::vector<ChargingSession> ingest_sessions(std::istream& sessions_in, std::istream& readings_in,
                                                    const std::string& sessions_name = "sessions.csv",
                                                    const std::string& readings_name = "readings.csv") {
  std::vector<ChargingSession> sessions;
  std::vector<bool> energy_known;
  {
    csv::Reader rd(sessions_in, sessions_name);
    rd.expect_header(kSessionsHeader);
    std::vector<std::string_view> f;
    while (rd.next(f)) {
      if (f.size() != 5) rd.fail("expected 5 columns");
      ChargingSession s;
      s.ev_id = std::string(f[0]);
      if (s.ev_id.empty()) rd.fail("empty ev_id");
      auto start = parse_minute(f[1]);
      auto end = parse_minute(f[2]);
      if (!start || !end) rd.fail("bad timestamp");
      s.start = *start;
      s.end = *end;
      if (!(s.start < s.end)) throw NonMonotoneTimestamps(s.ev_id);
      s.rated_power_kw = rd.number(f[3], "rated_power_kw");
      if (!(s.rated_power_kw > 0.0)) rd.fail("rated_power_kw must be > 0");
      if (f[4].empty()) {
        energy_known.push_back(false);
      } else {
        s.session_energy_kwh = rd.number(f[4], "session_energy_kwh");
        if (s.session_energy_kwh < 0.0) rd.fail("session_energy_kwh must be >= 0");
        energy_known.push_back(true);
      }
      sessions.push_back(std::move(s));
    }
  }
  std::vector<std::size_t> order(sessions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(sessions[a].ev_id, sessions[a].start) < std::tie(sessions[b].ev_id, sessions[b].start);
  });
  {
    std::vector<ChargingSession> sorted;
    std::vector<bool> known;
    for (auto i : order) {
      sorted.push_back(std::move(sessions[i]));
      known.push_back(energy_known[i]);
    }
    sessions = std::move(sorted);
    energy_known = std::move(known);
  }
  canonicalize_sessions(sessions);

  std::map<std::string, std::pair<std::size_t, std::size_t>> by_ev;  // [first, last)
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    auto [it, inserted] = by_ev.try_emplace(sessions[i].ev_id, i, i + 1);
    if (!inserted) it->second.second = i + 1;
  }
  {
    csv::Reader rd(readings_in, readings_name);
    rd.expect_header(kReadingsHeader);
    std::vector<std::string_view> f;
    while (rd.next(f)) {
      if (f.size() != 3) rd.fail("expected 3 columns");
      const std::string ev(f[0]);
      auto t = parse_minute(f[1]);
      if (!t) rd.fail("bad timestamp");
      const double p = rd.number(f[2], "power_kw");
      auto it = by_ev.find(ev);
      if (it == by_ev.end()) rd.fail("reading for unknown ev_id " + ev);
      auto [lo, hi] = it->second;
      // Last session starting at or before t.
      auto first_after = std::upper_bound(sessions.begin() + static_cast<std::ptrdiff_t>(lo),
                                          sessions.begin() + static_cast<std::ptrdiff_t>(hi), *t,
                                          [](Minute m, const ChargingSession& s) { return m < s.start; });
      const auto idx = static_cast<std::size_t>(first_after - sessions.begin());
      if (idx == lo || *t > sessions[idx - 1].end) rd.fail("reading outside every session of " + ev);
      auto& s = sessions[idx - 1];
      if (!s.readings.empty() && !(s.readings.back().time < *t)) throw NonMonotoneTimestamps(ev);
      if (p < 0.0 || p > s.rated_power_kw) rd.fail("power_kw outside [0, rated_power_kw]");
      s.readings.push_back({*t, p});
    }
  }
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    if (!energy_known[i]) sessions[i].session_energy_kwh = integrate_baseline_kwh(sessions[i]);
    validate_session(sessions[i]);
  }
  return sessions;
}

struct SessionCsv {
  std::string sessions;
  std::string readings;
};

// Canonical CSV form; ingest_sessions(write_sessions(x)) == x.
inline SessionCsv write_sessions(const std::vector<ChargingSession>& sessions) {
  std::string s = std::string(kSessionsHeader) + "\n";
  std::string r = std::string(kReadingsHeader) + "\n";
  for (const auto& x : sessions) {
    s += x.ev_id + "," + format_minute(x.start) + "," + format_minute(x.end) + "," + csv::fmt(x.rated_power_kw) +
         "," + csv::fmt(x.session_energy_kwh) + "\n";
    for (const auto& rd : x.readings) r += x.ev_id + "," + format_minute(rd.time) + "," + csv::fmt(rd.power_kw) + "\n";
  }
  return {std::move(s), std::move(r)};
}

inline std::vector<PriceRecord> ingest_prices(std::istream& in, const std::string& name = "prices.csv") {
  csv::Reader rd(in, name);
  rd.expect_header(kPricesHeader);
  std::vector<PriceRecord> out;
  std::vector<std::string_view> f;
  while (rd.next(f)) {
    if (f.size() != 3) rd.fail("expected 3 columns");
    auto h = parse_minute(f[0]);
    if (!h || h->minute_of_day() % 60 != 0) rd.fail("hour must be an hour-aligned timestamp");
    PriceRecord p{*h, rd.number(f[1], "lambda_up_dkk_mw"), rd.number(f[2], "lambda_down_dkk_mw")};
    if (p.lambda_up < 0.0 || p.lambda_down < 0.0) rd.fail("negative price");
    if (!out.empty() && !(out.back().hour < p.hour)) rd.fail("hours must be strictly increasing");
    out.push_back(p);
  }
  return out;
}

inline std::string write_prices(const std::vector<PriceRecord>& prices) {
  std::string s = std::string(kPricesHeader) + "\n";
  for (const auto& p : prices) s += format_minute(p.hour) + "," + csv::fmt(p.lambda_up) + "," + csv::fmt(p.lambda_down) + "\n";
  return s;
}

inline void validate_frequency(const FrequencyMinute& f) {
  if (!(45.0 <= f.f_min && f.f_min <= f.f_max && f.f_max <= 55.0))
    throw DataError("frequency minute " + format_minute(f.minute) + " violates 45 <= f_min <= f_max <= 55");
}

inline std::vector<FrequencyMinute> ingest_frequency(std::istream& in, const std::string& name = "frequency.csv") {
  csv::Reader rd(in, name);
  rd.expect_header(kFrequencyHeader);
  std::vector<FrequencyMinute> out;
  std::vector<std::string_view> f;
  while (rd.next(f)) {
    if (f.size() != 4) rd.fail("expected 4 columns");
    auto m = parse_minute(f[0]);
    if (!m) rd.fail("bad timestamp");
    if (f[3] != "0" && f[3] != "1") rd.fail("carried_forward must be 0 or 1");
    FrequencyMinute fm{*m, rd.number(f[1], "f_min_hz"), rd.number(f[2], "f_max_hz"), f[3] == "1"};
    if (!(45.0 <= fm.f_min && fm.f_min <= fm.f_max && fm.f_max <= 55.0)) rd.fail("frequency outside 45..55 Hz or f_min > f_max");
    if (!out.empty() && !(out.back().minute < fm.minute)) rd.fail("minutes must be strictly increasing");
    out.push_back(fm);
  }
  return out;
}

inline std::string write_frequency(const std::vector<FrequencyMinute>& freq) {
  std::string s = std::string(kFrequencyHeader) + "\n";
  for (const auto& f : freq)
    s += format_minute(f.minute) + "," + csv::fmt(f.f_min) + "," + csv::fmt(f.f_max) + "," +
         (f.carried_forward ? "1" : "0") + "\n";
  return s;
}

// Raw (timestamp seconds, Hz) readings -> per-minute min/max. Minutes with
// no readings repeat the previous minute's values and are flagged.
inline std::vector<FrequencyMinute> downsample_frequency(const std::vector<std::pair<double, double>>& raw) {
  if (raw.empty()) throw EmptyInput("frequency readings");
  auto minute_of = [](double seconds) { return static_cast<std::int64_t>(std::floor(seconds / 60.0)); };
  const std::int64_t first = minute_of(raw.front().first);
  const std::int64_t last = minute_of(raw.back().first);
  if (last < first) throw DataError("frequency readings are not time-sorted");
  std::vector<FrequencyMinute> out(static_cast<std::size_t>(last - first + 1));
  std::vector<bool> seen(out.size(), false);
  double prev_t = raw.front().first;
  for (const auto& [t, hz] : raw) {
    if (t < prev_t) throw DataError("frequency readings are not time-sorted");
    prev_t = t;
    const auto i = static_cast<std::size_t>(minute_of(t) - first);
    if (!seen[i]) {
      out[i] = {Minute{first + static_cast<std::int64_t>(i)}, hz, hz, false};
      seen[i] = true;
    } else {
      out[i].f_min = std::min(out[i].f_min, hz);
      out[i].f_max = std::max(out[i].f_max, hz);
    }
  }
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (seen[i]) continue;
    out[i] = out[i - 1];
    out[i].minute = Minute{first + static_cast<std::int64_t>(i)};
    out[i].carried_forward = true;
  }
  for (const auto& f : out) validate_frequency(f);
  return out;
}

inline std::vector<std::pair<double, double>> ingest_raw_frequency(std::istream& in,
                                                                   const std::string& name = "raw_frequency.csv") {
  csv::Reader rd(in, name);
  rd.expect_header(kRawFrequencyHeader);
  std::vector<std::pair<double, double>> out;
  std::vector<std::string_view> f;
  while (rd.next(f)) {
    if (f.size() != 2) rd.fail("expected 2 columns");
    auto t = parse_seconds(f[0]);
    if (!t) rd.fail("bad timestamp");
    out.emplace_back(*t, rd.number(f[1], "hz"));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic data

namespace detail {

inline std::string ev_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "ev%05zu", i);
  return buf;
}

// Hour of day wrapped into the charging slot [12, 36) relative to the day's
// midnight, so every session starts between noon and the next noon.
inline double wrap_to_slot(double h) {
  while (h < 12.0) h += 24.0;
  while (h >= 36.0) h -= 24.0;
  return h;
}

}  // namespace detail

namespace detail {

// One session charged at constant power from plug-in, observed at an
// exponential reading cadence plus the exact charging-stop minutes.
inline ChargingSession make_session(const std::string& id, double rated, Minute start, Minute end, double energy,
                                    double fill, double reading_phase, double reading_interval, Rng& rr) {
  ChargingSession s;
  s.ev_id = id;
  s.rated_power_kw = rated;
  s.start = start;
  s.end = end;
  const double hours = static_cast<double>(s.duration_minutes()) / 60.0;
  energy = std::min(energy, 0.95 * rated * hours);
  // Spread charging: constant power chosen so the energy lands within
  // `fill` of the plug-in period, never above the rated power.
  const double power = std::min(rated, energy / (fill * hours));
  const double charge_minutes = power > 0.0 ? energy / power * 60.0 : 0.0;
  const Minute charge_end = s.start + static_cast<std::int64_t>(std::floor(charge_minutes));

  auto profile = [&](Minute t) { return t < charge_end ? power : 0.0; };
  double t = static_cast<double>(s.start.index) + reading_phase * reading_interval;
  s.readings.push_back({s.start, profile(s.start)});
  while (true) {
    const Minute m{static_cast<std::int64_t>(std::floor(t))};
    if (m >= s.end) break;
    if (m > s.readings.back().time) s.readings.push_back({m, profile(m)});
    t += std::max(1.0, rr.exponential(reading_interval));
  }
  if (charge_end > s.start && charge_end < s.end) {
    // Charging stop is always observed: last charging minute and first idle minute.
    const Reading last_on{charge_end - 1, power};
    const Reading first_off{charge_end, 0.0};
    for (const auto& extra : {last_on, first_off}) {
      auto it = std::lower_bound(s.readings.begin(), s.readings.end(), extra.time,
                                 [](const Reading& r, Minute m) { return r.time < m; });
      if (it != s.readings.end() && it->time == extra.time)
        it->power_kw = extra.power_kw;
      else
        s.readings.insert(it, extra);
    }
  }
  if (s.readings.back().time < s.end) s.readings.push_back({s.end, profile(s.end)});
  s.session_energy_kwh = integrate_baseline_kwh(s);
  return s;
}

}  // namespace detail

// Residential fleet: plug-in times bimodal around an evening and a night
// peak, plus occasional shorter midday sessions. An EV's sessions never
// overlap; every session ends by noon of the following day.
inline std::vector<ChargingSession> synthesize_fleet(const FleetSynthesisConfig& cfg) {
  cfg.validate();
  std::vector<ChargingSession> out;
  for (std::size_t ev = 0; ev < cfg.n_ev; ++ev) {
    Rng rng(derive_seed(cfg.rng_seed, {0x5E55, ev}));
    const double rated = cfg.rated_power_choices[rng.below(cfg.rated_power_choices.size())];
    const std::string id = detail::ev_name(ev);
    Minute last_end{std::numeric_limits<std::int64_t>::min() / 2};
    for (std::size_t d = 0; d < cfg.n_days; ++d) {
      // All draws happen every day so one EV's stream does not depend on
      // which sessions materialise.
      const bool plug = rng.bernoulli(cfg.daily_session_probability);
      const bool evening = rng.bernoulli(cfg.evening_share);
      const double start_h = detail::wrap_to_slot((evening ? cfg.evening_peak_hour : cfg.night_peak_hour) +
                                                  rng.normal(0.0, cfg.peak_spread_hours));
      const double depart_h = 24.0 + cfg.departure_hour + rng.normal(0.0, 1.0);
      const double energy_draw = std::exp(rng.normal(-0.125, 0.5));
      const double fill = rng.uniform(0.35, 1.0);
      const double reading_phase = rng.uniform();
      const bool midday = rng.bernoulli(cfg.midday_session_probability);
      const double mid_start_h = std::clamp(cfg.midday_peak_hour + rng.normal(0.0, 1.5), 8.0, 17.0);
      const double mid_hours = rng.uniform(1.5, 5.0);
      const double mid_energy_draw = std::exp(rng.normal(-0.125, 0.5));
      const double mid_fill = rng.uniform(0.35, 1.0);
      const double mid_phase = rng.uniform();
      Rng rr(derive_seed(cfg.rng_seed, {0xEAD, ev, d}));

      const Minute day0 = start_of(Day{cfg.start_day.index + static_cast<std::int32_t>(d)});
      if (midday) {
        const Minute start = day0 + static_cast<std::int64_t>(std::llround(mid_start_h * 60.0));
        const Minute end = std::min(start + static_cast<std::int64_t>(std::llround(mid_hours * 60.0)), day0 + 18 * 60);
        if (start >= last_end + 30 && end >= start + 30) {
          out.push_back(detail::make_session(id, rated, start, end, 0.5 * cfg.mean_session_energy * mid_energy_draw,
                                             mid_fill, mid_phase, cfg.reading_interval_minutes, rr));
          last_end = end;
        }
      }
      if (!plug) continue;
      Minute start = day0 + static_cast<std::int64_t>(std::llround(start_h * 60.0));
      if (start < last_end + 30) start = last_end + 30;
      const Minute slot_end = day0 + 36 * 60;
      Minute end = day0 + static_cast<std::int64_t>(std::llround(depart_h * 60.0));
      if (end < start + 60) end = start + 60 + static_cast<std::int64_t>(std::llround(energy_draw * 120.0));
      end = std::min(end, slot_end);
      if (!(start + 15 <= end)) continue;
      out.push_back(detail::make_session(id, rated, start, end, cfg.mean_session_energy * energy_draw, fill,
                                         reading_phase, cfg.reading_interval_minutes, rr));
      last_end = end;
    }
  }
  canonicalize_sessions(out);
  return out;
}

// Hourly reservation prices with a daily shape and log-normal noise.
inline std::vector<PriceRecord> synthesize_prices(Day start_day, std::size_t n_days, std::uint64_t seed,
                                                  double mean_up = 250.0, double mean_down = 120.0) {
  std::vector<PriceRecord> out;
  Rng rng(derive_seed(seed, {0x9A1CE}));
  for (std::size_t d = 0; d < n_days; ++d) {
    const double day_level = std::exp(rng.normal(-0.02, 0.2));
    for (int h = 0; h < kHoursPerDay; ++h) {
      const double shape = 1.0 + 0.25 * std::cos((h - 19) * 2.0 * 3.141592653589793 / 24.0);
      const double up = mean_up * day_level * shape * std::exp(rng.normal(-0.045, 0.3));
      const double down = mean_down * day_level * (2.0 - shape) * std::exp(rng.normal(-0.045, 0.3));
      const Minute hour = start_of(Day{start_day.index + static_cast<std::int32_t>(d)}) + h * 60;
      out.push_back({hour, std::round(up * 100.0) / 100.0, std::round(down * 100.0) / 100.0});
    }
  }
  return out;
}

// Minute-level grid frequency: slow drift around 50 Hz plus rare
// disturbances reaching into the FCR-D bands.
inline std::vector<FrequencyMinute> synthesize_frequency(Day start_day, std::size_t n_days, std::uint64_t seed) {
  std::vector<FrequencyMinute> out;
  out.reserve(n_days * kMinutesPerDay);
  Rng rng(derive_seed(seed, {0xF7E0}));
  double drift = 0.0;
  int event_left = 0;
  double event_depth = 0.0;
  for (std::size_t i = 0; i < n_days * kMinutesPerDay; ++i) {
    drift = 0.97 * drift + rng.normal(0.0, 0.008);
    const double lo_noise = std::abs(rng.normal(0.0, 0.012));
    const double hi_noise = std::abs(rng.normal(0.0, 0.012));
    if (event_left == 0 && rng.bernoulli(1.0 / 720.0)) {
      event_left = 1 + static_cast<int>(rng.below(4));
      event_depth = rng.uniform(0.12, 0.55) * (rng.bernoulli(0.5) ? -1.0 : 1.0);
    }
    double f_min = 50.0 + drift - 0.01 - lo_noise;
    double f_max = 50.0 + drift + 0.01 + hi_noise;
    if (event_left > 0) {
      --event_left;
      if (event_depth < 0.0)
        f_min = std::min(f_min, 50.0 + event_depth);
      else
        f_max = std::max(f_max, 50.0 + event_depth);
    }
    auto q = [](double v) { return std::round(std::clamp(v, 45.0, 55.0) * 1000.0) / 1000.0; };
    out.push_back({start_of(start_day) + static_cast<std::int64_t>(i), q(f_min), q(f_max), false});
  }
  return out;
}

}  // namespace flexbid
