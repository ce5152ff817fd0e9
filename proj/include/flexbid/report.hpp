#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "flexbid/csv.hpp"
#include "flexbid/errors.hpp"
#include "flexbid/harness.hpp"

namespace flexbid {

inline constexpr const char* kSummaryHeader =
    "fold,bundle_count,engine,mask,mean_hourly_profit_dkk,annual_profit_dkk,utilized_up,utilized_down,"
    "utilized_overall,overbid_freq,compliance";
inline constexpr const char* kEvaluationsHeader =
    "fold,bundle,engine,day,hour,c_up_kw,c_down_kw,p_up_kw,p_down_kw,profit_dkk,overbid_minutes,mask";
inline constexpr const char* kBidsHeader = "fold,bundle,engine,hour,c_up_kw,c_down_kw,in_sample_violation_freq,mask";
inline constexpr const char* kHistogramHeader = "fold,bundle_count,engine,mask,lower,upper,days";

namespace detail {

inline std::string opt(const std::optional<double>& v) { return v ? csv::fmt(*v) : std::string(); }

}  // namespace detail

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string s = std::string(kSummaryHeader) + "\n";
  for (const auto& r : rows)
    s += std::to_string(r.fold) + "," + std::to_string(r.bundle_count) + "," + std::string(engine_name(r.engine)) +
         "," + r.mask + "," + csv::fmt(r.mean_hourly_profit) + "," + csv::fmt(r.annual_profit) + "," +
         detail::opt(r.utilized_up) + "," + detail::opt(r.utilized_down) + "," + detail::opt(r.utilized_overall) +
         "," + csv::fmt(r.overbid_freq) + "," + std::string(compliance_name(r.compliance)) + "\n";
  return s;
}

inline std::string evaluations_csv(const std::vector<EvaluationRow>& rows) {
  std::string s = std::string(kEvaluationsHeader) + "\n";
  for (const auto& r : rows)
    s += std::to_string(r.fold) + "," + std::to_string(r.bundle_count) + "," + std::string(engine_name(r.engine)) +
         "," + format_day(r.day) + "," + std::to_string(r.hour) + "," + csv::fmt(r.c_up) + "," + csv::fmt(r.c_down) +
         "," + csv::fmt(r.p_up) + "," + csv::fmt(r.p_down) + "," + csv::fmt(r.profit) + "," +
         std::to_string(r.overbid_minutes) + "," + r.mask + "\n";
  return s;
}

inline std::string bids_csv(const std::vector<BidRow>& rows) {
  std::string s = std::string(kBidsHeader) + "\n";
  for (const auto& r : rows)
    s += std::to_string(r.fold) + "," + std::to_string(r.bundle_count) + "," + std::string(engine_name(r.engine)) +
         "," + std::to_string(r.hour) + "," + csv::fmt(r.c_up) + "," + csv::fmt(r.c_down) + "," +
         csv::fmt(r.in_sample_violation_freq) + "," + r.mask + "\n";
  return s;
}

inline std::string histogram_csv(const std::vector<SummaryRow>& rows) {
  std::string s = std::string(kHistogramHeader) + "\n";
  for (const auto& r : rows)
    for (int b = 0; b < kHistogramBuckets; ++b)
      s += std::to_string(r.fold) + "," + std::to_string(r.bundle_count) + "," + std::string(engine_name(r.engine)) +
           "," + r.mask + "," + csv::fixed(0.05 * b, 2) + "," + csv::fixed(0.05 * (b + 1), 2) + "," +
           std::to_string(r.day_histogram[static_cast<std::size_t>(b)]) + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Reading results back

namespace detail {

inline std::size_t parse_count(const csv::Reader& rd, std::string_view f, const char* name) {
  const double v = rd.number(f, name);
  if (v < 0.0 || v != std::floor(v)) rd.fail(std::string(name) + " must be a nonnegative integer");
  return static_cast<std::size_t>(v);
}

inline Engine parse_engine_field(const csv::Reader& rd, std::string_view f) {
  auto e = parse_engine(f);
  if (!e) rd.fail("unknown engine '" + std::string(f) + "'");
  return *e;
}

}  // namespace detail

inline std::vector<SummaryRow> read_summary(const std::string& path) {
  auto in = csv::open_in(path);
  csv::Reader rd(in, path);
  rd.expect_header(kSummaryHeader);
  std::vector<SummaryRow> out;
  std::vector<std::string_view> f;
  auto opt = [&](std::string_view v, const char* name) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    return rd.number(v, name);
  };
  while (rd.next(f)) {
    if (f.size() != 11) rd.fail("expected 11 columns");
    SummaryRow r;
    r.fold = detail::parse_count(rd, f[0], "fold");
    r.bundle_count = detail::parse_count(rd, f[1], "bundle_count");
    r.engine = detail::parse_engine_field(rd, f[2]);
    r.mask = std::string(f[3]);
    r.mean_hourly_profit = rd.number(f[4], "mean_hourly_profit_dkk");
    r.annual_profit = rd.number(f[5], "annual_profit_dkk");
    r.utilized_up = opt(f[6], "utilized_up");
    r.utilized_down = opt(f[7], "utilized_down");
    r.utilized_overall = opt(f[8], "utilized_overall");
    r.overbid_freq = rd.number(f[9], "overbid_freq");
    r.compliance = p90_compliance(r.overbid_freq);
    if (compliance_name(r.compliance) != f[10]) rd.fail("compliance does not match overbid_freq");
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<EvaluationRow> read_evaluations(const std::string& path) {
  auto in = csv::open_in(path);
  csv::Reader rd(in, path);
  rd.expect_header(kEvaluationsHeader);
  std::vector<EvaluationRow> out;
  std::vector<std::string_view> f;
  while (rd.next(f)) {
    if (f.size() != 12) rd.fail("expected 12 columns");
    EvaluationRow r;
    r.fold = detail::parse_count(rd, f[0], "fold");
    r.bundle_count = detail::parse_count(rd, f[1], "bundle");
    r.engine = detail::parse_engine_field(rd, f[2]);
    auto d = parse_day(f[3]);
    if (!d) rd.fail("bad day");
    r.day = *d;
    r.hour = static_cast<int>(detail::parse_count(rd, f[4], "hour"));
    r.c_up = rd.number(f[5], "c_up_kw");
    r.c_down = rd.number(f[6], "c_down_kw");
    r.p_up = rd.number(f[7], "p_up_kw");
    r.p_down = rd.number(f[8], "p_down_kw");
    r.profit = rd.number(f[9], "profit_dkk");
    r.overbid_minutes = static_cast<int>(detail::parse_count(rd, f[10], "overbid_minutes"));
    r.mask = std::string(f[11]);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<BidRow> read_bids(const std::string& path) {
  auto in = csv::open_in(path);
  csv::Reader rd(in, path);
  rd.expect_header(kBidsHeader);
  std::vector<BidRow> out;
  std::vector<std::string_view> f;
  while (rd.next(f)) {
    if (f.size() != 8) rd.fail("expected 8 columns");
    BidRow r;
    r.fold = detail::parse_count(rd, f[0], "fold");
    r.bundle_count = detail::parse_count(rd, f[1], "bundle");
    r.engine = detail::parse_engine_field(rd, f[2]);
    r.hour = static_cast<int>(detail::parse_count(rd, f[3], "hour"));
    r.c_up = rd.number(f[4], "c_up_kw");
    r.c_down = rd.number(f[5], "c_down_kw");
    r.in_sample_violation_freq = rd.number(f[6], "in_sample_violation_freq");
    r.mask = std::string(f[7]);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG plots

namespace svg {

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Series {
  std::string label;
  std::vector<double> y;  // one per category, NaN = missing
};

struct Chart {
  std::string title, x_label, y_label;
  std::vector<std::string> categories;
  std::vector<Series> series;
  bool bars{false};
};

inline std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '&') o += "&amp;";
    else if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else o += c;
  }
  return o;
}

inline std::string num(double v) { return csv::fixed(v, 2); }

// Categorical x axis, linear y axis starting at 0 (or the data minimum if
// negative). Lines or grouped bars.
inline std::string render(const Chart& c) {
  const double W = 720, H = 420, L = 80, R = 170, T = 40, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  double lo = 0.0, hi = 0.0;
  for (const auto& s : c.series)
    for (double v : s.y)
      if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  if (hi <= lo) hi = lo + 1.0;
  hi += 0.05 * (hi - lo);
  const std::size_t n = std::max<std::size_t>(1, c.categories.size());
  const double slot = pw / static_cast<double>(n);
  auto X = [&](std::size_t i) { return L + slot * (static_cast<double>(i) + 0.5); };
  auto Y = [&](double v) { return T + ph * (1.0 - (v - lo) / (hi - lo)); };

  std::string o = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + num(W / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + esc(c.title) + "</text>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = lo + (hi - lo) * t / 5.0;
    o += "<line x1=\"" + num(L) + "\" x2=\"" + num(L + pw) + "\" y1=\"" + num(Y(v)) + "\" y2=\"" + num(Y(v)) +
         "\" stroke=\"#ddd\"/>\n";
    o += "<text x=\"" + num(L - 6) + "\" y=\"" + num(Y(v) + 4) + "\" text-anchor=\"end\">" + num(v) + "</text>\n";
  }
  o += "<line x1=\"" + num(L) + "\" x2=\"" + num(L) + "\" y1=\"" + num(T) + "\" y2=\"" + num(T + ph) +
       "\" stroke=\"black\"/>\n";
  o += "<line x1=\"" + num(L) + "\" x2=\"" + num(L + pw) + "\" y1=\"" + num(Y(std::max(lo, 0.0))) + "\" y2=\"" +
       num(Y(std::max(lo, 0.0))) + "\" stroke=\"black\"/>\n";
  const std::size_t label_step = std::max<std::size_t>(1, n / 12);
  for (std::size_t i = 0; i < c.categories.size(); i += label_step)
    o += "<text x=\"" + num(X(i)) + "\" y=\"" + num(T + ph + 16) + "\" text-anchor=\"middle\">" +
         esc(c.categories[i]) + "</text>\n";
  o += "<text x=\"" + num(L + pw / 2) + "\" y=\"" + num(H - 18) + "\" text-anchor=\"middle\">" + esc(c.x_label) +
       "</text>\n";
  o += "<text transform=\"translate(18," + num(T + ph / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
       esc(c.y_label) + "</text>\n";

  const std::size_t ns = std::max<std::size_t>(1, c.series.size());
  for (std::size_t s = 0; s < c.series.size(); ++s) {
    const std::string col = kPalette[s % std::size(kPalette)];
    const auto& ys = c.series[s].y;
    if (c.bars) {
      const double bw = slot * 0.8 / static_cast<double>(ns);
      for (std::size_t i = 0; i < ys.size() && i < n; ++i) {
        if (!std::isfinite(ys[i])) continue;
        const double x = X(i) - slot * 0.4 + bw * static_cast<double>(s);
        const double y0 = Y(std::max(lo, 0.0)), y1 = Y(ys[i]);
        o += "<rect x=\"" + num(x) + "\" y=\"" + num(std::min(y0, y1)) + "\" width=\"" + num(bw) + "\" height=\"" +
             num(std::abs(y0 - y1)) + "\" fill=\"" + col + "\"/>\n";
      }
    } else {
      std::string pts;
      for (std::size_t i = 0; i < ys.size() && i < n; ++i)
        if (std::isfinite(ys[i])) pts += num(X(i)) + "," + num(Y(ys[i])) + " ";
      o += "<polyline fill=\"none\" stroke=\"" + col + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
      for (std::size_t i = 0; i < ys.size() && i < n; ++i)
        if (std::isfinite(ys[i]))
          o += "<circle cx=\"" + num(X(i)) + "\" cy=\"" + num(Y(ys[i])) + "\" r=\"3\" fill=\"" + col + "\"/>\n";
    }
    const double ly = T + 14 + 18 * static_cast<double>(s);
    o += "<rect x=\"" + num(L + pw + 14) + "\" y=\"" + num(ly - 9) + "\" width=\"12\" height=\"12\" fill=\"" + col +
         "\"/>\n";
    o += "<text x=\"" + num(L + pw + 32) + "\" y=\"" + num(ly + 1) + "\">" + esc(c.series[s].label) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace svg

namespace detail {

// Plots focus on the single-portfolio case and the base rules when present.
inline std::size_t focus_bundle_count(const std::set<std::size_t>& ks) { return ks.count(1) ? 1 : *ks.begin(); }
inline std::string focus_mask(const std::vector<std::string>& masks) {
  return std::find(masks.begin(), masks.end(), "base") != masks.end() ? "base" : masks.front();
}

template <class T>
void push_unique(std::vector<T>& v, const T& x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

}  // namespace detail

inline std::string plot_profit_vs_bundles(const std::vector<SummaryRow>& rows) {
  std::vector<std::size_t> ks;
  std::vector<Engine> engines;
  std::vector<std::string> masks;
  for (const auto& r : rows) {
    detail::push_unique(ks, r.bundle_count);
    detail::push_unique(engines, r.engine);
    detail::push_unique(masks, r.mask);
  }
  std::sort(ks.rbegin(), ks.rend());
  svg::Chart c{"Mean hourly profit by bundle count", "bundle count", "DKK per hour", {}, {}, false};
  for (auto k : ks) c.categories.push_back(std::to_string(k));
  for (const auto& m : masks)
    for (auto e : engines) {
      svg::Series s{std::string(engine_name(e)) + (masks.size() > 1 ? " / " + m : ""), {}};
      for (auto k : ks) {
        double sum = 0.0;
        int n = 0;
        for (const auto& r : rows)
          if (r.bundle_count == k && r.engine == e && r.mask == m) sum += r.mean_hourly_profit, ++n;
        s.y.push_back(n ? sum / n : std::nan(""));
      }
      c.series.push_back(std::move(s));
    }
  return svg::render(c);
}

inline std::string plot_overbid_histogram(const std::vector<EvaluationRow>& rows) {
  if (rows.empty()) return svg::render({"Per-day overbid frequency", "share of minutes overbid", "days", {}, {}, true});
  std::set<std::size_t> ks;
  std::vector<std::string> masks;
  std::vector<Engine> engines;
  for (const auto& r : rows) {
    ks.insert(r.bundle_count);
    detail::push_unique(masks, r.mask);
    detail::push_unique(engines, r.engine);
  }
  const std::size_t k = detail::focus_bundle_count(ks);
  const std::string mask = detail::focus_mask(masks);
  svg::Chart c{"Per-day overbid frequency (bundle count " + std::to_string(k) + ", " + mask + ")",
               "share of minutes overbid", "days", {}, {}, true};
  for (int b = 0; b < kHistogramBuckets; ++b) c.categories.push_back(std::to_string(5 * b) + "%");
  for (auto e : engines) {
    std::map<std::pair<std::size_t, std::int32_t>, std::uint64_t> per_day;
    for (const auto& r : rows)
      if (r.bundle_count == k && r.mask == mask && r.engine == e)
        per_day[{r.fold, r.day.index}] += static_cast<std::uint64_t>(r.overbid_minutes);
    svg::Series s{std::string(engine_name(e)), std::vector<double>(kHistogramBuckets, 0.0)};
    const std::uint64_t minutes = static_cast<std::uint64_t>(k) * kMinutesPerDay;
    for (const auto& [key, flagged] : per_day)
      s.y[std::min<std::uint64_t>(kHistogramBuckets - 1, flagged * kHistogramBuckets / minutes)] += 1.0;
    c.series.push_back(std::move(s));
  }
  return svg::render(c);
}

inline std::string plot_down_bid_by_hour(const std::vector<BidRow>& rows) {
  if (rows.empty()) return svg::render({"Mean downward bid by hour", "hour", "kW", {}, {}, false});
  std::set<std::size_t> ks;
  std::vector<std::string> masks;
  std::vector<Engine> engines;
  for (const auto& r : rows) {
    ks.insert(r.bundle_count);
    detail::push_unique(masks, r.mask);
    detail::push_unique(engines, r.engine);
  }
  const std::size_t k = detail::focus_bundle_count(ks);
  const Engine engine = std::find(engines.begin(), engines.end(), Engine::AlsoX) != engines.end() ? Engine::AlsoX
                                                                                                 : engines.front();
  svg::Chart c{"Mean downward bid by hour (" + std::string(engine_name(engine)) + ", bundle count " +
                   std::to_string(k) + ")",
               "hour of day", "kW", {}, {}, false};
  for (int h = 0; h < kHoursPerDay; ++h) c.categories.push_back(std::to_string(h));
  for (const auto& m : masks) {
    svg::Series s{m, {}};
    for (int h = 0; h < kHoursPerDay; ++h) {
      double sum = 0.0;
      int n = 0;
      for (const auto& r : rows)
        if (r.bundle_count == k && r.engine == engine && r.mask == m && r.hour == h) sum += r.c_down, ++n;
      s.y.push_back(n ? sum / n : std::nan(""));
    }
    c.series.push_back(std::move(s));
  }
  return svg::render(c);
}

inline void write_plots(const std::vector<SummaryRow>& summary, const std::vector<EvaluationRow>& evaluations,
                        const std::vector<BidRow>& bids, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir);
  auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
  csv::write_file(path("profit_vs_bundle_count.svg"), plot_profit_vs_bundles(summary));
  csv::write_file(path("overbid_histogram.svg"), plot_overbid_histogram(evaluations));
  csv::write_file(path("down_bid_by_hour.svg"), plot_down_bid_by_hour(bids));
}

// Writes every table and plot of a finished run; re-running overwrites the
// files with identical bytes.
inline void emit_report(const ExperimentReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir);
  auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };
  csv::write_file(path("summary.csv"), summary_csv(report.summary));
  csv::write_file(path("evaluations.csv"), evaluations_csv(report.evaluations));
  csv::write_file(path("bids.csv"), bids_csv(report.bids));
  csv::write_file(path("histogram.csv"), histogram_csv(report.summary));
  write_plots(report.summary, report.evaluations, report.bids, out_dir);
}

// Regenerates the plots from the CSV files of a previous run.
inline void regenerate_report(const std::string& in_dir, const std::string& out_dir) {
  namespace fs = std::filesystem;
  auto path = [&](const char* name) { return (fs::path(in_dir) / name).string(); };
  write_plots(read_summary(path("summary.csv")), read_evaluations(path("evaluations.csv")), read_bids(path("bids.csv")),
              out_dir);
}

}  // namespace flexbid
