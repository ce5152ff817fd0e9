#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flexbid/bidding.hpp"
#include "flexbid/config.hpp"
#include "flexbid/evaluation.hpp"
#include "flexbid/flexibility.hpp"
#include "flexbid/parallel.hpp"
#include "flexbid/random.hpp"
#include "flexbid/scenarios.hpp"

namespace flexbid {

inline constexpr int kHistogramBuckets = 20;  // 5 % wide, last one closed

struct EvaluationRow {
  std::size_t fold{0};
  std::size_t bundle_count{0};
  Engine engine{Engine::AlsoX};
  std::string mask;
  Day day;
  int hour{0};
  double c_up{0.0}, c_down{0.0};
  double p_up{0.0}, p_down{0.0};
  double profit{0.0};
  int overbid_minutes{0};  // summed over bundles
};

struct BidRow {
  std::size_t fold{0};
  std::size_t bundle_count{0};
  Engine engine{Engine::AlsoX};
  std::string mask;
  int hour{0};
  double c_up{0.0}, c_down{0.0};  // summed over bundles
  double in_sample_violation_freq{0.0};  // mean over bundles
};

struct SummaryRow {
  std::size_t fold{0};
  std::size_t bundle_count{0};
  Engine engine{Engine::AlsoX};
  std::string mask;
  double mean_hourly_profit{0.0};
  double annual_profit{0.0};
  std::optional<double> utilized_up, utilized_down, utilized_overall;
  double overbid_freq{0.0};
  Compliance compliance{Compliance::Compliant};
  std::array<std::uint32_t, kHistogramBuckets> day_histogram{};

  // Raw totals, so that cells can be pooled across folds.
  double total_profit{0.0};
  std::uint64_t hours{0};
  UtilizationAccumulator utilization;
  OverbidCounter overbids;
};

struct ExperimentReport {
  std::size_t fleet_size{0};
  std::vector<std::vector<Day>> fold_days;
  std::vector<SummaryRow> summary;
  std::vector<EvaluationRow> evaluations;
  std::vector<BidRow> bids;
};

inline double per_ev_annual_profit(const SummaryRow& row, std::size_t fleet_size) {
  return row.annual_profit / static_cast<double>(fleet_size);
}

struct RunOptions {
  std::function<void(const std::string&)> progress;
};

// Random, near-equal split of day positions [0, n_days) into folds; each
// fold is returned sorted.
inline std::vector<std::vector<std::size_t>> assign_folds(std::size_t n_days, std::size_t folds, std::uint64_t seed) {
  if (folds < 2 || folds > n_days) throw ConfigError("folds must lie in [2, n_days]");
  std::vector<std::size_t> order(n_days);
  for (std::size_t i = 0; i < n_days; ++i) order[i] = i;
  Rng rng(derive_seed(seed, {0xF01D}));
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t i = 0; i < n_days; ++i) out[i % folds].push_back(order[i]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

namespace detail {

inline constexpr std::uint64_t kPartitionStream = 0xB0D1;
inline constexpr std::uint64_t kScenarioStream = 0x5CE7;

struct EvalCell {
  double c_up{0.0}, c_down{0.0}, p_up{0.0}, p_down{0.0}, profit{0.0};
  int overbid{0};
  UtilizationAccumulator util;

  void merge(const EvalCell& o) {
    c_up += o.c_up;
    c_down += o.c_down;
    p_up += o.p_up;
    p_down += o.p_down;
    profit += o.profit;
    overbid += o.overbid;
    util.merge(o.util);
  }
};

struct BidCell {
  double c_up{0.0}, c_down{0.0}, freq{0.0};
  void merge(const BidCell& o) {
    c_up += o.c_up;
    c_down += o.c_down;
    freq += o.freq;
  }
};

// Dense indexing of (engine, mask, day position, hour) and
// (fold, engine, mask, hour). Day positions enumerate the folds' test days
// fold after fold.
struct Layout {
  std::size_t engines{0}, masks{0}, days{0}, folds{0};
  std::vector<std::size_t> fold_offset;

  std::size_t eval(std::size_t e, std::size_t m, std::size_t pos, int h) const {
    return ((e * masks + m) * days + pos) * kHoursPerDay + static_cast<std::size_t>(h);
  }
  std::size_t eval_size() const { return engines * masks * days * kHoursPerDay; }
  std::size_t bid(std::size_t f, std::size_t e, std::size_t m, int h) const {
    return ((f * engines + e) * masks + m) * kHoursPerDay + static_cast<std::size_t>(h);
  }
  std::size_t bid_size() const { return folds * engines * masks * kHoursPerDay; }
};

struct Outcome {
  std::vector<EvalCell> evals;
  std::vector<BidCell> bids;

  explicit Outcome(const Layout& l) : evals(l.eval_size()), bids(l.bid_size()) {}
  void merge(const Outcome& o) {
    for (std::size_t i = 0; i < evals.size(); ++i) evals[i].merge(o.evals[i]);
    for (std::size_t i = 0; i < bids.size(); ++i) bids[i].merge(o.bids[i]);
  }
};

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, const Dataset& data, const RunOptions& opts)
      : cfg_(cfg), data_(data), opts_(opts), fleet_(data.sessions) {
    cfg_.validate();
    data_.validate();
    if (data_.n_days != cfg_.n_days)
      throw DataError("dataset horizon (" + std::to_string(data_.n_days) + " days) differs from n_days");
    folds_ = assign_folds(cfg_.n_days, cfg_.folds, cfg_.master_seed);
    layout_.engines = cfg_.engines.size();
    layout_.masks = cfg_.masks.size();
    layout_.days = cfg_.n_days;
    layout_.folds = cfg_.folds;
    std::size_t off = 0;
    for (const auto& f : folds_) {
      layout_.fold_offset.push_back(off);
      off += f.size();
    }
    samples_ = cfg_.samples();
    activation_.reserve(cfg_.n_days * kHoursPerDay);
    for (std::size_t d = 0; d < cfg_.n_days; ++d)
      for (int h = 0; h < kHoursPerDay; ++h) activation_.push_back(activation_signal(data_.frequency_hour(d, h), cfg_.droop));
  }

  ExperimentReport run() {
    ExperimentReport report;
    report.fleet_size = fleet_.ev_ids().size();
    if (report.fleet_size == 0) throw EmptyInput("fleet has no charging sessions");
    for (const auto& f : folds_) {
      std::vector<Day> days;
      for (auto pos : f) days.push_back(day_at(pos));
      report.fold_days.push_back(std::move(days));
    }
    const auto full = fleet_.aggregate_series(fleet_.ev_ids(), data_.first_day, cfg_.n_days);
    std::vector<Outcome> per_k;
    for (std::size_t k : cfg_.bundle_counts) per_k.push_back(run_bundle_count(k, full));
    for (std::size_t f = 0; f < folds_.size(); ++f)
      for (std::size_t ki = 0; ki < cfg_.bundle_counts.size(); ++ki) emit(report, f, ki, per_k[ki]);
    return report;
  }

 private:
  Day day_at(std::size_t pos) const { return Day{data_.first_day.index + static_cast<std::int32_t>(pos)}; }

  void log(const std::string& msg) const {
    if (opts_.progress) opts_.progress(msg);
  }

  Outcome run_bundle_count(std::size_t k, const std::vector<FlexSeries>& full) {
    const auto partition =
        partition_bundles(fleet_.ev_ids(), k, derive_seed(cfg_.master_seed, {kPartitionStream, k}));
    const auto members = partition.members(fleet_.ev_ids());
    const unsigned outer = static_cast<unsigned>(std::min<std::size_t>(cfg_.jobs, k));
    const unsigned inner = std::max(1u, cfg_.jobs / outer);

    Outcome total(layout_);
    std::vector<FlexSeries> check(cfg_.n_days);
    for (std::size_t d = 0; d < cfg_.n_days; ++d) check[d].day = day_at(d);
    std::mutex check_mu;

    // Chunks of `outer` bundles run concurrently and are merged in bundle
    // order, so floating-point sums do not depend on the thread count.
    for (std::size_t first = 0; first < k; first += outer) {
      const std::size_t n = std::min<std::size_t>(outer, k - first);
      std::vector<std::optional<Outcome>> chunk(n);
      parallel_for(n, outer, [&](std::size_t i) {
        const std::size_t b = first + i;
        const auto series = fleet_.aggregate_series(members[b], data_.first_day, cfg_.n_days);
        {
          std::lock_guard lock(check_mu);
          for (std::size_t d = 0; d < series.size(); ++d)
            for (int m = 0; m < kMinutesPerDay; ++m) check[d].values[m] += series[d].values[m];
        }
        chunk[i].emplace(run_bundle(k, b, series, inner));
      });
      for (auto& c : chunk) total.merge(*c);
      log("bundle_count " + std::to_string(k) + ": " + std::to_string(first + n) + "/" + std::to_string(k) +
          " bundles done");
    }
    verify_aggregation(check, full, k);
    return total;
  }

  static void verify_aggregation(const std::vector<FlexSeries>& sum, const std::vector<FlexSeries>& full,
                                 std::size_t k) {
    for (std::size_t d = 0; d < full.size(); ++d)
      for (int m = 0; m < kMinutesPerDay; ++m) {
        const auto& a = sum[d].values[m];
        const auto& b = full[d].values[m];
        if (std::abs(a.f_up - b.f_up) > 1e-9 || std::abs(a.f_down - b.f_down) > 1e-9 ||
            std::abs(a.f_energy - b.f_energy) > 1e-9)
          throw std::logic_error("bundle flexibility does not add up to the fleet total at bundle_count " +
                                 std::to_string(k));
      }
  }

  Outcome run_bundle(std::size_t k, std::size_t b, const std::vector<FlexSeries>& series, unsigned inner) const {
    Outcome out(layout_);
    for (std::size_t f = 0; f < folds_.size(); ++f) {
      const auto& test = folds_[f];
      std::vector<bool> is_test(cfg_.n_days, false);
      for (auto pos : test) is_test[pos] = true;
      std::vector<FlexSeries> training;
      training.reserve(cfg_.n_days - test.size());
      for (std::size_t d = 0; d < cfg_.n_days; ++d)
        if (!is_test[d]) training.push_back(series[d]);

      parallel_for(kHoursPerDay, inner, [&](std::size_t hh) {
        const int h = static_cast<int>(hh);
        const std::uint64_t hour_stream = cfg_.share_hour_draws ? kHoursPerDay : hh;
        const auto seed = derive_seed(cfg_.master_seed, {kScenarioStream, k, b, f, hour_stream});
        std::optional<ScenarioSet> scen;
        for (std::size_t e = 0; e < cfg_.engines.size(); ++e) {
          if (cfg_.engines[e] == Engine::Oracle) continue;
          if (!scen) {
            scen = build_scenarios(training, h, samples_, seed);
            for (Day d : scen->source_days)
              if (is_test[static_cast<std::size_t>(d.index - data_.first_day.index)])
                throw std::logic_error("test day leaked into a training scenario set");
          }
          for (std::size_t m = 0; m < cfg_.masks.size(); ++m) {
            const auto& mask = cfg_.masks[m].mask;
            const Bid bid = cfg_.engines[e] == Engine::AlsoX ? solve_also_x(*scen, cfg_.risk, mask)
                                                             : solve_cvar(*scen, cfg_.risk, mask);
            auto& bc = out.bids[layout_.bid(f, e, m, h)];
            bc.c_up = bid.c_up;
            bc.c_down = bid.c_down;
            bc.freq = in_sample_violation_frequency(bid, *scen, mask);
            for (std::size_t i = 0; i < test.size(); ++i) evaluate(out, series, bid, e, m, f, i, h);
          }
        }
        for (std::size_t e = 0; e < cfg_.engines.size(); ++e) {
          if (cfg_.engines[e] != Engine::Oracle) continue;
          for (std::size_t m = 0; m < cfg_.masks.size(); ++m)
            for (std::size_t i = 0; i < test.size(); ++i) {
              const Bid bid = oracle_bid(series[test[i]].hour(h), cfg_.masks[m].mask, h);
              evaluate(out, series, bid, e, m, f, i, h);
            }
        }
      });
    }
    return out;
  }

  void evaluate(Outcome& out, const std::vector<FlexSeries>& series, const Bid& bid, std::size_t e, std::size_t m,
                std::size_t f, std::size_t i, int h) const {
    const std::size_t day = folds_[f][i];
    const auto realized = series[day].hour(h);
    const auto ev = evaluate_hour(bid, realized, activation_[day * kHoursPerDay + static_cast<std::size_t>(h)],
                                  data_.price(day, h), cfg_.penalty, cfg_.masks[m].mask);
    auto& c = out.evals[layout_.eval(e, m, layout_.fold_offset[f] + i, h)];
    c.c_up = bid.c_up;
    c.c_down = bid.c_down;
    c.p_up = ev.p_up;
    c.p_down = ev.p_down;
    c.profit = ev.profit;
    c.overbid = ev.overbid_minutes();
    c.util = {};
    c.util.add(bid, realized);
  }

  void emit(ExperimentReport& report, std::size_t f, std::size_t ki, const Outcome& o) const {
    const std::size_t k = cfg_.bundle_counts[ki];
    const auto& test = folds_[f];
    for (std::size_t e = 0; e < cfg_.engines.size(); ++e)
      for (std::size_t m = 0; m < cfg_.masks.size(); ++m) {
        SummaryRow s;
        s.fold = f;
        s.bundle_count = k;
        s.engine = cfg_.engines[e];
        s.mask = cfg_.masks[m].name;
        for (std::size_t i = 0; i < test.size(); ++i) {
          std::uint64_t day_flagged = 0;
          for (int h = 0; h < kHoursPerDay; ++h) {
            const auto& c = o.evals[layout_.eval(e, m, layout_.fold_offset[f] + i, h)];
            report.evaluations.push_back(
                {f, k, s.engine, s.mask, day_at(test[i]), h, c.c_up, c.c_down, c.p_up, c.p_down, c.profit, c.overbid});
            s.total_profit += c.profit;
            s.hours += 1;
            s.utilization.merge(c.util);
            day_flagged += static_cast<std::uint64_t>(c.overbid);
          }
          const std::uint64_t day_minutes = static_cast<std::uint64_t>(k) * kMinutesPerDay;
          s.overbids.flagged += day_flagged;
          s.overbids.minutes += day_minutes;
          const auto bucket = std::min<std::uint64_t>(kHistogramBuckets - 1, day_flagged * kHistogramBuckets / day_minutes);
          ++s.day_histogram[bucket];
        }
        finish(s);
        report.summary.push_back(s);
        if (s.engine == Engine::Oracle) continue;
        for (int h = 0; h < kHoursPerDay; ++h) {
          const auto& b = o.bids[layout_.bid(f, e, m, h)];
          report.bids.push_back({f, k, s.engine, s.mask, h, b.c_up, b.c_down, b.freq / static_cast<double>(k)});
        }
      }
  }

 public:
  static void finish(SummaryRow& s) {
    s.mean_hourly_profit = s.hours == 0 ? 0.0 : s.total_profit / static_cast<double>(s.hours);
    s.annual_profit = s.mean_hourly_profit * 8760.0;
    s.utilized_up = s.utilization.up();
    s.utilized_down = s.utilization.down();
    s.utilized_overall = s.utilization.overall();
    s.overbid_freq = s.overbids.frequency();
    s.compliance = p90_compliance(s.overbid_freq);
  }

 private:
  ExperimentConfig cfg_;
  const Dataset& data_;
  RunOptions opts_;
  Fleet fleet_;
  std::vector<std::vector<std::size_t>> folds_;
  Layout layout_;
  std::size_t samples_{0};
  std::vector<ActivationSignal> activation_;
};

}  // namespace detail

// Cross-validated backtest of every configured (bundle count, engine, mask).
inline ExperimentReport run_cross_validation(const ExperimentConfig& config, const Dataset& data,
                                             const RunOptions& opts = {}) {
  return detail::Runner(config, data, opts).run();
}

// A summary cell pooled over all folds.
inline SummaryRow pool_folds(const ExperimentReport& report, std::size_t bundle_count, Engine engine,
                             const std::string& mask) {
  SummaryRow s;
  s.fold = report.fold_days.size();
  s.bundle_count = bundle_count;
  s.engine = engine;
  s.mask = mask;
  bool any = false;
  for (const auto& r : report.summary) {
    if (r.bundle_count != bundle_count || r.engine != engine || r.mask != mask) continue;
    any = true;
    s.total_profit += r.total_profit;
    s.hours += r.hours;
    s.utilization.merge(r.utilization);
    s.overbids.merge(r.overbids);
    for (int i = 0; i < kHistogramBuckets; ++i) s.day_histogram[i] += r.day_histogram[i];
  }
  if (!any) throw ConfigError("no such cell in the report");
  detail::Runner::finish(s);
  return s;
}

struct SweepPoint {
  std::size_t bundle_count{0};
  Engine engine{Engine::AlsoX};
  std::string mask;
  double mean_hourly_profit{0.0};
  std::vector<double> fold_mean_hourly_profit;
  double mean_c_up{0.0}, mean_c_down{0.0};  // portfolio totals, averaged over hours
};

// Portfolio profit and capacity per bundle count: bundles' bids and profits
// are added up for every hour.
inline std::vector<SweepPoint> run_bundle_sweep(const ExperimentConfig& config, const Dataset& data,
                                                const RunOptions& opts = {}, ExperimentReport* report_out = nullptr) {
  auto report = run_cross_validation(config, data, opts);
  std::vector<SweepPoint> out;
  for (auto k : config.bundle_counts)
    for (auto e : config.engines)
      for (const auto& m : config.masks) {
        SweepPoint p;
        p.bundle_count = k;
        p.engine = e;
        p.mask = m.name;
        p.mean_hourly_profit = pool_folds(report, k, e, m.name).mean_hourly_profit;
        for (const auto& r : report.summary)
          if (r.bundle_count == k && r.engine == e && r.mask == m.name)
            p.fold_mean_hourly_profit.push_back(r.mean_hourly_profit);
        double up = 0.0, down = 0.0;
        std::size_t n = 0;
        for (const auto& r : report.evaluations)
          if (r.bundle_count == k && r.engine == e && r.mask == m.name) up += r.c_up, down += r.c_down, ++n;
        p.mean_c_up = n ? up / static_cast<double>(n) : 0.0;
        p.mean_c_down = n ? down / static_cast<double>(n) : 0.0;
        out.push_back(std::move(p));
      }
  if (report_out) *report_out = std::move(report);
  return out;
}

struct RelaxationRow {
  std::size_t bundle_count{0};
  Engine engine{Engine::AlsoX};
  std::string mask;
  double annual_profit{0.0};
  std::optional<double> utilized_up, utilized_down;
};

// Same experiment under the base rules and both relaxations.
inline std::vector<RelaxationRow> run_ler_relaxation(ExperimentConfig config, const Dataset& data,
                                                     const RunOptions& opts = {}) {
  std::set<std::string> names;
  for (const auto& m : config.masks) names.insert(m.name);
  for (const char* need : {"base", "upwards_relaxation", "energy_relaxation"})
    if (!names.count(need)) throw ConfigError(std::string("LER relaxation run needs mask '") + need + "'");
  const auto report = run_cross_validation(config, data, opts);
  std::vector<RelaxationRow> out;
  for (auto k : config.bundle_counts)
    for (auto e : config.engines)
      for (const auto& m : config.masks) {
        const auto s = pool_folds(report, k, e, m.name);
        out.push_back({k, e, m.name, s.annual_profit, s.utilized_up, s.utilized_down});
      }
  return out;
}

}  // namespace flexbid
