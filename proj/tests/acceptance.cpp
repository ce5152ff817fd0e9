// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "flexbid/flexbid.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace flexbid;

namespace {

struct Outcome {
  bool pass{true};
  std::string detail;
};

const LerMask kMasks[] = {LerMask::base(), LerMask::upwards_relaxation(), LerMask::energy_relaxation()};

oracle::Flags flags(const LerMask& m) { return {m.enforce_upward_reservation, m.enforce_energy, m.enforce_down}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Paper-scale synthetic fleet: 28 EVs over 363 days is about 10,000 EV-days.
ExperimentConfig fleet_config(std::size_t n_ev) {
  ExperimentConfig c;
  c.synthesis.fleet.n_ev = n_ev;
  c.synthesis.fleet.n_days = 363;
  c.synthesis.fleet.rng_seed = 2024;
  c.n_days = 363;
  c.folds = 3;
  c.master_seed = 42;
  return c;
}

Outcome c1_sample_count() {
  const auto n = required_samples({0.1, 0.01, 2});
  return {n == 216, fmt("required_samples(0.1, 0.01, 2) = %zu", n)};
}

Outcome c2_budget() {
  const auto q = violation_budget(0.1, 216 * 60);
  return {q == 1296, fmt("q budget at eps 0.1, 216 x 60 pairs = %zu", q)};
}

// Tiny instances on a fixed generator; ALSO-X against the exact counting
// optimum and CVaR against the simplex LP of the CVaR program.
Outcome c3_brute_force() {
  Rng rng(3003);
  RiskConfig risk;
  risk.epsilon = 0.34;  // leaves a nonzero violation budget on most tiny instances
  int n = 0, also_ok = 0, cvar_ok = 0;
  double worst_gap = 0.0;
  std::string first_miss;
  for (int t = 0; t < 200; ++t, ++n) {
    const auto& mask = kMasks[t % 3];
    const std::size_t scen = 1 + rng.below(4);
    const int minutes = 1 + static_cast<int>(rng.below(3));
    const auto s = (t % 2) ? instances::tiny_continuous(rng, scen, minutes) : instances::tiny_set(rng, scen, minutes);
    const std::vector<FlexTriple> pairs(s.values.begin(), s.values.end());
    const auto q = violation_budget(risk.epsilon, pairs.size());
    const double exact = oracle::exact_counting(pairs, q, flags(mask)).objective();
    const double also = solve_also_x(s, risk, mask).total();
    if (std::abs(also - exact) <= 1e-6) {
      ++also_ok;
    } else {
      worst_gap = std::max(worst_gap, exact - also);
      if (first_miss.empty()) first_miss = fmt("instance %d: also-x %.6g vs exact %.6g", t, also, exact);
    }
    const double lp = oracle::cvar_lp(pairs, risk.alpha, flags(mask)).objective;
    if (std::abs(solve_cvar(s, risk, mask).total() - lp) <= 1e-6) ++cvar_ok;
  }
  std::string d = fmt("%d instances; also-x matches exact %d, cvar matches LP %d; largest also-x gap %.6g kW", n,
                      also_ok, cvar_ok, worst_gap);
  if (!first_miss.empty()) d += "; first miss " + first_miss;
  return {also_ok == n && cvar_ok == n, d};
}

Outcome c4_oracle() {
  Rng rng(4004);
  int mismatches = 0, penalised = 0;
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto& mask = kMasks[t % 3];
    const auto s = instances::random_set(rng, 1, 60);
    const std::vector<FlexTriple> minutes(s.values.begin(), s.values.end());
    const auto b = oracle_bid(minutes, mask);
    const auto v = oracle::deterministic_bid(minutes, flags(mask));
    const double gap = v ? std::abs(b.total() - v->objective()) : 1e300;
    worst = std::max(worst, gap);
    if (gap > 1e-9) ++mismatches;
    const PriceRecord price{Minute{0}, 200.0, 100.0};
    const auto ev = evaluate_hour(b, minutes, ActivationSignal::quiet(60), price, {}, mask);
    if (ev.p_up != 0.0 || ev.p_down != 0.0 || ev.overbid_minutes() != 0) ++penalised;
  }
  return {mismatches == 0 && penalised == 0,
          fmt("1000 hours: %d mismatches (max gap %.3g kW), %d with penalties", mismatches, worst, penalised)};
}

struct SuiteRow {
  ScenarioSet s;
  double also[3], cvar[3];
};

std::vector<SuiteRow> random_suite() {
  Rng rng(5005);
  std::vector<SuiteRow> out;
  out.reserve(1000);
  for (int t = 0; t < 1000; ++t) {
    SuiteRow r{instances::random_set(rng, 10 + rng.below(51), 60), {}, {}};
    for (int m = 0; m < 3; ++m) {
      r.also[m] = solve_also_x(r.s, {}, kMasks[m]).total();
      r.cvar[m] = solve_cvar(r.s, {}, kMasks[m]).total();
    }
    out.push_back(std::move(r));
  }
  return out;
}

double tol(const ScenarioSet& s) {
  double m = 1.0;
  for (const auto& f : s.values) m = std::max({m, f.f_up, f.f_down});
  return 1e-9 * m;
}

Outcome c5_conservative(const std::vector<SuiteRow>& suite) {
  int bad = 0, checked = 0;
  for (const auto& r : suite)
    for (int m = 0; m < 3; ++m, ++checked)
      if (r.cvar[m] > r.also[m] + tol(r.s)) ++bad;
  return {bad == 0, fmt("%d (instance, mask) pairs, CVaR above ALSO-X in %d", checked, bad)};
}

Outcome c6_relaxation(const std::vector<SuiteRow>& suite) {
  if (suite.empty()) return {false, "random suite was not built"};
  int bad_also = 0, bad_cvar = 0;
  for (const auto& r : suite)
    for (int m = 1; m < 3; ++m) {
      if (r.also[m] < r.also[0] - tol(r.s)) ++bad_also;
      if (r.cvar[m] < r.cvar[0] - tol(r.s)) ++bad_cvar;
    }
  return {bad_also == 0 && bad_cvar == 0,
          fmt("%zu instances x 2 relaxations: ALSO-X decreases %d, CVaR decreases %d", suite.size(), bad_also, bad_cvar)};
}

Outcome c7_p90() {
  auto cfg = fleet_config(28);
  cfg.bundle_counts = {1};
  cfg.engines = {Engine::AlsoX, Engine::CVaR};
  const auto data = load_or_synthesize(cfg);
  const auto r = run_cross_validation(cfg, data);
  const double cap = 0.1 + 1.0 / (216.0 * 60.0);
  int over = 0, solved = 0;
  for (const auto& b : r.bids)
    if (b.engine == Engine::AlsoX) {
      ++solved;
      if (b.in_sample_violation_freq > cap) ++over;
    }
  const auto also = pool_folds(r, 1, Engine::AlsoX, "base");
  const auto cvar = pool_folds(r, 1, Engine::CVaR, "base");
  const bool pass = over == 0 && also.overbid_freq >= 0.06 && also.overbid_freq <= 0.14 &&
                    cvar.overbid_freq < also.overbid_freq;
  return {pass, fmt("%zu EV-days; in-sample above cap on %d/%d hours; OOS overbid ALSO-X %.4f, CVaR %.4f",
                    28 * cfg.n_days, over, solved, also.overbid_freq, cvar.overbid_freq)};
}

Outcome c8_synergy() {
  auto cfg = fleet_config(140);
  cfg.bundle_counts = {70, 1};
  cfg.engines = {Engine::AlsoX};
  const auto r = run_cross_validation(cfg, load_or_synthesize(cfg));
  std::vector<double> p1(cfg.folds), p70(cfg.folds);
  for (const auto& s : r.summary) (s.bundle_count == 1 ? p1 : p70)[s.fold] = s.mean_hourly_profit;
  int wins = 0;
  std::string d = "mean hourly profit k=1 vs k=70 per fold:";
  for (std::size_t f = 0; f < cfg.folds; ++f) {
    wins += p1[f] > p70[f];
    d += fmt(" %.2f/%.2f", p1[f], p70[f]);
  }
  d += fmt(" (k=1 ahead in %d of %zu)", wins, cfg.folds);
  return {wins >= 2, d};
}

Outcome c9_flexibility() {
  FleetSynthesisConfig fc;
  fc.n_ev = 28;
  fc.n_days = 363;
  fc.rng_seed = 909;
  const auto sessions = synthesize_fleet(fc);
  std::size_t minutes = 0, bad = 0;
  for (const auto& s : sessions)
    for (const auto& f : session_flexibility(s)) {
      ++minutes;
      if (!(f.f_energy <= f.f_down)) ++bad;
    }
  Fleet fleet(sessions);
  const auto& ids = fleet.ev_ids();
  const auto full = fleet.aggregate_series(ids, fc.start_day, fc.n_days);
  double worst = 0.0;
  for (std::size_t k : {2u, 7u, 28u}) {
    std::vector<FlexSeries> sum(fc.n_days);
    for (const auto& m : partition_bundles(ids, k, 99 + k).members(ids)) {
      const auto part = fleet.aggregate_series(m, fc.start_day, fc.n_days);
      for (std::size_t d = 0; d < part.size(); ++d)
        for (int i = 0; i < kMinutesPerDay; ++i) sum[d].values[i] += part[d].values[i];
    }
    for (std::size_t d = 0; d < full.size(); ++d)
      for (int i = 0; i < kMinutesPerDay; ++i) {
        const auto& a = sum[d].values[i];
        const auto& b = full[d].values[i];
        worst = std::max({worst, std::abs(a.f_up - b.f_up), std::abs(a.f_down - b.f_down),
                          std::abs(a.f_energy - b.f_energy)});
      }
  }
  return {minutes >= 1000000 && bad == 0 && worst <= 1e-9,
          fmt("%zu EV-minutes, %zu with f_energy > f_down; bundle sum vs fleet max error %.3g kW", minutes, bad, worst)};
}

Outcome c10_settlement() {
  std::vector<std::string> fails;
  auto near = [&](const char* what, double got, double want) {
    if (std::abs(got - want) > 1e-12) fails.push_back(fmt("%s %.15g != %.15g", what, got, want));
  };
  const auto quiet = ActivationSignal::quiet(60);
  {
    // Upward shortfall 0.1 kW, prices 10 DKK/MW/h, multiplier 5.
    const std::vector<FlexTriple> r(60, FlexTriple{1.9, 100.0, 100.0});
    const auto ev = evaluate_hour(Bid{1.0, 5.0, 0}, r, quiet, {Minute{0}, 10.0, 10.0}, {}, LerMask::base());
    near("fixture 1 profit", ev.profit, 0.055);
  }
  {
    // Downward energy shortfall 1.5 kW in one minute, power shortfall 1 kW in another.
    std::vector<FlexTriple> r(60, FlexTriple{10.0, 9.0, 9.0});
    r[17] = {10.0, 9.0, 6.5};
    r[40] = {10.0, 7.0, 7.0};
    const auto ev = evaluate_hour(Bid{0.0, 8.0, 0}, r, quiet, {Minute{0}, 30.0, 20.0}, {}, LerMask::base());
    near("fixture 2 profit", ev.profit, 0.01);  // 1e-3 (8*20 - 5*20*1.5)
  }
  {
    // Both directions short: c_up 3, c_down 10 against f_up 4 (needs 5), f_down 8.
    const std::vector<FlexTriple> r(60, FlexTriple{4.0, 8.0, 8.0});
    PenaltyPricing p;
    p.multiplier = 2.0;
    const auto ev = evaluate_hour(Bid{3.0, 10.0, 0}, r, quiet, {Minute{0}, 300.0, 150.0}, p, LerMask::base());
    near("fixture 3 p_up", ev.p_up, 1.0);
    near("fixture 3 p_down", ev.p_down, 2.0);
    near("fixture 3 profit", ev.profit, 1e-3 * (3 * 300 + 10 * 150 - 2 * 300 * 1 - 2 * 150 * 2));
  }
  const bool cls = p90_compliance(0.0389) == Compliance::Compliant && p90_compliance(0.1015) == Compliance::BufferZone;
  if (!cls) fails.push_back("compliance classification");
  std::string d = "3 settlement fixtures at 1e-12 DKK, 0.0389 -> Compliant, 0.1015 -> BufferZone";
  for (const auto& f : fails) d += "; " + f;
  return {fails.empty(), d};
}

Outcome c11_determinism() {
  ExperimentConfig cfg = fleet_config(14);
  cfg.synthesis.fleet.n_days = 60;
  cfg.n_days = 60;
  cfg.bundle_counts = {7, 2, 1};
  cfg.sample_count = 30;
  cfg.masks = detail::parse_masks({"base", "up-relax", "energy-relax"});
  const auto data = load_or_synthesize(cfg);
  const auto a = summary_csv(run_cross_validation(cfg, data).summary);
  const auto b = summary_csv(run_cross_validation(cfg, data).summary);
  cfg.jobs = 4;
  const auto c = summary_csv(run_cross_validation(cfg, data).summary);
  cfg.jobs = 2;
  const auto d = summary_csv(run_cross_validation(cfg, load_or_synthesize(cfg)).summary);
  const bool pass = a == b && a == c && a == d;
  return {pass, fmt("summary.csv (%zu bytes) identical across 2 runs and jobs 1/2/4: %s", a.size(), pass ? "yes" : "no")};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("criterion %2d %s: %s (%s) [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };
  report(1, "sample count", c1_sample_count);
  report(2, "ALSO-X q budget", c2_budget);
  report(3, "brute-force equivalence", c3_brute_force);
  report(4, "oracle closed form", c4_oracle);
  std::vector<SuiteRow> suite;
  report(5, "CVaR conservativeness", [&] {
    suite = random_suite();
    return c5_conservative(suite);
  });
  report(6, "relaxation monotonicity", [&] { return c6_relaxation(suite); });
  report(7, "P90 in-sample and out-of-sample", c7_p90);
  report(8, "bundle synergy direction", c8_synergy);
  report(9, "flexibility invariants", c9_flexibility);
  report(10, "settlement arithmetic", c10_settlement);
  report(11, "determinism", c11_determinism);
  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
