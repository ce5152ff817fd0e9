// flexbid command-line front end: synth, run, report, downsample.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "flexbid/flexbid.hpp"

namespace {

using namespace flexbid;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("flexbid");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("FLEXBID_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only accept it when asked for.
    if (level != spdlog::level::off || std::string_view(env) == "off") spdlog::set_level(level);
    else spdlog::warn("FLEXBID_LOG='{}' is not a log level, keeping info", env);
  }
}

ExperimentConfig read_config(const std::string& path) {
  try {
    return load_config(path);
  } catch (const IoError&) {
    throw ConfigError("cannot read config file " + path);
  }
}

struct RunArgs {
  std::string config, out, engines, masks, bundles, data;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
};

// Flags override the matching config fields.
void apply_overrides(ExperimentConfig& cfg, const RunArgs& a) {
  if (!a.engines.empty()) cfg.engines = detail::parse_engines(split_list(a.engines));
  if (!a.masks.empty()) cfg.masks = detail::parse_masks(split_list(a.masks));
  if (!a.bundles.empty()) {
    cfg.bundle_counts.clear();
    for (const auto& s : split_list(a.bundles)) {
      std::size_t k = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), k);
      if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError("--bundles: '" + s + "' is not a count");
      cfg.bundle_counts.push_back(k);
    }
  }
  if (!a.data.empty()) cfg.data_dir = a.data;
  if (a.seed) cfg.master_seed = *a.seed;
  if (a.jobs) cfg.jobs = *a.jobs;
}

int cmd_synth(const std::string& config, const std::string& out) {
  const auto cfg = read_config(config);
  cfg.synthesis.fleet.validate();
  spdlog::info("synthesizing {} EVs over {} days", cfg.synthesis.fleet.n_ev, cfg.synthesis.fleet.n_days);
  const auto data = synthesize_dataset(cfg.synthesis);
  write_dataset(data, out);
  spdlog::info("wrote {} sessions to {}", data.sessions.size(), out);
  return 0;
}

int cmd_run(const RunArgs& a) {
  auto cfg = read_config(a.config);
  apply_overrides(cfg, a);
  cfg.validate();
  const auto data = load_or_synthesize(cfg);
  spdlog::info("{} sessions, {} days, {} samples per hour, {} job(s)", data.sessions.size(), data.n_days,
               cfg.samples(), cfg.jobs);
  RunOptions opts;
  opts.progress = [](const std::string& m) { spdlog::debug("{}", m); };
  const auto report = run_cross_validation(cfg, data, opts);
  emit_report(report, a.out);
  for (auto k : cfg.bundle_counts)
    for (auto e : cfg.engines)
      for (const auto& m : cfg.masks) {
        const auto s = pool_folds(report, k, e, m.name);
        spdlog::info("k={:<3} {:<6} {:<18} profit/h {:>10.3f} DKK  annual/EV {:>9.1f} DKK  overbid {:.4f} ({})", k,
                     engine_name(e), m.name, s.mean_hourly_profit, per_ev_annual_profit(s, report.fleet_size),
                     s.overbid_freq, compliance_name(s.compliance));
      }
  spdlog::info("results written to {}", a.out);
  return 0;
}

int cmd_report(const std::string& in, const std::string& out) {
  regenerate_report(in, out);
  spdlog::info("plots written to {}", out);
  return 0;
}

int cmd_downsample(const std::string& in, const std::string& out) {
  auto f = csv::open_in(in);
  const auto minutes = downsample_frequency(ingest_raw_frequency(f, in));
  csv::write_file(out, write_frequency(minutes));
  spdlog::info("{} minutes written to {}", minutes.size(), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"P90-compliant FCR-D capacity bidding for EV fleets"};
  app.require_subcommand(1);

  std::string synth_config, synth_out;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset (sessions, readings, prices, frequency)");
  synth->add_option("--config", synth_config, "Experiment config (JSON)")->required();
  synth->add_option("--out", synth_out, "Output directory")->required();

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Cross-validated backtest; writes CSV tables and SVG plots");
  run->add_option("--config", run_args.config, "Experiment config (JSON)")->required();
  run->add_option("--out", run_args.out, "Output directory")->required();
  run->add_option("--engines", run_args.engines, "Comma list of also-x, cvar, oracle");
  run->add_option("--masks", run_args.masks, "Comma list of base, up-relax, energy-relax");
  run->add_option("--bundles", run_args.bundles, "Comma list of bundle counts");
  run->add_option("--data", run_args.data, "Dataset directory (overrides data_dir)");
  run->add_option("--seed", run_args.seed, "Master seed");
  run->add_option("--jobs", run_args.jobs, "Worker threads");

  std::string report_in, report_out;
  auto* report = app.add_subcommand("report", "Regenerate plots from the CSV output of a run");
  report->add_option("--in", report_in, "Directory with summary.csv, evaluations.csv, bids.csv")->required();
  report->add_option("--out", report_out, "Output directory")->required();

  std::string ds_in, ds_out;
  auto* ds = app.add_subcommand("downsample", "Reduce raw frequency samples to per-minute min/max");
  ds->add_option("--in", ds_in, "Raw CSV (timestamp,hz)")->required();
  ds->add_option("--out", ds_out, "Per-minute CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*synth) return cmd_synth(synth_config, synth_out);
    if (*run) return cmd_run(run_args);
    if (*report) return cmd_report(report_in, report_out);
    if (*ds) return cmd_downsample(ds_in, ds_out);
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return 2;
  } catch (const DataError& e) {
    spdlog::error("data error: {}", e.what());
    return 3;
  } catch (const IoError& e) {
    spdlog::error("{}", e.what());
    return 3;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}
