// joss-sim: trace generation, simulation runs and report comparison.

#include <sys/resource.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "joss/experiment.hpp"
#include "joss/metrics.hpp"
#include "joss/scenario.hpp"

namespace fs = std::filesystem;
using namespace joss;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitSimulation = 2;

struct Overrides {
  std::string config;
  std::string schedulers;
  std::optional<std::uint64_t> seed_placement;
  std::optional<std::uint64_t> seed_workload;
};

ScenarioConfig load_with_overrides(const Overrides& o) {
  if (o.config.empty()) throw ConfigError("--config is required (or set JOSS_CONFIG)");
  ScenarioConfig config = load_scenario(o.config);
  auto& seeds = config.seeds;
  if (o.seed_placement) {
    if (seeds.engine == seeds.placement) seeds.engine = *o.seed_placement;
    seeds.placement = *o.seed_placement;
  }
  if (o.seed_workload) {
    if (seeds.fp == seeds.workload) seeds.fp = *o.seed_workload;
    seeds.workload = *o.seed_workload;
  }
  if (!o.schedulers.empty()) config.schedulers = parse_scheduler_list(o.schedulers);
  for (const auto& w : config.cost.warnings()) fmt::print(stderr, "warning: {}\n", w);
  return config;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Scenario file")->envname("JOSS_CONFIG");
  cmd->add_option("--seed-placement", o.seed_placement, "Override the placement seed")
      ->envname("JOSS_SEED_PLACEMENT");
  cmd->add_option("--seed-workload", o.seed_workload, "Override the workload seed")->envname("JOSS_SEED_WORKLOAD");
}

int cmd_generate_trace(const Overrides& o, const std::string& out) {
  const ScenarioConfig config = load_with_overrides(o);
  const WorkloadTrace trace = scenario_trace(config);
  if (out.empty()) {
    write_trace(std::cout, trace);
  } else {
    save_trace(trace, out);
  }
  std::map<std::string, std::size_t> mix;
  for (const auto& j : trace.jobs) ++mix[j.profile];
  const double mean_interval = trace.jobs.empty() ? 0.0 : trace.jobs.back().arrival / trace.jobs.size();
  fmt::print(stderr, "jobs {}\n", trace.jobs.size());
  for (const auto& [profile, count] : mix) fmt::print(stderr, "  {} {}\n", profile, count);
  fmt::print(stderr, "mean interval {:.2f} s\n", mean_interval);
  return 0;
}

int cmd_run(const Overrides& o, const std::string& out_dir, bool event_log, const std::string& format,
            bool parallel) {
  const ScenarioConfig config = load_with_overrides(o);
  const auto experiment = Experiment::from_scenario(config);
  const RunOptions base = run_options(config);
  fs::create_directories(out_dir);

  std::vector<MetricsReport> reports;
  if (event_log) {
    for (SchedulerKind kind : config.schedulers) {
      const fs::path log_path = fs::path(out_dir) / fmt::format("{}-{}.events.log", config.name, to_string(kind));
      std::ofstream log(log_path);
      if (!log) throw std::runtime_error("cannot open " + log_path.string());
      RunOptions options = base;
      options.event_log = &log;
      reports.push_back(experiment->run(kind, std::move(options)));
    }
  } else {
    reports = experiment->run_all(config.schedulers, base, parallel);
  }

  std::cout << kCsvHeader << '\n';
  for (const auto& report : reports) {
    const std::string stem = fmt::format("{}-{}", config.name, report.scheduler);
    if (format == "json" || format == "both") emit(report, ReportFormat::json, fs::path(out_dir) / (stem + ".json"));
    if (format == "csv" || format == "both") emit(report, ReportFormat::csv, fs::path(out_dir) / (stem + ".csv"));
    write_csv(std::cout, report, false);
  }
  return 0;
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& out) {
  if (paths.empty()) throw ConfigError("compare needs at least one report");
  std::vector<MetricsReport> reports;
  for (const auto& p : paths) reports.push_back(load_report(p));
  for (const auto& r : reports) {
    if (r.trace_digest != reports.front().trace_digest || r.workload != reports.front().workload) {
      throw ConfigError(fmt::format("reports come from different workloads ({} {} vs {} {})", r.workload,
                                    r.trace_digest, reports.front().workload, reports.front().trace_digest));
    }
  }

  std::vector<std::string> profiles;
  std::map<std::string, std::vector<SummaryRow>> by_profile;
  for (const auto& r : reports) {
    for (auto& row : summarize(r)) {
      if (row.job_class != "ALL" && row.profile == "ALL") continue;
      if (!by_profile.contains(row.profile)) profiles.push_back(row.profile);
      by_profile[row.profile].push_back(std::move(row));
    }
  }

  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw std::runtime_error("cannot open " + out);
  }
  std::ostream& os = out.empty() ? std::cout : file;
  os << "workload,profile,scheduler,jobs,mean_jtt_s,normalized_jtt,vps_rate,off_cen_rate,int_bytes,normalized_int\n";
  for (const auto& profile : profiles) {
    const auto& rows = by_profile[profile];
    double min_jtt = rows.front().mean_jtt_s;
    Bytes min_int = rows.front().int_bytes;
    for (const auto& r : rows) {
      min_jtt = std::min(min_jtt, r.mean_jtt_s);
      min_int = std::min(min_int, r.int_bytes);
    }
    for (const auto& r : rows) {
      const double norm_jtt = min_jtt > 0.0 ? r.mean_jtt_s / min_jtt : 1.0;
      const double norm_int =
          min_int > 0 ? static_cast<double>(r.int_bytes) / static_cast<double>(min_int) : (r.int_bytes ? 0.0 : 1.0);
      os << fmt::format("{},{},{},{},{:.3f},{:.3f},", r.workload, r.profile, r.scheduler, r.jobs, r.mean_jtt_s,
                        norm_jtt);
      if (r.locality) {
        os << fmt::format("{:.4f},{:.4f},", r.locality->vps, r.locality->off_cen);
      } else {
        os << ",,";
      }
      if (min_int > 0 || r.int_bytes == 0) {
        os << fmt::format("{},{:.3f}\n", r.int_bytes, norm_int);
      } else {
        os << r.int_bytes << ",\n";
      }
    }
  }
  return 0;
}

int cmd_report(const std::string& path, const std::string& format) {
  const MetricsReport report = load_report(path);
  if (report_format_from_string(format) == ReportFormat::json) {
    write_json(std::cout, report);
  } else {
    write_csv(std::cout, report);
  }
  return 0;
}

void print_resources(std::chrono::steady_clock::time_point started) {
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  fmt::print(stderr, "elapsed {:.3f} s, peak RSS {:.1f} MiB\n", elapsed, usage.ru_maxrss / 1024.0);
}

}  // namespace

int main(int argc, char** argv) {
  const auto started = std::chrono::steady_clock::now();
  CLI::App app{"Hybrid job-driven scheduling simulator for multi-datacenter MapReduce clusters"};
  app.require_subcommand(1);

  Overrides gen_o;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate-trace", "Write the scenario's workload trace");
  add_common(gen, gen_o);
  gen->add_option("--out", gen_out, "Trace file (stdout if omitted)")->envname("JOSS_OUT");

  Overrides run_o;
  std::string run_out = "results";
  std::string run_format = "both";
  bool event_log = false;
  bool parallel = false;
  auto* run = app.add_subcommand("run", "Simulate the selected schedulers on one shared trace and placement");
  add_common(run, run_o);
  run->add_option("--scheduler", run_o.schedulers, "joss-t,joss-j,fifo,fair,capacity or all")
      ->envname("JOSS_SCHEDULER");
  run->add_option("--out", run_out, "Report directory")->envname("JOSS_OUT");
  run->add_option("--format", run_format, "Report files to write")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->envname("JOSS_FORMAT");
  run->add_flag("--event-log", event_log, "Write one event log per scheduler")->envname("JOSS_EVENT_LOG");
  run->add_flag("--parallel", parallel, "One thread per scheduler")->envname("JOSS_PARALLEL");

  std::vector<std::string> compare_paths;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Normalize mean JTT and INT per profile across reports");
  compare->add_option("reports", compare_paths, "JSON reports")->required();
  compare->add_option("--out", compare_out, "CSV file (stdout if omitted)")->envname("JOSS_OUT");

  std::string report_path;
  std::string report_format = "csv";
  auto* report = app.add_subcommand("report", "Print a stored JSON report");
  report->add_option("report", report_path, "JSON report")->required();
  report->add_option("--format", report_format, "csv or json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  int code = 0;
  try {
    if (*gen) code = cmd_generate_trace(gen_o, gen_out);
    if (*run) code = cmd_run(run_o, run_out, event_log, run_format, parallel);
    if (*compare) code = cmd_compare(compare_paths, compare_out);
    if (*report) code = cmd_report(report_path, report_format);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    code = kExitConfig;
  } catch (const SimulationError& e) {
    fmt::print(stderr, "simulation error: {}\n", e.what());
    code = kExitSimulation;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    code = kExitSimulation;
  }
  print_resources(started);
  return code;
}
