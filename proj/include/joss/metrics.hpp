#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "joss/classify.hpp"
#include "joss/joss_scheduler.hpp"
#include "joss/types.hpp"

namespace joss {

inline constexpr std::string_view kReportSchema = "joss-report/1";

struct MapRecord {
  TaskId task;
  VpsId vps{};
  Locality locality = Locality::vps_local;
  Seconds start = 0.0;
  Seconds finish = 0.0;
  Bytes input_bytes = 0;
  Bytes output_bytes = 0;

  bool operator==(const MapRecord&) const = default;
};

struct ReduceRecord {
  TaskId task;
  VpsId vps{};
  Seconds start = 0.0;
  Seconds ready = 0.0;   // last shuffle partition landed
  Seconds finish = 0.0;
  Bytes local_bytes = 0;  // fetched from the reducer's own datacenter
  Bytes total_bytes = 0;

  bool operator==(const ReduceRecord&) const = default;
};

struct JobRecord {
  JobId job{};
  std::string profile;
  JobClass job_class = JobClass::unknown;  // nominal class (ground-truth FP)
  Route route = Route::none;               // JoSS path taken; "-" for baselines
  Seconds arrival = 0.0;
  Seconds completion = 0.0;
  std::uint32_t maps = 0;
  std::uint32_t vps_local = 0;
  std::uint32_t cen_local = 0;
  std::uint32_t off_cen = 0;
  Bytes reduce_local_bytes = 0;
  Bytes reduce_total_bytes = 0;
  Bytes int_bytes = 0;

  bool operator==(const JobRecord&) const = default;
};

struct CompletionPoint {
  Seconds time = 0.0;
  double fraction = 0.0;

  bool operator==(const CompletionPoint&) const = default;
};

struct MetricsReport {
  std::string scheduler;
  std::string workload;
  std::string trace_digest;
  std::uint32_t datacenters = 0;
  std::vector<JobRecord> jobs;  // arrival order
  std::vector<MapRecord> maps;  // assignment order
  std::vector<ReduceRecord> reduces;
  Bytes int_bytes = 0;
  Bytes int_map_bytes = 0;
  Bytes int_shuffle_bytes = 0;
  std::vector<std::uint32_t> vps_map_counts;
  std::vector<CompletionPoint> completion;

  bool operator==(const MetricsReport&) const = default;
};

using JobFilter = std::function<bool(const JobRecord&)>;

struct LocalityCounts {
  std::uint64_t vps_local = 0;  // #VPS
  std::uint64_t cen_local = 0;  // #Cen
  std::uint64_t total = 0;      // M
};

struct LocalityRates {
  double vps = 0.0;
  double cen = 0.0;
  double off_cen = 0.0;
};

LocalityCounts locality_counts(const MetricsReport& report, const JobFilter& filter = {});

// VPS-locality = #VPS/M, Cen-locality = #Cen/M, off-Cen = 1 - (#VPS/M + #Cen/M).
// Absent when M = 0.
std::optional<LocalityRates> locality_rates(const LocalityCounts& counts);

struct ReduceLocality {
  double rate = 1.0;
  bool zero_input = false;  // nothing to fetch; reported as 1
};

ReduceLocality reduce_locality_rate(const JobRecord& job);
// Byte-weighted over the selected jobs.
ReduceLocality reduce_locality_rate(const MetricsReport& report, const JobFilter& filter = {});

// Throws std::logic_error if the job never completed.
Seconds jtt(const JobRecord& job);
// Span from first submission to last completion; 0 for no jobs.
Seconds wtt(const MetricsReport& report, const JobFilter& filter = {});

struct LoadStats {
  double mean = 0.0;
  double stddev = 0.0;  // population
};
LoadStats vps_load_stats(std::span<const std::uint32_t> per_vps_counts);
LoadStats vps_load_stats(const MetricsReport& report, const JobFilter& filter = {});

// Summary row in the CSV column order.
struct SummaryRow {
  std::string scheduler;
  std::string workload;
  std::string profile;    // "ALL" for class/aggregate rows
  std::string job_class;  // "ALL" for profile/aggregate rows
  std::uint64_t jobs = 0;
  std::optional<LocalityRates> locality;
  double reduce_locality = 1.0;
  Bytes int_bytes = 0;
  double mean_jtt_s = 0.0;
  double mean_jtt_excl_bootstrap_s = 0.0;
  double wtt_s = 0.0;
  LoadStats vps_load;
};

// Rows per profile, per nominal class, then the aggregate row.
std::vector<SummaryRow> summarize(const MetricsReport& report);

inline constexpr std::string_view kCsvHeader =
    "scheduler,workload,profile,job_class,jobs,vps_rate,cen_rate,off_cen_rate,reduce_locality,int_bytes,"
    "mean_jtt_s,wtt_s,vps_load_mean,vps_load_std";

enum class ReportFormat { csv, json };
// Throws ConfigError for anything but "csv" / "json".
ReportFormat report_format_from_string(std::string_view text);

void write_csv(std::ostream& out, const MetricsReport& report, bool header = true);
void write_json(std::ostream& out, const MetricsReport& report);
MetricsReport read_json(std::istream& in);

// Throws std::runtime_error on I/O failure.
void emit(const MetricsReport& report, ReportFormat format, const std::filesystem::path& path);
MetricsReport load_report(const std::filesystem::path& path);

}  // namespace joss
