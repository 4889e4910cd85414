#include "joss/metrics.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "joss/workload.hpp"

namespace joss {

using ojson = nlohmann::ordered_json;

namespace {

bool selected(const JobFilter& filter, const JobRecord& job) {
  return !filter || filter(job);
}

std::set<JobId> selected_jobs(const MetricsReport& report, const JobFilter& filter) {
  std::set<JobId> out;
  for (const auto& j : report.jobs) {
    if (selected(filter, j)) out.insert(j.job);
  }
  return out;
}

}  // namespace

LocalityCounts locality_counts(const MetricsReport& report, const JobFilter& filter) {
  LocalityCounts c;
  for (const auto& j : report.jobs) {
    if (!selected(filter, j)) continue;
    c.vps_local += j.vps_local;
    c.cen_local += j.cen_local;
    c.total += j.maps;
  }
  return c;
}

std::optional<LocalityRates> locality_rates(const LocalityCounts& counts) {
  if (counts.total == 0) return std::nullopt;
  const double m = static_cast<double>(counts.total);
  LocalityRates r;
  r.vps = static_cast<double>(counts.vps_local) / m;
  r.cen = static_cast<double>(counts.cen_local) / m;
  r.off_cen = 1.0 - (r.vps + r.cen);
  return r;
}

ReduceLocality reduce_locality_rate(const JobRecord& job) {
  if (job.reduce_total_bytes == 0) return {1.0, true};
  return {static_cast<double>(job.reduce_local_bytes) / static_cast<double>(job.reduce_total_bytes), false};
}

ReduceLocality reduce_locality_rate(const MetricsReport& report, const JobFilter& filter) {
  Bytes local = 0, total = 0;
  for (const auto& j : report.jobs) {
    if (!selected(filter, j)) continue;
    local += j.reduce_local_bytes;
    total += j.reduce_total_bytes;
  }
  if (total == 0) return {1.0, true};
  return {static_cast<double>(local) / static_cast<double>(total), false};
}

Seconds jtt(const JobRecord& job) {
  if (job.completion < job.arrival) throw std::logic_error(fmt::format("job {} did not complete", index_of(job.job)));
  return job.completion - job.arrival;
}

Seconds wtt(const MetricsReport& report, const JobFilter& filter) {
  bool any = false;
  Seconds first = 0.0, last = 0.0;
  for (const auto& j : report.jobs) {
    if (!selected(filter, j)) continue;
    if (!any) {
      first = j.arrival;
      last = j.completion;
      any = true;
    }
    first = std::min(first, j.arrival);
    last = std::max(last, j.completion);
  }
  return any ? last - first : 0.0;
}

LoadStats vps_load_stats(std::span<const std::uint32_t> per_vps_counts) {
  if (per_vps_counts.empty()) return {};
  const double n = static_cast<double>(per_vps_counts.size());
  const double total = std::accumulate(per_vps_counts.begin(), per_vps_counts.end(), 0.0);
  LoadStats s;
  s.mean = total / n;
  double sq = 0.0;
  for (auto c : per_vps_counts) sq += (c - s.mean) * (c - s.mean);
  s.stddev = std::sqrt(sq / n);
  return s;
}

LoadStats vps_load_stats(const MetricsReport& report, const JobFilter& filter) {
  if (!filter) return vps_load_stats(report.vps_map_counts);
  const auto jobs = selected_jobs(report, filter);
  std::vector<std::uint32_t> counts(report.vps_map_counts.size(), 0);
  for (const auto& m : report.maps) {
    if (jobs.contains(m.task.job)) ++counts.at(index_of(m.vps));
  }
  return vps_load_stats(counts);
}

namespace {

SummaryRow summarize_group(const MetricsReport& report, std::string profile, std::string job_class,
                           const JobFilter& filter) {
  SummaryRow row;
  row.scheduler = report.scheduler;
  row.workload = report.workload;
  row.profile = std::move(profile);
  row.job_class = std::move(job_class);
  row.locality = locality_rates(locality_counts(report, filter));
  row.reduce_locality = reduce_locality_rate(report, filter).rate;
  double jtt_sum = 0.0, jtt_excl_sum = 0.0;
  std::uint64_t excl = 0;
  for (const auto& j : report.jobs) {
    if (!selected(filter, j)) continue;
    ++row.jobs;
    row.int_bytes += j.int_bytes;
    jtt_sum += jtt(j);
    if (j.route != Route::fifo_bootstrap) {
      jtt_excl_sum += jtt(j);
      ++excl;
    }
  }
  row.mean_jtt_s = row.jobs ? jtt_sum / static_cast<double>(row.jobs) : 0.0;
  row.mean_jtt_excl_bootstrap_s = excl ? jtt_excl_sum / static_cast<double>(excl) : 0.0;
  row.wtt_s = wtt(report, filter);
  row.vps_load = vps_load_stats(report, filter);
  return row;
}

}  // namespace

std::vector<SummaryRow> summarize(const MetricsReport& report) {
  std::map<std::string, std::set<JobClass>> classes_by_profile;
  std::set<JobClass> classes;
  for (const auto& j : report.jobs) {
    classes_by_profile[j.profile].insert(j.job_class);
    classes.insert(j.job_class);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [profile, cls] : classes_by_profile) {
    const std::string label = cls.size() == 1 ? to_string(*cls.begin()) : "MIXED";
    rows.push_back(summarize_group(report, profile, label,
                                   [p = profile](const JobRecord& j) { return j.profile == p; }));
  }
  for (JobClass c : classes) {
    rows.push_back(summarize_group(report, "ALL", to_string(c), [c](const JobRecord& j) { return j.job_class == c; }));
  }
  rows.push_back(summarize_group(report, "ALL", "ALL", {}));
  return rows;
}

ReportFormat report_format_from_string(std::string_view text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  throw ConfigError(fmt::format("unknown report format '{}' (expected csv or json)", text));
}

void write_csv(std::ostream& out, const MetricsReport& report, bool header) {
  if (header) out << kCsvHeader << '\n';
  for (const auto& r : summarize(report)) {
    out << r.scheduler << ',' << r.workload << ',' << r.profile << ',' << r.job_class << ',' << r.jobs << ',';
    if (r.locality) {
      out << format_double(r.locality->vps) << ',' << format_double(r.locality->cen) << ','
          << format_double(r.locality->off_cen) << ',';
    } else {
      out << ",,,";
    }
    out << format_double(r.reduce_locality) << ',' << r.int_bytes << ',' << format_double(r.mean_jtt_s) << ','
        << format_double(r.wtt_s) << ',' << format_double(r.vps_load.mean) << ','
        << format_double(r.vps_load.stddev) << '\n';
  }
}

void write_json(std::ostream& out, const MetricsReport& report) {
  ojson doc;
  doc["schema"] = kReportSchema;
  doc["scheduler"] = report.scheduler;
  doc["workload"] = report.workload;
  doc["trace_digest"] = report.trace_digest;
  doc["datacenters"] = report.datacenters;
  doc["int_bytes"] = report.int_bytes;
  doc["int_map_bytes"] = report.int_map_bytes;
  doc["int_shuffle_bytes"] = report.int_shuffle_bytes;
  doc["vps_map_counts"] = report.vps_map_counts;

  ojson summary = ojson::array();
  for (const auto& r : summarize(report)) {
    ojson row;
    row["profile"] = r.profile;
    row["job_class"] = r.job_class;
    row["jobs"] = r.jobs;
    if (r.locality) {
      row["vps_rate"] = r.locality->vps;
      row["cen_rate"] = r.locality->cen;
      row["off_cen_rate"] = r.locality->off_cen;
    }
    row["reduce_locality"] = r.reduce_locality;
    row["int_bytes"] = r.int_bytes;
    row["mean_jtt_s"] = r.mean_jtt_s;
    row["mean_jtt_excl_bootstrap_s"] = r.mean_jtt_excl_bootstrap_s;
    row["wtt_s"] = r.wtt_s;
    row["vps_load_mean"] = r.vps_load.mean;
    row["vps_load_std"] = r.vps_load.stddev;
    summary.push_back(std::move(row));
  }
  doc["summary"] = std::move(summary);

  ojson jobs = ojson::array();
  for (const auto& j : report.jobs) {
    jobs.push_back({{"job", index_of(j.job)},
                    {"profile", j.profile},
                    {"class", to_string(j.job_class)},
                    {"route", to_string(j.route)},
                    {"arrival", j.arrival},
                    {"completion", j.completion},
                    {"maps", j.maps},
                    {"vps_local", j.vps_local},
                    {"cen_local", j.cen_local},
                    {"off_cen", j.off_cen},
                    {"reduce_local_bytes", j.reduce_local_bytes},
                    {"reduce_total_bytes", j.reduce_total_bytes},
                    {"int_bytes", j.int_bytes}});
  }
  doc["jobs"] = std::move(jobs);

  // Compact rows: [job, block, vps, locality, start, finish, input, output]
  ojson maps = ojson::array();
  for (const auto& m : report.maps) {
    maps.push_back({index_of(m.task.job), m.task.index, index_of(m.vps), to_string(m.locality), m.start, m.finish,
                    m.input_bytes, m.output_bytes});
  }
  doc["maps"] = std::move(maps);

  // [job, index, vps, start, ready, finish, local_bytes, total_bytes]
  ojson reduces = ojson::array();
  for (const auto& r : report.reduces) {
    reduces.push_back({index_of(r.task.job), r.task.index, index_of(r.vps), r.start, r.ready, r.finish,
                       r.local_bytes, r.total_bytes});
  }
  doc["reduces"] = std::move(reduces);

  ojson completion = ojson::array();
  for (const auto& p : report.completion) completion.push_back({p.time, p.fraction});
  doc["completion"] = std::move(completion);

  out << doc.dump(1) << '\n';
}

namespace {

Locality locality_from_string(const std::string& text) {
  for (auto l : {Locality::vps_local, Locality::cen_local, Locality::off_cen}) {
    if (text == to_string(l)) return l;
  }
  throw ConfigError("report: unknown locality '" + text + "'");
}

}  // namespace

MetricsReport read_json(std::istream& in) {
  ojson doc;
  try {
    doc = ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("report: ") + e.what());
  }
  try {
    if (doc.at("schema").get<std::string>() != kReportSchema) {
      throw ConfigError("report: unsupported schema '" + doc.at("schema").get<std::string>() + "'");
    }
    MetricsReport r;
    r.scheduler = doc.at("scheduler").get<std::string>();
    r.workload = doc.at("workload").get<std::string>();
    r.trace_digest = doc.at("trace_digest").get<std::string>();
    r.datacenters = doc.at("datacenters").get<std::uint32_t>();
    r.int_bytes = doc.at("int_bytes").get<Bytes>();
    r.int_map_bytes = doc.at("int_map_bytes").get<Bytes>();
    r.int_shuffle_bytes = doc.at("int_shuffle_bytes").get<Bytes>();
    r.vps_map_counts = doc.at("vps_map_counts").get<std::vector<std::uint32_t>>();
    for (const auto& j : doc.at("jobs")) {
      JobRecord rec;
      rec.job = JobId{j.at("job").get<std::uint32_t>()};
      rec.profile = j.at("profile").get<std::string>();
      const auto cls = job_class_from_string(j.at("class").get<std::string>());
      const auto route = route_from_string(j.at("route").get<std::string>());
      if (!cls || !route) throw ConfigError("report: bad job class or route");
      rec.job_class = *cls;
      rec.route = *route;
      rec.arrival = j.at("arrival").get<double>();
      rec.completion = j.at("completion").get<double>();
      rec.maps = j.at("maps").get<std::uint32_t>();
      rec.vps_local = j.at("vps_local").get<std::uint32_t>();
      rec.cen_local = j.at("cen_local").get<std::uint32_t>();
      rec.off_cen = j.at("off_cen").get<std::uint32_t>();
      rec.reduce_local_bytes = j.at("reduce_local_bytes").get<Bytes>();
      rec.reduce_total_bytes = j.at("reduce_total_bytes").get<Bytes>();
      rec.int_bytes = j.at("int_bytes").get<Bytes>();
      r.jobs.push_back(std::move(rec));
    }
    for (const auto& m : doc.at("maps")) {
      MapRecord rec;
      rec.task = TaskId{JobId{m.at(0).get<std::uint32_t>()}, SlotKind::map, m.at(1).get<std::uint32_t>()};
      rec.vps = VpsId{m.at(2).get<std::uint32_t>()};
      rec.locality = locality_from_string(m.at(3).get<std::string>());
      rec.start = m.at(4).get<double>();
      rec.finish = m.at(5).get<double>();
      rec.input_bytes = m.at(6).get<Bytes>();
      rec.output_bytes = m.at(7).get<Bytes>();
      r.maps.push_back(rec);
    }
    for (const auto& x : doc.at("reduces")) {
      ReduceRecord rec;
      rec.task = TaskId{JobId{x.at(0).get<std::uint32_t>()}, SlotKind::reduce, x.at(1).get<std::uint32_t>()};
      rec.vps = VpsId{x.at(2).get<std::uint32_t>()};
      rec.start = x.at(3).get<double>();
      rec.ready = x.at(4).get<double>();
      rec.finish = x.at(5).get<double>();
      rec.local_bytes = x.at(6).get<Bytes>();
      rec.total_bytes = x.at(7).get<Bytes>();
      r.reduces.push_back(rec);
    }
    for (const auto& p : doc.at("completion")) {
      r.completion.push_back(CompletionPoint{p.at(0).get<double>(), p.at(1).get<double>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("report: ") + e.what());
  }
}

void emit(const MetricsReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  if (format == ReportFormat::csv) {
    write_csv(out, report);
  } else {
    write_json(out, report);
  }
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

MetricsReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open report " + path.string());
  return read_json(in);
}

}  // namespace joss
