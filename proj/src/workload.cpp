#include "joss/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "joss/hash.hpp"

namespace joss {

ProfileTable::ProfileTable(std::vector<BenchmarkProfile> profiles) {
  for (auto& p : profiles) add(std::move(p));
}

ProfileTable ProfileTable::defaults() {
  constexpr double rate = 16.0 * kMiB;
  return ProfileTable({
      {"WC", "web", 1.039, 0.03, rate, rate},
      {"SC", "web", 0.569, 0.03, rate, rate},
      {"II", "web", 1.166, 0.03, rate, rate},
      {"Grep", "web", 0.10, 0.03, rate, rate},
      {"Permu", "non-web", 3.0, 0.15, rate, rate},
  });
}

void ProfileTable::add(BenchmarkProfile profile) {
  if (profile.name.empty()) throw ConfigError("profile name must not be empty");
  if (profile.input_type.empty()) throw ConfigError("profile '" + profile.name + "': input_type must not be empty");
  if (!(profile.fp_mean >= 0.0)) throw ConfigError("profile '" + profile.name + "': fp_mean must be >= 0");
  if (!(profile.fp_std >= 0.0)) throw ConfigError("profile '" + profile.name + "': fp_std must be >= 0");
  if (!(profile.map_compute_rate > 0.0) || !(profile.reduce_compute_rate > 0.0)) {
    throw ConfigError("profile '" + profile.name + "': compute rates must be > 0");
  }
  by_name_[profile.name] = std::move(profile);
}

const BenchmarkProfile& ProfileTable::at(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw ConfigError("unknown profile '" + name + "'");
  return it->second;
}

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
  return std::mt19937_64(seq);
}

namespace {

std::vector<double> sample_intervals(const ArrivalModel& model, std::size_t n, std::mt19937_64& rng) {
  std::vector<double> out;
  out.reserve(n);
  switch (model.kind) {
    case ArrivalModel::Kind::exponential: {
      if (!(model.mean > 0.0)) throw ConfigError("arrivals.mean must be > 0");
      std::exponential_distribution<double> dist(1.0 / model.mean);
      for (std::size_t i = 0; i < n; ++i) out.push_back(dist(rng));
      break;
    }
    case ArrivalModel::Kind::lognormal: {
      if (!(model.mean > 0.0)) throw ConfigError("arrivals.mean must be > 0");
      if (!(model.stddev >= 0.0)) throw ConfigError("arrivals.std must be >= 0");
      // Moment match: E = exp(mu + s^2/2), Var = (exp(s^2) - 1) E^2.
      const double s2 = std::log1p((model.stddev * model.stddev) / (model.mean * model.mean));
      const double mu = std::log(model.mean) - s2 / 2.0;
      std::lognormal_distribution<double> dist(mu, std::sqrt(s2));
      for (std::size_t i = 0; i < n; ++i) out.push_back(dist(rng));
      break;
    }
    case ArrivalModel::Kind::explicit_list:
      if (model.intervals.size() != n) {
        throw ConfigError(fmt::format("arrivals.intervals has {} entries, expected one per job ({})",
                                      model.intervals.size(), n));
      }
      for (double v : model.intervals) {
        if (!(v >= 0.0)) throw ConfigError("arrivals.intervals must be non-negative");
      }
      out = model.intervals;
      break;
  }
  return out;
}

}  // namespace

WorkloadTrace generate_trace(const WorkloadConfig& config, const ProfileTable& profiles, std::uint64_t seed) {
  if (config.block_size == 0) throw ConfigError("block_size must be > 0");
  if (config.reduce_tasks < 1) throw ConfigError("workload.reduce_tasks must be >= 1");
  if (!(config.input_jitter >= 0.0 && config.input_jitter < 1.0)) {
    throw ConfigError("workload.input_jitter must be in [0, 1)");
  }

  std::mt19937_64 rng(seed);
  std::vector<JobSpec> jobs;
  for (std::size_t i = 0; i < config.mix.size(); ++i) {
    const auto& entry = config.mix[i];
    if (!profiles.contains(entry.profile)) {
      throw ConfigError(fmt::format("workload.jobs[{}].profile: unknown profile '{}'", i, entry.profile));
    }
    if (entry.input_bytes == 0) {
      throw ConfigError(fmt::format("workload.jobs[{}].input_bytes must be > 0", i));
    }
    for (std::uint32_t n = 0; n < entry.count; ++n) {
      JobSpec job;
      job.id = JobId{static_cast<std::uint32_t>(jobs.size())};
      job.profile = entry.profile;
      job.input_bytes = entry.input_bytes;
      job.reduce_tasks = config.reduce_tasks;
      if (config.input_jitter > 0.0) {
        std::uniform_real_distribution<double> scale(1.0 - config.input_jitter, 1.0 + config.input_jitter);
        const double bytes = std::round(static_cast<double>(entry.input_bytes) * scale(rng));
        job.input_bytes = std::max<Bytes>(1, static_cast<Bytes>(bytes));
      }
      jobs.push_back(std::move(job));
    }
  }

  std::vector<std::size_t> perm(jobs.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto intervals = sample_intervals(config.arrivals, jobs.size(), rng);

  WorkloadTrace trace;
  trace.block_size = config.block_size;
  trace.seed = seed;
  trace.jobs.reserve(jobs.size());
  double t = 0.0;
  for (std::size_t pos = 0; pos < perm.size(); ++pos) {
    t += intervals[pos];
    JobSpec job = jobs[perm[pos]];
    job.arrival = t;
    job.order = static_cast<std::uint32_t>(pos + 1);
    trace.jobs.push_back(std::move(job));
  }
  return trace;
}

std::uint32_t block_count(Bytes input_bytes, Bytes block_size) {
  if (block_size == 0) throw std::invalid_argument("block size must be > 0");
  return static_cast<std::uint32_t>((input_bytes + block_size - 1) / block_size);
}

JobTasks expand_tasks(const JobSpec& job, Bytes block_size) {
  if (block_size == 0) throw std::invalid_argument("block size must be > 0");
  if (job.input_bytes == 0) throw std::invalid_argument(fmt::format("job {} has no input", index_of(job.id)));
  const std::uint32_t m = block_count(job.input_bytes, block_size);
  JobTasks tasks;
  tasks.maps.reserve(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    const Bytes size = i + 1 < m ? block_size : job.input_bytes - Bytes{m - 1} * block_size;
    tasks.maps.push_back(TaskInstance{TaskId{job.id, SlotKind::map, i}, size, 0.0, TaskState::pending});
  }
  for (std::uint32_t j = 0; j < job.reduce_tasks; ++j) {
    tasks.reduces.push_back(TaskInstance{TaskId{job.id, SlotKind::reduce, j}, 0, 0.0, TaskState::pending});
  }
  return tasks;
}

double sample_task_fp(const BenchmarkProfile& profile, std::mt19937_64& rng) {
  if (profile.fp_std == 0.0) return profile.fp_mean;
  std::normal_distribution<double> dist(profile.fp_mean, profile.fp_std);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double v = dist(rng);
    if (v >= 0.0) return v;
  }
  return 0.0;
}

Bytes map_output_bytes(Bytes input_bytes, double fp) {
  return static_cast<Bytes>(std::llround(static_cast<double>(input_bytes) * fp));
}

Bytes partition_bytes(Bytes output, std::uint32_t reduce_index, std::uint32_t reduce_tasks) {
  const Bytes base = output / reduce_tasks;
  return base + (reduce_index < output % reduce_tasks ? 1 : 0);
}

FpSamples sample_workload_fps(const WorkloadTrace& trace, const ProfileTable& profiles, std::uint64_t seed) {
  FpSamples out;
  for (const auto& job : trace.jobs) {
    const auto& profile = profiles.at(job.profile);
    auto rng = derived_rng(seed, index_of(job.id));
    const std::uint32_t m = block_count(job.input_bytes, trace.block_size);
    std::vector<double> fps(m);
    for (auto& fp : fps) fp = sample_task_fp(profile, rng);
    out.emplace(job.id, std::move(fps));
  }
  return out;
}

BlockPlacement place_workload(const ClusterTopology& topology, const WorkloadTrace& trace,
                              std::uint32_t replication, std::uint64_t seed) {
  BlockPlacement placement(replication);
  for (const auto& job : trace.jobs) {
    auto rng = derived_rng(seed, index_of(job.id));
    placement.set(job.id, place_blocks(topology, block_count(job.input_bytes, trace.block_size), replication, rng));
  }
  return placement;
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_trace(std::ostream& out, const WorkloadTrace& trace) {
  out << "joss-trace block_size=" << trace.block_size << " seed=" << trace.seed << '\n';
  for (const auto& job : trace.jobs) {
    out << index_of(job.id) << ' ' << job.profile << ' ' << job.input_bytes << ' ' << job.reduce_tasks << ' '
        << format_double(job.arrival) << ' ' << job.order << '\n';
  }
}

namespace {

template <typename T>
T parse_field(std::string_view text, const std::string& where, const char* field) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(fmt::format("{}: field {}: cannot parse '{}'", where, field, text));
  }
  return value;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

bool blank_or_comment(const std::string& line) {
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

}  // namespace

WorkloadTrace read_trace(std::istream& in, const std::string& source) {
  WorkloadTrace trace;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    const auto where = fmt::format("{}:{}", source, lineno);
    const auto fields = split_ws(line);
    if (!have_header) {
      if (fields.size() != 3 || fields[0] != "joss-trace" || !fields[1].starts_with("block_size=") ||
          !fields[2].starts_with("seed=")) {
        throw ConfigError(where + ": expected header 'joss-trace block_size=<S> seed=<seed>'");
      }
      trace.block_size = parse_field<Bytes>(std::string_view(fields[1]).substr(11), where, "block_size");
      trace.seed = parse_field<std::uint64_t>(std::string_view(fields[2]).substr(5), where, "seed");
      if (trace.block_size == 0) throw ConfigError(where + ": block_size must be > 0");
      have_header = true;
      continue;
    }
    if (fields.size() != 6) {
      throw ConfigError(fmt::format("{}: expected 6 fields (job_id profile input_bytes r arrival_seconds "
                                    "order_index), got {}",
                                    where, fields.size()));
    }
    JobSpec job;
    job.id = JobId{parse_field<std::uint32_t>(fields[0], where, "job_id")};
    job.profile = fields[1];
    job.input_bytes = parse_field<Bytes>(fields[2], where, "input_bytes");
    job.reduce_tasks = parse_field<std::uint32_t>(fields[3], where, "r");
    job.arrival = parse_field<double>(fields[4], where, "arrival_seconds");
    job.order = parse_field<std::uint32_t>(fields[5], where, "order_index");
    if (job.input_bytes == 0) throw ConfigError(where + ": field input_bytes: must be > 0");
    if (job.reduce_tasks < 1) throw ConfigError(where + ": field r: must be >= 1");
    if (!(job.arrival >= 0.0) || !std::isfinite(job.arrival)) {
      throw ConfigError(where + ": field arrival_seconds: must be a non-negative number");
    }
    if (!trace.jobs.empty() && job.arrival < trace.jobs.back().arrival) {
      throw ConfigError(where + ": field arrival_seconds: arrivals must be non-decreasing");
    }
    trace.jobs.push_back(std::move(job));
  }
  if (!have_header) throw ConfigError(source + ": no jobs (empty trace)");
  if (trace.jobs.empty()) throw ConfigError(source + ": no jobs");

  std::set<std::uint32_t> ids, orders;
  for (const auto& job : trace.jobs) {
    if (!ids.insert(index_of(job.id)).second) {
      throw ConfigError(fmt::format("{}: duplicate job_id {}", source, index_of(job.id)));
    }
    orders.insert(job.order);
  }
  if (orders.size() != trace.jobs.size() || *orders.begin() != 1 || *orders.rbegin() != trace.jobs.size()) {
    throw ConfigError(source + ": order_index values must be a permutation of 1..N");
  }
  return trace;
}

void save_trace(const WorkloadTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file " + path.string());
  write_trace(out, trace);
  if (!out) throw std::runtime_error("failed writing trace file " + path.string());
}

WorkloadTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file " + path.string());
  return read_trace(in, path.string());
}

std::uint64_t trace_digest(const WorkloadTrace& trace) {
  std::ostringstream ss;
  write_trace(ss, trace);
  return Fnv1a64{}.update(ss.str()).digest();
}

}  // namespace joss
