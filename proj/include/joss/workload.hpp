#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "joss/cluster.hpp"
#include "joss/types.hpp"

namespace joss {

// One benchmark family. fp_mean is the ground-truth filtering percentage
// (map-output bytes / map-input bytes); rates are bytes per second.
struct BenchmarkProfile {
  std::string name;
  std::string input_type;
  double fp_mean = 1.0;
  double fp_std = 0.0;
  double map_compute_rate = 16.0 * kMiB;
  double reduce_compute_rate = 16.0 * kMiB;

  bool operator==(const BenchmarkProfile&) const = default;
};

class ProfileTable {
 public:
  ProfileTable() = default;
  explicit ProfileTable(std::vector<BenchmarkProfile> profiles);

  // WC, SC, II, Grep on web input and Permu on non-web input, with the
  // measured average filtering percentages and default stds/rates.
  static ProfileTable defaults();

  void add(BenchmarkProfile profile);
  bool contains(const std::string& name) const { return by_name_.contains(name); }
  // Throws ConfigError for an unknown name.
  const BenchmarkProfile& at(const std::string& name) const;
  const std::map<std::string, BenchmarkProfile>& all() const noexcept { return by_name_; }

 private:
  std::map<std::string, BenchmarkProfile> by_name_;
};

struct JobSpec {
  JobId id{};
  std::string profile;
  Bytes input_bytes = 0;
  std::uint32_t reduce_tasks = 1;
  Seconds arrival = 0.0;
  std::uint32_t order = 0;  // 1-based submission position

  bool operator==(const JobSpec&) const = default;
};

struct WorkloadTrace {
  Bytes block_size = 128 * kMiB;
  std::uint64_t seed = 0;
  std::vector<JobSpec> jobs;  // sorted by arrival, then order

  bool operator==(const WorkloadTrace&) const = default;
};

struct JobMix {
  std::string profile;
  std::uint32_t count = 0;
  Bytes input_bytes = 0;
};

struct ArrivalModel {
  enum class Kind { exponential, lognormal, explicit_list };
  Kind kind = Kind::exponential;
  double mean = 1.0;
  double stddev = 0.0;             // lognormal only
  std::vector<double> intervals;   // explicit_list only, one per job
};

struct WorkloadConfig {
  std::vector<JobMix> mix;
  ArrivalModel arrivals;
  std::uint32_t reduce_tasks = 1;
  double input_jitter = 0.0;  // fraction; input sizes drawn in [1-j, 1+j] * nominal
  Bytes block_size = 128 * kMiB;
};

// Builds the configured mix, shuffles the submission order and accumulates
// arrival times from sampled inter-arrival intervals.
WorkloadTrace generate_trace(const WorkloadConfig& config, const ProfileTable& profiles, std::uint64_t seed);

// m = ceil(|D| / S)
std::uint32_t block_count(Bytes input_bytes, Bytes block_size);

enum class TaskState : std::uint8_t { pending, queued, running, done };

struct TaskInstance {
  TaskId id;
  Bytes input_bytes = 0;  // block size for maps; unused for reduces
  double fp = 0.0;        // sampled FP_i for maps
  TaskState state = TaskState::pending;
};

struct JobTasks {
  std::vector<TaskInstance> maps;
  std::vector<TaskInstance> reduces;
};

// Splits the job input into m blocks (all of size S except possibly the
// last). Throws std::invalid_argument for |D| = 0 or S = 0.
JobTasks expand_tasks(const JobSpec& job, Bytes block_size);

// Normal(fp_mean, fp_std) truncated to [0, inf).
double sample_task_fp(const BenchmarkProfile& profile, std::mt19937_64& rng);

// Map-output bytes of one map task, rounded to whole bytes.
Bytes map_output_bytes(Bytes input_bytes, double fp);

// Bytes of reducer `reduce_index`'s partition when a mapper emits `output`
// bytes split evenly across `reduce_tasks` reducers.
Bytes partition_bytes(Bytes output, std::uint32_t reduce_index, std::uint32_t reduce_tasks);

// Per-task FP_i samples, drawn per job from (seed, job id).
using FpSamples = std::map<JobId, std::vector<double>>;
FpSamples sample_workload_fps(const WorkloadTrace& trace, const ProfileTable& profiles, std::uint64_t seed);

// Per-job placements drawn from (seed, job id).
BlockPlacement place_workload(const ClusterTopology& topology, const WorkloadTrace& trace,
                              std::uint32_t replication, std::uint64_t seed);

// Text trace format:
//   joss-trace block_size=<S> seed=<seed>
//   <job_id> <profile> <input_bytes> <r> <arrival_seconds> <order_index>
void write_trace(std::ostream& out, const WorkloadTrace& trace);
WorkloadTrace read_trace(std::istream& in, const std::string& source = "<trace>");
void save_trace(const WorkloadTrace& trace, const std::filesystem::path& path);
WorkloadTrace load_trace(const std::filesystem::path& path);

// Stable 64-bit digest of the serialized trace.
std::uint64_t trace_digest(const WorkloadTrace& trace);

// Shortest text that parses back to the same double.
std::string format_double(double value);

// seed_seq{seed, salt} seeded engine.
std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t salt);

}  // namespace joss
