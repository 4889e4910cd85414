#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "joss/baselines.hpp"
#include "joss/catalog.hpp"
#include "joss/joss_scheduler.hpp"
#include "joss/metrics.hpp"

namespace joss {

// Transfer and disk rates in bytes per second. Compute rates live on the
// benchmark profiles.
struct CostModel {
  double intra_vps_read_rate = 128.0 * kMiB;
  double intra_dc_bandwidth = 64.0 * kMiB;
  double inter_dc_bandwidth = 16.0 * kMiB;

  double fetch_rate(Locality level) const noexcept;
  // Rate of a point-to-point transfer between two VPSs.
  double link_rate(const ClusterTopology& topology, VpsId source, VpsId destination) const;

  // Non-fatal: the expected ordering inter <= intra_dc <= intra_vps is violated.
  std::vector<std::string> warnings() const;
  // Throws ConfigError for non-positive or non-finite rates.
  void validate() const;
};

enum class TransferCause : std::uint8_t { map_input, shuffle };
const char* to_string(TransferCause cause) noexcept;

struct TransferRecord {
  VpsId source{};
  VpsId destination{};
  Bytes bytes = 0;
  bool crosses_datacenter = false;
  TransferCause cause = TransferCause::map_input;
  TaskId consumer;

  bool operator==(const TransferRecord&) const = default;
};

struct MapCost {
  Seconds duration = 0.0;
  std::optional<TransferRecord> fetch;  // for CEN_LOCAL and OFF_CEN reads
};

// Fetch then compute: |B|/fetch_rate(level) + |B|/map_compute_rate.
// `source` is the replica the block is read from.
MapCost map_task_cost(Bytes block_bytes, Locality level, VpsId source, VpsId destination, const CostModel& cost,
                      const BenchmarkProfile& profile);

// The replica a map running on `vps` reads: itself, else the first replica in
// its datacenter, else the first replica overall.
VpsId fetch_source(const ClusterTopology& topology, const BlockPlacement& placement, VpsId vps, JobId job,
                   std::uint32_t block);

// One reducer's inbound link: pieces go one at a time.
class ShuffleLink {
 public:
  // Returns the landing time of a piece that may start at `available`.
  Seconds send(Seconds available, Seconds transfer_time) {
    const Seconds start = available > free_at_ ? available : free_at_;
    free_at_ = start + transfer_time;
    return free_at_;
  }
  Seconds free_at() const noexcept { return free_at_; }

 private:
  Seconds free_at_ = 0.0;
};

struct ShufflePiece {
  TaskId map_task;
  VpsId source{};
  Seconds available = 0.0;  // map completion
  Bytes bytes = 0;
};

struct ReduceOutcome {
  Seconds ready = 0.0;
  Seconds finish = 0.0;
  Bytes local_bytes = 0;
  Bytes total_bytes = 0;
  std::vector<Seconds> landed;  // per piece, input order
  std::vector<TransferRecord> transfers;
};

// Closed form of one reducer's shuffle and compute. Pieces are sent in order
// of availability (stable), none before `assigned_at`.
ReduceOutcome shuffle_and_reduce(std::span<const ShufflePiece> pieces, TaskId reducer, VpsId reducer_vps,
                                 Seconds assigned_at, const ClusterTopology& topology, const CostModel& cost,
                                 const BenchmarkProfile& profile);

// INT: bytes of crossing records.
Bytes account_traffic(std::span<const TransferRecord> records) noexcept;

enum class SchedulerKind : std::uint8_t { joss_t, joss_j, fifo, fair, capacity };
const char* to_string(SchedulerKind kind) noexcept;
// Accepts joss-t, joss-j, fifo, fair, capacity. Throws ConfigError otherwise.
SchedulerKind scheduler_kind_from_string(std::string_view text);
std::vector<SchedulerKind> all_scheduler_kinds();

struct RunOptions {
  CostModel cost;
  CapacityConfig capacity = CapacityConfig::defaults();
  FpRegistry registry;  // JoSS only
  std::uint64_t seed = 0;  // slot offer order
  std::string workload_name;
  std::ostream* event_log = nullptr;
};

// One discrete-event run of one scheduler over a prepared catalog. Single
// use: run() may be called once.
class Simulation {
 public:
  Simulation(const JobCatalog& catalog, const WorkloadTrace& trace, SchedulerKind kind, RunOptions options);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  MetricsReport run();

  Scheduler& scheduler() noexcept { return *scheduler_; }
  // Null unless kind is joss_t or joss_j.
  const JossScheduler* joss() const noexcept;
  const std::vector<TransferRecord>& transfers() const noexcept { return transfers_; }

 private:
  class Loop;

  const JobCatalog* catalog_;
  const WorkloadTrace* trace_;
  SchedulerKind kind_;
  RunOptions options_;
  std::unique_ptr<Scheduler> scheduler_;
  std::vector<TransferRecord> transfers_;
  bool ran_ = false;
};

// Convenience wrapper.
MetricsReport simulate(const JobCatalog& catalog, const WorkloadTrace& trace, SchedulerKind kind,
                       RunOptions options = {});

}  // namespace joss
