#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "joss/classify.hpp"
#include "joss/cluster.hpp"
#include "joss/workload.hpp"

namespace joss {

// Static per-run facts about one job.
struct JobInfo {
  JobSpec spec;
  const BenchmarkProfile* profile = nullptr;
  std::vector<Bytes> block_sizes;
  std::vector<double> fps;  // sampled FP_i per map task
  JobHash hash = 0;
  // Class under the ground-truth fp_mean; used to group metrics for every
  // scheduler, JoSS or not.
  JobClass nominal_class = JobClass::unknown;

  std::uint32_t map_count() const noexcept { return static_cast<std::uint32_t>(block_sizes.size()); }
  std::uint32_t reduce_count() const noexcept { return spec.reduce_tasks; }
};

// Everything a scheduler may consult: topology, placement and job facts.
// Immutable once built.
class JobCatalog {
 public:
  JobCatalog(const ClusterTopology& topology, const BlockPlacement& placement, const WorkloadTrace& trace,
             const ProfileTable& profiles, const FpSamples& fps);

  const ClusterTopology& topology() const noexcept { return *topology_; }
  const BlockPlacement& placement() const noexcept { return *placement_; }
  const Threshold& threshold() const noexcept { return threshold_; }

  const JobInfo& job(JobId id) const;
  const std::map<JobId, JobInfo>& jobs() const noexcept { return jobs_; }

  Locality locality(VpsId vps, const TaskId& map_task) const {
    return locality_level(*topology_, *placement_, vps, map_task.job, map_task.index);
  }

 private:
  const ClusterTopology* topology_;
  const BlockPlacement* placement_;
  Threshold threshold_;
  std::map<JobId, JobInfo> jobs_;
};

// Hadoop-FIFO locality preference over an ordered candidate list: first
// VPS-local task, else first Cen-local task, else the first task. Returns the
// position in `tasks`, or nothing for an empty list.
template <typename Range>
std::optional<std::size_t> fifo_pick(const Range& tasks, VpsId vps, const JobCatalog& catalog) {
  std::optional<std::size_t> cen_local;
  std::size_t pos = 0;
  for (const TaskId& task : tasks) {
    const Locality level = catalog.locality(vps, task);
    if (level == Locality::vps_local) return pos;
    if (level == Locality::cen_local && !cen_local) cen_local = pos;
    ++pos;
  }
  if (pos == 0) return std::nullopt;
  return cen_local ? cen_local : std::optional<std::size_t>{0};
}

// Decides which queued task an idle slot runs. All calls come from the
// simulation's event loop.
class Scheduler {
 public:
  virtual ~Scheduler() = default;

  virtual std::string_view name() const noexcept = 0;
  virtual void submit(JobId job) = 0;
  virtual std::optional<TaskId> next_task(VpsId vps, SlotKind kind) = 0;

  virtual void task_started(const TaskId& /*task*/, VpsId /*vps*/) {}
  virtual void task_finished(const TaskId& /*task*/, VpsId /*vps*/) {}
  virtual void job_completed(JobId /*job*/) {}
};

}  // namespace joss
