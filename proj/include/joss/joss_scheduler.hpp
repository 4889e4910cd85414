#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "joss/catalog.hpp"
#include "joss/classify.hpp"

namespace joss {

// TTA takes queue heads; JTA applies fifo_pick inside the cursor's map queue.
enum class Assigner : std::uint8_t { task_driven, job_driven };

enum class Route : std::uint8_t { fifo_bootstrap, policy_a, policy_b, policy_c, none };
const char* to_string(Route route) noexcept;
std::optional<Route> route_from_string(std::string_view text) noexcept;

enum class QueueKind : std::uint8_t { fifo, permanent, dynamic };

struct QueueRef {
  QueueKind kind = QueueKind::fifo;
  SlotKind slot = SlotKind::map;
  DcId dc{};                 // unused for the global FIFO queues
  std::uint32_t serial = 0;  // p in MQ_{c,p}; 0 for permanent queues

  friend auto operator<=>(const QueueRef&, const QueueRef&) = default;
};

// "MQ_FIFO", "RQ_{2,0}", ... with 1-based datacenter numbers.
std::string to_string(const QueueRef& ref);

struct Enqueue {
  QueueRef queue;
  std::vector<TaskId> tasks;
};

struct SchedulingDecision {
  JobId job{};
  JobClass job_class = JobClass::unknown;
  Route route = Route::none;
  std::vector<Enqueue> enqueues;
};

// Greedy split of a job's blocks over datacenters by unique-block holdings.
struct BlockShare {
  DcId dc{};
  std::vector<std::uint32_t> blocks;  // ascending
};
struct BlockSplit {
  std::vector<BlockShare> shares;  // in selection order
  DcId reduce_dc{};                // largest original holding, lowest index on ties
};

// Repeatedly takes the first largest remaining set, assigns its blocks to
// that datacenter and deletes them from every set, until all `block_count`
// blocks are assigned. Throws SimulationError("unplaceable blocks") if some
// block is held nowhere.
BlockSplit split_by_unique_blocks(std::vector<std::vector<std::uint32_t>> unique_sets, std::uint32_t block_count);

struct QueueLifecycleEvent {
  QueueRef queue;
  JobId owner{};
  bool created = true;
  std::size_t size = 0;  // tasks held at creation / retirement
};

// How many round-robin map assignments in a datacenter elapsed between a job
// first reaching the head of one of that datacenter's queues and its first
// map task there being assigned.
struct HeadWaitSample {
  JobId job{};
  DcId dc{};
  std::uint64_t waited_assignments = 0;
  std::size_t live_queues = 0;
};

class JossScheduler final : public Scheduler {
 public:
  JossScheduler(const JobCatalog& catalog, Assigner assigner, FpRegistry registry = {});

  std::string_view name() const noexcept override;
  void submit(JobId job) override { schedule_job(job); }
  std::optional<TaskId> next_task(VpsId vps, SlotKind kind) override { return assign(vps, kind, assigner_); }
  void job_completed(JobId job) override;

  // Consults the registry and routes the job to the FIFO bootstrap queues or
  // to policy A, B or C.
  const SchedulingDecision& schedule_job(JobId job);

  std::optional<TaskId> tta_next_task(VpsId vps, SlotKind kind) { return assign(vps, kind, Assigner::task_driven); }
  std::optional<TaskId> jta_next_task(VpsId vps, SlotKind kind) { return assign(vps, kind, Assigner::job_driven); }

  // Queued (not running) tasks in the datacenter's own queues.
  std::size_t pending_task_count(DcId dc) const;

  const FpRegistry& registry() const noexcept { return registry_; }
  const std::vector<SchedulingDecision>& decisions() const noexcept { return decisions_; }
  Route route_of(JobId job) const;
  const std::vector<QueueLifecycleEvent>& queue_lifecycle() const noexcept { return lifecycle_; }
  const std::vector<HeadWaitSample>& head_waits() const noexcept { return head_waits_; }

  std::size_t map_queue_count(DcId dc) const { return dcs_.at(index_of(dc)).map_queues.size(); }
  std::size_t reduce_queue_count(DcId dc) const { return dcs_.at(index_of(dc)).reduce_queues.size(); }
  std::vector<TaskId> queue_contents(const QueueRef& ref) const;
  std::vector<QueueRef> live_queues() const;

  // Stable text snapshot of queues, cursors and pending counts.
  std::string dump() const;

 private:
  struct TaskQueue {
    std::uint32_t serial = 0;
    std::optional<JobId> owner;
    std::deque<TaskId> tasks;
  };
  struct Datacenter {
    std::vector<TaskQueue> map_queues;
    std::vector<TaskQueue> reduce_queues;
    std::size_t map_cursor = 0;
    std::size_t reduce_cursor = 0;
    std::uint32_t next_map_serial = 1;
    std::uint32_t next_reduce_serial = 1;
    std::uint64_t map_assignments = 0;
  };

  std::optional<TaskId> assign(VpsId vps, SlotKind kind, Assigner assigner);
  std::optional<TaskId> round_robin(DcId dc, SlotKind kind, VpsId vps, Assigner assigner);

  void policy_a(SchedulingDecision& decision);
  void policy_bc(SchedulingDecision& decision, bool large);
  void append(SchedulingDecision& decision, const QueueRef& ref, std::vector<TaskId> tasks);
  TaskQueue& queue(const QueueRef& ref);
  const TaskQueue* find_queue(const QueueRef& ref) const;
  void note_head(DcId dc, const TaskQueue& q);

  const JobCatalog* catalog_;
  Assigner assigner_;
  FpRegistry registry_;
  std::deque<TaskId> map_fifo_;
  std::deque<TaskId> reduce_fifo_;
  std::vector<Datacenter> dcs_;
  std::vector<SchedulingDecision> decisions_;
  std::map<JobId, std::size_t> decision_of_;
  std::vector<QueueLifecycleEvent> lifecycle_;
  std::map<std::pair<JobId, DcId>, std::uint64_t> head_since_;
  std::set<std::pair<JobId, DcId>> started_in_dc_;
  std::vector<HeadWaitSample> head_waits_;
};

}  // namespace joss
