#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "joss/catalog.hpp"

namespace joss {

// Pending/running bookkeeping per job, shared by the baseline schedulers.
class JobBook {
 public:
  struct Entry {
    JobId job{};
    std::vector<TaskId> pending_maps;     // block order
    std::vector<TaskId> pending_reduces;  // reduce order
    std::uint32_t running_maps = 0;
    std::uint32_t running_reduces = 0;
    std::uint32_t maps_started = 0;
  };

  explicit JobBook(const JobCatalog& catalog) : catalog_(&catalog) {}

  // Appends in submission order.
  Entry& add(JobId job);
  std::vector<Entry>& entries() noexcept { return entries_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  Entry& at(JobId job);

  bool has_pending(const Entry& e, SlotKind kind) const;
  std::uint32_t running(const Entry& e, SlotKind kind) const {
    return kind == SlotKind::map ? e.running_maps : e.running_reduces;
  }
  // Removes and returns the task chosen by fifo_pick (maps) or the first
  // pending reduce.
  TaskId take(Entry& e, SlotKind kind, VpsId vps);

  void started(const TaskId& task);
  void finished(const TaskId& task);

  const JobCatalog& catalog() const noexcept { return *catalog_; }

 private:
  const JobCatalog* catalog_;
  std::vector<Entry> entries_;
  std::map<JobId, std::size_t> index_;
};

// Strict submission order; locality preference only inside the head job.
class FifoScheduler final : public Scheduler {
 public:
  explicit FifoScheduler(const JobCatalog& catalog) : book_(catalog) {}
  std::string_view name() const noexcept override { return "fifo"; }
  void submit(JobId job) override { book_.add(job); }
  std::optional<TaskId> next_task(VpsId vps, SlotKind kind) override;
  void task_started(const TaskId& task, VpsId) override { book_.started(task); }
  void task_finished(const TaskId& task, VpsId) override { book_.finished(task); }

 private:
  JobBook book_;
};

// Min-running-tasks fair share, no preemption or minimum shares.
class FairScheduler final : public Scheduler {
 public:
  explicit FairScheduler(const JobCatalog& catalog) : book_(catalog) {}
  std::string_view name() const noexcept override { return "fair"; }
  void submit(JobId job) override { book_.add(job); }
  std::optional<TaskId> next_task(VpsId vps, SlotKind kind) override;
  void task_started(const TaskId& task, VpsId) override { book_.started(task); }
  void task_finished(const TaskId& task, VpsId) override { book_.finished(task); }

 private:
  JobBook book_;
};

struct CapacityQueueSpec {
  std::string name;
  double fraction = 0.0;
  std::vector<std::string> profiles;  // by_profile rule only
};

struct CapacityConfig {
  enum class Rule { round_robin, by_profile };
  Rule rule = Rule::round_robin;
  std::vector<CapacityQueueSpec> queues;

  // Two queues at 0.5/0.5 fed round-robin by submission index.
  static CapacityConfig defaults();
  // Throws ConfigError unless fractions are positive and sum to 1 (+-1e-9)
  // and, for by_profile, every profile maps to exactly one queue.
  void validate() const;
};

// Each queue gets a fraction of the slots; the most under-served queue with
// work is served first and idle capacity spills to the others.
class CapacityScheduler final : public Scheduler {
 public:
  CapacityScheduler(const JobCatalog& catalog, CapacityConfig config);
  std::string_view name() const noexcept override { return "capacity"; }
  void submit(JobId job) override;
  std::optional<TaskId> next_task(VpsId vps, SlotKind kind) override;
  void task_started(const TaskId& task, VpsId) override;
  void task_finished(const TaskId& task, VpsId) override;

  std::size_t queue_of(JobId job) const { return queue_of_.at(job); }

 private:
  struct Queue {
    std::vector<JobId> jobs;  // submission order
    std::uint32_t running_maps = 0;
    std::uint32_t running_reduces = 0;
  };

  JobBook book_;
  CapacityConfig config_;
  std::vector<Queue> queues_;
  std::map<JobId, std::size_t> queue_of_;
};

}  // namespace joss
