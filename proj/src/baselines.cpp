#include "joss/baselines.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

namespace joss {

JobBook::Entry& JobBook::add(JobId job) {
  const JobInfo& info = catalog_->job(job);
  Entry e;
  e.job = job;
  for (std::uint32_t i = 0; i < info.map_count(); ++i) e.pending_maps.push_back({job, SlotKind::map, i});
  for (std::uint32_t j = 0; j < info.reduce_count(); ++j) e.pending_reduces.push_back({job, SlotKind::reduce, j});
  index_[job] = entries_.size();
  entries_.push_back(std::move(e));
  return entries_.back();
}

JobBook::Entry& JobBook::at(JobId job) {
  return entries_.at(index_.at(job));
}

bool JobBook::has_pending(const Entry& e, SlotKind kind) const {
  if (kind == SlotKind::map) return !e.pending_maps.empty();
  // Reducers only start once the job's shuffle can begin.
  return !e.pending_reduces.empty() && e.maps_started > 0;
}

TaskId JobBook::take(Entry& e, SlotKind kind, VpsId vps) {
  auto& pending = kind == SlotKind::map ? e.pending_maps : e.pending_reduces;
  const std::size_t pos = kind == SlotKind::map ? *fifo_pick(pending, vps, *catalog_) : 0;
  const TaskId task = pending[pos];
  pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(pos));
  return task;
}

void JobBook::started(const TaskId& task) {
  Entry& e = at(task.job);
  if (task.kind == SlotKind::map) {
    ++e.running_maps;
    ++e.maps_started;
  } else {
    ++e.running_reduces;
  }
}

void JobBook::finished(const TaskId& task) {
  Entry& e = at(task.job);
  auto& running = task.kind == SlotKind::map ? e.running_maps : e.running_reduces;
  if (running == 0) throw SimulationError("task finished that was never started: " + to_string(task));
  --running;
}

std::optional<TaskId> FifoScheduler::next_task(VpsId vps, SlotKind kind) {
  for (auto& e : book_.entries()) {
    if (book_.has_pending(e, kind)) return book_.take(e, kind, vps);
  }
  return std::nullopt;
}

std::optional<TaskId> FairScheduler::next_task(VpsId vps, SlotKind kind) {
  JobBook::Entry* best = nullptr;
  for (auto& e : book_.entries()) {
    if (!book_.has_pending(e, kind)) continue;
    if (!best || book_.running(e, kind) < book_.running(*best, kind)) best = &e;
  }
  if (!best) return std::nullopt;
  return book_.take(*best, kind, vps);
}

CapacityConfig CapacityConfig::defaults() {
  CapacityConfig c;
  c.rule = Rule::round_robin;
  c.queues = {{"q0", 0.5, {}}, {"q1", 0.5, {}}};
  return c;
}

void CapacityConfig::validate() const {
  if (queues.empty()) throw ConfigError("capacity.queues must not be empty");
  double sum = 0.0;
  std::set<std::string> seen_profiles;
  for (std::size_t i = 0; i < queues.size(); ++i) {
    if (!(queues[i].fraction > 0.0)) {
      throw ConfigError(fmt::format("capacity.queues[{}].fraction must be > 0", i));
    }
    sum += queues[i].fraction;
    if (rule == Rule::by_profile) {
      for (const auto& p : queues[i].profiles) {
        if (!seen_profiles.insert(p).second) {
          throw ConfigError(fmt::format("capacity.queues[{}]: profile '{}' assigned to two queues", i, p));
        }
      }
    }
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError(fmt::format("capacity fractions sum to {}, expected 1", sum));
  }
}

CapacityScheduler::CapacityScheduler(const JobCatalog& catalog, CapacityConfig config)
    : book_(catalog), config_(std::move(config)) {
  config_.validate();
  queues_.resize(config_.queues.size());
}

void CapacityScheduler::submit(JobId job) {
  const JobInfo& info = book_.catalog().job(job);
  std::size_t q = 0;
  if (config_.rule == CapacityConfig::Rule::round_robin) {
    q = (info.spec.order - 1) % queues_.size();
  } else {
    bool found = false;
    for (std::size_t i = 0; i < config_.queues.size() && !found; ++i) {
      for (const auto& p : config_.queues[i].profiles) {
        if (p == info.spec.profile) {
          q = i;
          found = true;
          break;
        }
      }
    }
    if (!found) throw ConfigError("capacity: no queue accepts profile '" + info.spec.profile + "'");
  }
  queue_of_[job] = q;
  queues_[q].jobs.push_back(job);
  book_.add(job);
}

std::optional<TaskId> CapacityScheduler::next_task(VpsId vps, SlotKind kind) {
  std::optional<std::size_t> best;
  double best_load = 0.0;
  JobBook::Entry* best_job = nullptr;
  for (std::size_t i = 0; i < queues_.size(); ++i) {
    JobBook::Entry* head = nullptr;
    for (JobId job : queues_[i].jobs) {
      auto& e = book_.at(job);
      if (book_.has_pending(e, kind)) {
        head = &e;
        break;
      }
    }
    if (!head) continue;
    const double running = kind == SlotKind::map ? queues_[i].running_maps : queues_[i].running_reduces;
    const double load = running / config_.queues[i].fraction;
    if (!best || load < best_load) {
      best = i;
      best_load = load;
      best_job = head;
    }
  }
  if (!best) return std::nullopt;
  return book_.take(*best_job, kind, vps);
}

void CapacityScheduler::task_started(const TaskId& task, VpsId) {
  book_.started(task);
  auto& q = queues_[queue_of_.at(task.job)];
  (task.kind == SlotKind::map ? q.running_maps : q.running_reduces)++;
}

void CapacityScheduler::task_finished(const TaskId& task, VpsId) {
  book_.finished(task);
  auto& q = queues_[queue_of_.at(task.job)];
  (task.kind == SlotKind::map ? q.running_maps : q.running_reduces)--;
}

}  // namespace joss
