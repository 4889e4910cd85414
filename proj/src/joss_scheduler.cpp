#include "joss/joss_scheduler.hpp"

#include <algorithm>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

namespace joss {

const char* to_string(Route route) noexcept {
  switch (route) {
    case Route::fifo_bootstrap: return "FIFO";
    case Route::policy_a: return "A";
    case Route::policy_b: return "B";
    case Route::policy_c: return "C";
    case Route::none: return "-";
  }
  return "?";
}

std::optional<Route> route_from_string(std::string_view text) noexcept {
  for (auto r : {Route::fifo_bootstrap, Route::policy_a, Route::policy_b, Route::policy_c, Route::none}) {
    if (text == to_string(r)) return r;
  }
  return std::nullopt;
}

std::string to_string(const QueueRef& ref) {
  const char prefix = ref.slot == SlotKind::map ? 'M' : 'R';
  if (ref.kind == QueueKind::fifo) return fmt::format("{}Q_FIFO", prefix);
  return fmt::format("{}Q_{{{},{}}}", prefix, index_of(ref.dc) + 1, ref.serial);
}

BlockSplit split_by_unique_blocks(std::vector<std::vector<std::uint32_t>> unique_sets, std::uint32_t block_count) {
  BlockSplit split;
  std::size_t best_original = 0;
  for (std::size_t c = 0; c < unique_sets.size(); ++c) {
    if (unique_sets[c].size() > unique_sets[best_original].size()) best_original = c;
  }
  split.reduce_dc = DcId{static_cast<std::uint32_t>(best_original)};

  std::uint32_t remaining = block_count;
  while (remaining > 0) {
    std::size_t d = 0;
    for (std::size_t c = 1; c < unique_sets.size(); ++c) {
      if (unique_sets[c].size() > unique_sets[d].size()) d = c;
    }
    if (unique_sets.empty() || unique_sets[d].empty()) throw SimulationError("unplaceable blocks");
    std::vector<std::uint32_t> taken = std::move(unique_sets[d]);
    unique_sets[d].clear();
    for (auto& set : unique_sets) {
      std::vector<std::uint32_t> rest;
      std::set_difference(set.begin(), set.end(), taken.begin(), taken.end(), std::back_inserter(rest));
      set = std::move(rest);
    }
    remaining -= std::min<std::uint32_t>(remaining, static_cast<std::uint32_t>(taken.size()));
    split.shares.push_back(BlockShare{DcId{static_cast<std::uint32_t>(d)}, std::move(taken)});
  }
  return split;
}

JossScheduler::JossScheduler(const JobCatalog& catalog, Assigner assigner, FpRegistry registry)
    : catalog_(&catalog), assigner_(assigner), registry_(std::move(registry)) {
  dcs_.resize(catalog.topology().datacenter_count());
  for (auto& dc : dcs_) {
    dc.map_queues.push_back(TaskQueue{});
    dc.reduce_queues.push_back(TaskQueue{});
  }
}

std::string_view JossScheduler::name() const noexcept {
  return assigner_ == Assigner::task_driven ? "joss-t" : "joss-j";
}

const SchedulingDecision& JossScheduler::schedule_job(JobId job) {
  const JobInfo& info = catalog_->job(job);
  SchedulingDecision decision;
  decision.job = job;

  if (auto fp = registry_.lookup(info.hash)) {
    decision.job_class =
        classify_job(*fp, catalog_->threshold(), info.map_count(), catalog_->topology().average_vps());
    switch (decision.job_class) {
      case JobClass::small_rh: policy_a(decision); break;
      case JobClass::small_mh: policy_bc(decision, false); break;
      default: policy_bc(decision, true); break;
    }
  } else {
    decision.route = Route::fifo_bootstrap;
    std::vector<TaskId> maps, reduces;
    for (std::uint32_t i = 0; i < info.map_count(); ++i) maps.push_back({job, SlotKind::map, i});
    for (std::uint32_t j = 0; j < info.reduce_count(); ++j) reduces.push_back({job, SlotKind::reduce, j});
    append(decision, QueueRef{QueueKind::fifo, SlotKind::map}, std::move(maps));
    append(decision, QueueRef{QueueKind::fifo, SlotKind::reduce}, std::move(reduces));
  }

  decision_of_[job] = decisions_.size();
  decisions_.push_back(std::move(decision));
  return decisions_.back();
}

void JossScheduler::policy_a(SchedulingDecision& decision) {
  decision.route = Route::policy_a;
  const JobInfo& info = catalog_->job(decision.job);
  DcId target{0};
  std::size_t least = pending_task_count(target);
  for (std::uint32_t c = 1; c < dcs_.size(); ++c) {
    const std::size_t pending = pending_task_count(DcId{c});
    if (pending < least) {
      least = pending;
      target = DcId{c};
    }
  }
  std::vector<TaskId> maps, reduces;
  for (std::uint32_t i = 0; i < info.map_count(); ++i) maps.push_back({decision.job, SlotKind::map, i});
  for (std::uint32_t j = 0; j < info.reduce_count(); ++j) reduces.push_back({decision.job, SlotKind::reduce, j});
  append(decision, QueueRef{QueueKind::permanent, SlotKind::map, target, 0}, std::move(maps));
  append(decision, QueueRef{QueueKind::permanent, SlotKind::reduce, target, 0}, std::move(reduces));
}

void JossScheduler::policy_bc(SchedulingDecision& decision, bool large) {
  decision.route = large ? Route::policy_c : Route::policy_b;
  const JobInfo& info = catalog_->job(decision.job);
  const BlockSplit split = split_by_unique_blocks(
      unique_blocks_per_datacenter(catalog_->topology(), catalog_->placement(), decision.job), info.map_count());

  auto new_queue = [&](DcId dc, SlotKind slot) {
    Datacenter& d = dcs_[index_of(dc)];
    auto& queues = slot == SlotKind::map ? d.map_queues : d.reduce_queues;
    auto& serial = slot == SlotKind::map ? d.next_map_serial : d.next_reduce_serial;
    queues.push_back(TaskQueue{serial++, decision.job, {}});
    return QueueRef{QueueKind::dynamic, slot, dc, queues.back().serial};
  };

  for (const auto& share : split.shares) {
    std::vector<TaskId> maps;
    for (std::uint32_t block : share.blocks) maps.push_back({decision.job, SlotKind::map, block});
    const QueueRef ref = large ? new_queue(share.dc, SlotKind::map)
                               : QueueRef{QueueKind::permanent, SlotKind::map, share.dc, 0};
    const std::size_t n = maps.size();
    append(decision, ref, std::move(maps));
    if (large) lifecycle_.push_back({ref, decision.job, true, n});
  }

  std::vector<TaskId> reduces;
  for (std::uint32_t j = 0; j < info.reduce_count(); ++j) reduces.push_back({decision.job, SlotKind::reduce, j});
  const QueueRef ref = large ? new_queue(split.reduce_dc, SlotKind::reduce)
                             : QueueRef{QueueKind::permanent, SlotKind::reduce, split.reduce_dc, 0};
  const std::size_t n = reduces.size();
  append(decision, ref, std::move(reduces));
  if (large) lifecycle_.push_back({ref, decision.job, true, n});
}

void JossScheduler::append(SchedulingDecision& decision, const QueueRef& ref, std::vector<TaskId> tasks) {
  if (ref.kind == QueueKind::fifo) {
    auto& fifo = ref.slot == SlotKind::map ? map_fifo_ : reduce_fifo_;
    fifo.insert(fifo.end(), tasks.begin(), tasks.end());
  } else {
    TaskQueue& q = queue(ref);
    const bool was_empty = q.tasks.empty();
    q.tasks.insert(q.tasks.end(), tasks.begin(), tasks.end());
    if (was_empty && ref.slot == SlotKind::map) note_head(ref.dc, q);
  }
  decision.enqueues.push_back(Enqueue{ref, std::move(tasks)});
}

JossScheduler::TaskQueue& JossScheduler::queue(const QueueRef& ref) {
  return const_cast<TaskQueue&>(*find_queue(ref));
}

const JossScheduler::TaskQueue* JossScheduler::find_queue(const QueueRef& ref) const {
  const Datacenter& d = dcs_.at(index_of(ref.dc));
  const auto& queues = ref.slot == SlotKind::map ? d.map_queues : d.reduce_queues;
  for (const auto& q : queues) {
    if (q.serial == ref.serial) return &q;
  }
  throw std::out_of_range("no live queue " + to_string(ref));
}

void JossScheduler::note_head(DcId dc, const TaskQueue& q) {
  if (q.tasks.empty()) return;
  const auto key = std::make_pair(q.tasks.front().job, dc);
  if (started_in_dc_.contains(key)) return;
  head_since_.try_emplace(key, dcs_[index_of(dc)].map_assignments);
}

std::optional<TaskId> JossScheduler::assign(VpsId vps, SlotKind kind, Assigner assigner) {
  const DcId dc = catalog_->topology().datacenter_of(vps);
  if (kind == SlotKind::map) {
    if (!map_fifo_.empty()) {
      const std::size_t pos = *fifo_pick(map_fifo_, vps, *catalog_);
      const TaskId task = map_fifo_[pos];
      map_fifo_.erase(map_fifo_.begin() + static_cast<std::ptrdiff_t>(pos));
      return task;
    }
    return round_robin(dc, kind, vps, assigner);
  }
  if (!reduce_fifo_.empty()) {
    const TaskId task = reduce_fifo_.front();
    reduce_fifo_.pop_front();
    return task;
  }
  return round_robin(dc, kind, vps, Assigner::task_driven);
}

std::optional<TaskId> JossScheduler::round_robin(DcId dc, SlotKind kind, VpsId vps, Assigner assigner) {
  Datacenter& d = dcs_[index_of(dc)];
  auto& queues = kind == SlotKind::map ? d.map_queues : d.reduce_queues;
  auto& cursor = kind == SlotKind::map ? d.map_cursor : d.reduce_cursor;
  const std::size_t n = queues.size();
  const std::size_t start = cursor % n;

  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t i = (start + step) % n;
    TaskQueue& q = queues[i];
    if (q.tasks.empty()) continue;

    const std::size_t pos =
        kind == SlotKind::map && assigner == Assigner::job_driven ? *fifo_pick(q.tasks, vps, *catalog_) : 0;
    const TaskId task = q.tasks[pos];
    q.tasks.erase(q.tasks.begin() + static_cast<std::ptrdiff_t>(pos));

    if (kind == SlotKind::map) {
      const auto key = std::make_pair(task.job, dc);
      if (started_in_dc_.insert(key).second) {
        auto since = head_since_.find(key);
        const std::uint64_t waited = since == head_since_.end() ? 0 : d.map_assignments - since->second;
        head_waits_.push_back(HeadWaitSample{task.job, dc, waited, n});
        if (since != head_since_.end()) head_since_.erase(since);
      }
      ++d.map_assignments;
    }

    cursor = i + 1;
    if (q.tasks.empty() && q.owner) {
      lifecycle_.push_back({QueueRef{QueueKind::dynamic, kind, dc, q.serial}, *q.owner, false, 0});
      queues.erase(queues.begin() + static_cast<std::ptrdiff_t>(i));
      cursor = i;
    } else if (pos == 0 && kind == SlotKind::map) {
      note_head(dc, q);
    }
    cursor %= queues.size();
    return task;
  }
  return std::nullopt;
}

void JossScheduler::job_completed(JobId job) {
  const JobInfo& info = catalog_->job(job);
  registry_.record(info.hash, info.fps);
}

std::size_t JossScheduler::pending_task_count(DcId dc) const {
  const Datacenter& d = dcs_.at(index_of(dc));
  std::size_t total = 0;
  for (const auto& q : d.map_queues) total += q.tasks.size();
  for (const auto& q : d.reduce_queues) total += q.tasks.size();
  return total;
}

Route JossScheduler::route_of(JobId job) const {
  return decisions_.at(decision_of_.at(job)).route;
}

std::vector<TaskId> JossScheduler::queue_contents(const QueueRef& ref) const {
  if (ref.kind == QueueKind::fifo) {
    const auto& fifo = ref.slot == SlotKind::map ? map_fifo_ : reduce_fifo_;
    return {fifo.begin(), fifo.end()};
  }
  const TaskQueue* q = find_queue(ref);
  return {q->tasks.begin(), q->tasks.end()};
}

std::vector<QueueRef> JossScheduler::live_queues() const {
  std::vector<QueueRef> out{QueueRef{QueueKind::fifo, SlotKind::map}, QueueRef{QueueKind::fifo, SlotKind::reduce}};
  for (std::uint32_t c = 0; c < dcs_.size(); ++c) {
    for (SlotKind slot : {SlotKind::map, SlotKind::reduce}) {
      const auto& queues = slot == SlotKind::map ? dcs_[c].map_queues : dcs_[c].reduce_queues;
      for (const auto& q : queues) {
        out.push_back(QueueRef{q.owner ? QueueKind::dynamic : QueueKind::permanent, slot, DcId{c}, q.serial});
      }
    }
  }
  return out;
}

std::string JossScheduler::dump() const {
  std::ostringstream out;
  auto tasks_line = [&](const auto& tasks) {
    for (const TaskId& t : tasks) out << ' ' << to_string(t);
    out << '\n';
  };
  out << "MQ_FIFO:";
  tasks_line(map_fifo_);
  out << "RQ_FIFO:";
  tasks_line(reduce_fifo_);
  for (std::uint32_t c = 0; c < dcs_.size(); ++c) {
    const Datacenter& d = dcs_[c];
    out << fmt::format("cen_{} pending={} I_map={} I_red={}\n", c + 1, pending_task_count(DcId{c}), d.map_cursor,
                       d.reduce_cursor);
    for (SlotKind slot : {SlotKind::map, SlotKind::reduce}) {
      const auto& queues = slot == SlotKind::map ? d.map_queues : d.reduce_queues;
      for (const auto& q : queues) {
        const QueueRef ref{q.owner ? QueueKind::dynamic : QueueKind::permanent, slot, DcId{c}, q.serial};
        out << "  " << to_string(ref);
        if (q.owner) out << " owner=J" << index_of(*q.owner);
        out << ':';
        tasks_line(q.tasks);
      }
    }
  }
  return out.str();
}

}  // namespace joss
