#include "joss/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <map>
#include <queue>
#include <random>

#include <fmt/format.h>

namespace joss {

double CostModel::fetch_rate(Locality level) const noexcept {
  switch (level) {
    case Locality::vps_local: return intra_vps_read_rate;
    case Locality::cen_local: return intra_dc_bandwidth;
    case Locality::off_cen: return inter_dc_bandwidth;
  }
  return inter_dc_bandwidth;
}

double CostModel::link_rate(const ClusterTopology& topology, VpsId source, VpsId destination) const {
  if (source == destination) return intra_vps_read_rate;
  if (topology.datacenter_of(source) == topology.datacenter_of(destination)) return intra_dc_bandwidth;
  return inter_dc_bandwidth;
}

std::vector<std::string> CostModel::warnings() const {
  std::vector<std::string> out;
  if (inter_dc_bandwidth > intra_dc_bandwidth) {
    out.push_back(fmt::format("cost.inter_dc_bandwidth ({}) exceeds cost.intra_dc_bandwidth ({})",
                              inter_dc_bandwidth, intra_dc_bandwidth));
  }
  if (intra_dc_bandwidth > intra_vps_read_rate) {
    out.push_back(fmt::format("cost.intra_dc_bandwidth ({}) exceeds cost.intra_vps_read_rate ({})",
                              intra_dc_bandwidth, intra_vps_read_rate));
  }
  return out;
}

void CostModel::validate() const {
  const std::pair<const char*, double> rates[] = {{"cost.intra_vps_read_rate", intra_vps_read_rate},
                                                  {"cost.intra_dc_bandwidth", intra_dc_bandwidth},
                                                  {"cost.inter_dc_bandwidth", inter_dc_bandwidth}};
  for (const auto& [name, rate] : rates) {
    if (!std::isfinite(rate) || rate <= 0.0) throw ConfigError(fmt::format("{} must be a positive rate", name));
  }
}

const char* to_string(TransferCause cause) noexcept {
  return cause == TransferCause::map_input ? "MAP_INPUT" : "SHUFFLE";
}

MapCost map_task_cost(Bytes block_bytes, Locality level, VpsId source, VpsId destination, const CostModel& cost,
                      const BenchmarkProfile& profile) {
  MapCost out;
  const double bytes = static_cast<double>(block_bytes);
  out.duration = bytes / cost.fetch_rate(level) + bytes / profile.map_compute_rate;
  if (level != Locality::vps_local) {
    out.fetch = TransferRecord{source, destination, block_bytes, level == Locality::off_cen,
                               TransferCause::map_input, TaskId{}};
  }
  return out;
}

VpsId fetch_source(const ClusterTopology& topology, const BlockPlacement& placement, VpsId vps, JobId job,
                   std::uint32_t block) {
  const auto replicas = placement.replicas(job, block);
  if (replicas.empty()) throw SimulationError(fmt::format("block {} of job {} has no replica", block, index_of(job)));
  const DcId home = topology.datacenter_of(vps);
  std::optional<VpsId> same_dc;
  for (VpsId r : replicas) {
    if (r == vps) return r;
    if (!same_dc && topology.datacenter_of(r) == home) same_dc = r;
  }
  return same_dc ? *same_dc : replicas.front();
}

ReduceOutcome shuffle_and_reduce(std::span<const ShufflePiece> pieces, TaskId reducer, VpsId reducer_vps,
                                 Seconds assigned_at, const ClusterTopology& topology, const CostModel& cost,
                                 const BenchmarkProfile& profile) {
  std::vector<std::size_t> order(pieces.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::max(pieces[a].available, assigned_at) < std::max(pieces[b].available, assigned_at);
  });

  ReduceOutcome out;
  out.landed.assign(pieces.size(), assigned_at);
  out.ready = assigned_at;
  ShuffleLink link;
  const DcId home = topology.datacenter_of(reducer_vps);
  for (std::size_t i : order) {
    const ShufflePiece& p = pieces[i];
    const double rate = cost.link_rate(topology, p.source, reducer_vps);
    out.landed[i] = link.send(std::max(p.available, assigned_at), static_cast<double>(p.bytes) / rate);
    out.ready = std::max(out.ready, out.landed[i]);
    out.total_bytes += p.bytes;
    const bool crosses = topology.datacenter_of(p.source) != home;
    if (!crosses) out.local_bytes += p.bytes;
    out.transfers.push_back({p.source, reducer_vps, p.bytes, crosses, TransferCause::shuffle, reducer});
  }
  out.finish = out.ready + static_cast<double>(out.total_bytes) / profile.reduce_compute_rate;
  return out;
}

Bytes account_traffic(std::span<const TransferRecord> records) noexcept {
  Bytes total = 0;
  for (const auto& r : records) {
    if (r.crosses_datacenter) total += r.bytes;
  }
  return total;
}

const char* to_string(SchedulerKind kind) noexcept {
  switch (kind) {
    case SchedulerKind::joss_t: return "joss-t";
    case SchedulerKind::joss_j: return "joss-j";
    case SchedulerKind::fifo: return "fifo";
    case SchedulerKind::fair: return "fair";
    case SchedulerKind::capacity: return "capacity";
  }
  return "?";
}

SchedulerKind scheduler_kind_from_string(std::string_view text) {
  for (auto k : all_scheduler_kinds()) {
    if (text == to_string(k)) return k;
  }
  throw ConfigError(fmt::format("unknown scheduler '{}' (expected joss-t, joss-j, fifo, fair or capacity)", text));
}

std::vector<SchedulerKind> all_scheduler_kinds() {
  return {SchedulerKind::joss_t, SchedulerKind::joss_j, SchedulerKind::fifo, SchedulerKind::fair,
          SchedulerKind::capacity};
}

namespace {

enum class EventKind : std::uint8_t { job_arrival, map_done, shuffle_piece_done, reduce_ready, reduce_done, slot_idle };

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::job_arrival: return "JOB_ARRIVAL";
    case EventKind::map_done: return "MAP_DONE";
    case EventKind::shuffle_piece_done: return "SHUFFLE_PIECE_DONE";
    case EventKind::reduce_ready: return "REDUCE_READY";
    case EventKind::reduce_done: return "REDUCE_DONE";
    case EventKind::slot_idle: return "SLOT_IDLE";
  }
  return "?";
}

struct Event {
  Seconds time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::slot_idle;
  JobId job{};
  std::uint32_t index = 0;  // map or reduce index
  std::uint32_t piece = 0;  // source map of a shuffle piece

  bool operator>(const Event& other) const {
    if (time != other.time) return time > other.time;
    return seq > other.seq;
  }
};

struct ReducerState {
  bool assigned = false;
  VpsId vps{};
  Seconds start = 0.0;
  Seconds ready = 0.0;
  ShuffleLink link;
  std::uint32_t landed = 0;
  Bytes local_bytes = 0;
  Bytes total_bytes = 0;
  std::size_t record = 0;
};

struct JobState {
  const JobInfo* info = nullptr;
  bool arrived = false;
  bool complete = false;
  std::vector<bool> map_assigned;
  std::vector<VpsId> map_vps;
  std::vector<Bytes> map_output;
  std::vector<std::uint32_t> maps_finished;  // completion order
  std::vector<ReducerState> reducers;
  std::uint32_t reduces_done = 0;
  std::size_t record = 0;
};

std::unique_ptr<Scheduler> make_scheduler(SchedulerKind kind, const JobCatalog& catalog, const RunOptions& options) {
  switch (kind) {
    case SchedulerKind::joss_t:
      return std::make_unique<JossScheduler>(catalog, Assigner::task_driven, options.registry);
    case SchedulerKind::joss_j:
      return std::make_unique<JossScheduler>(catalog, Assigner::job_driven, options.registry);
    case SchedulerKind::fifo: return std::make_unique<FifoScheduler>(catalog);
    case SchedulerKind::fair: return std::make_unique<FairScheduler>(catalog);
    case SchedulerKind::capacity: return std::make_unique<CapacityScheduler>(catalog, options.capacity);
  }
  throw std::logic_error("unhandled scheduler kind");
}

}  // namespace

class Simulation::Loop {
 public:
  explicit Loop(Simulation& sim)
      : sim_(sim),
        catalog_(*sim.catalog_),
        topology_(catalog_.topology()),
        cost_(sim.options_.cost),
        log_(sim.options_.event_log),
        rng_(derived_rng(sim.options_.seed, 0x6f66666572ULL)) {
    free_map_.resize(topology_.vps_count());
    free_reduce_.resize(topology_.vps_count());
    for (std::uint32_t v = 0; v < topology_.vps_count(); ++v) {
      free_map_[v] = topology_.node(VpsId{v}).map_slots;
      free_reduce_[v] = topology_.node(VpsId{v}).reduce_slots;
    }
    offer_order_.resize(topology_.vps_count());
    for (std::uint32_t v = 0; v < topology_.vps_count(); ++v) offer_order_[v] = VpsId{v};

    report_.scheduler = std::string(sim.scheduler_->name());
    report_.workload = sim.options_.workload_name;
    report_.trace_digest = fmt::format("{:016x}", trace_digest(*sim.trace_));
    report_.datacenters = topology_.datacenter_count();
    report_.vps_map_counts.assign(topology_.vps_count(), 0);
  }

  MetricsReport run() {
    for (const JobSpec& spec : sim_.trace_->jobs) {
      JobState js;
      js.info = &catalog_.job(spec.id);
      js.map_assigned.assign(js.info->map_count(), false);
      js.map_vps.assign(js.info->map_count(), VpsId{});
      js.map_output.assign(js.info->map_count(), 0);
      js.reducers.resize(js.info->reduce_count());
      js.record = report_.jobs.size();
      JobRecord rec;
      rec.job = spec.id;
      rec.profile = spec.profile;
      rec.job_class = js.info->nominal_class;
      rec.arrival = spec.arrival;
      rec.completion = -1.0;
      rec.maps = js.info->map_count();
      report_.jobs.push_back(std::move(rec));
      if (!jobs_.emplace(spec.id, std::move(js)).second) {
        throw SimulationError(fmt::format("duplicate job id {} in trace", index_of(spec.id)));
      }
      push(spec.arrival, EventKind::job_arrival, spec.id);
    }

    std::uint64_t processed = 0;
    while (!events_.empty()) {
      const Event ev = events_.top();
      events_.pop();
      if (ev.time < now_) {
        throw SimulationError(fmt::format("clock moved backwards: {} < {}", ev.time, now_));
      }
      now_ = ev.time;
      if (++processed > kEventBudget) throw SimulationError("event budget exhausted; simulation is not terminating");
      handle(ev);
    }

    if (completed_ != jobs_.size()) {
      std::size_t waiting_maps = 0;
      for (const auto& [id, js] : jobs_) {
        waiting_maps += static_cast<std::size_t>(std::count(js.map_assigned.begin(), js.map_assigned.end(), false));
      }
      throw SimulationError(fmt::format("no progress at t={}: {} of {} jobs incomplete, {} map tasks never assigned",
                                        now_, jobs_.size() - completed_, jobs_.size(), waiting_maps));
    }
    finish_report();
    return std::move(report_);
  }

 private:
  static constexpr std::uint64_t kEventBudget = 500'000'000;

  void push(Seconds time, EventKind kind, JobId job, std::uint32_t index = 0, std::uint32_t piece = 0) {
    if (time < now_) throw SimulationError("event scheduled in the past");
    events_.push(Event{time, seq_++, kind, job, index, piece});
  }

  void request_dispatch() {
    if (dispatch_pending_) return;
    dispatch_pending_ = true;
    push(now_, EventKind::slot_idle, JobId{});
  }

  void log(const Event& ev, const std::string& detail) {
    if (!log_) return;
    *log_ << format_double(ev.time) << ' ' << to_string(ev.kind);
    if (!detail.empty()) *log_ << ' ' << detail;
    *log_ << '\n';
  }

  void handle(const Event& ev) {
    switch (ev.kind) {
      case EventKind::job_arrival: {
        jobs_.at(ev.job).arrived = true;
        log(ev, fmt::format("J{}", index_of(ev.job)));
        sim_.scheduler_->submit(ev.job);
        request_dispatch();
        break;
      }
      case EventKind::slot_idle: {
        dispatch_pending_ = false;
        if (log_) log(ev, "");
        dispatch_round();
        break;
      }
      case EventKind::map_done: on_map_done(ev); break;
      case EventKind::shuffle_piece_done: on_piece_done(ev); break;
      case EventKind::reduce_ready: on_reduce_ready(ev); break;
      case EventKind::reduce_done: on_reduce_done(ev); break;
    }
  }

  void dispatch_round() {
    std::shuffle(offer_order_.begin(), offer_order_.end(), rng_);
    for (SlotKind kind : {SlotKind::map, SlotKind::reduce}) {
      auto& free = kind == SlotKind::map ? free_map_ : free_reduce_;
      for (VpsId vps : offer_order_) {
        while (free[index_of(vps)] > 0) {
          const auto task = sim_.scheduler_->next_task(vps, kind);
          if (!task) break;
          --free[index_of(vps)];
          start_task(*task, vps, kind);
        }
      }
    }
  }

  JobState& checked_job(const TaskId& task, SlotKind kind) {
    auto it = jobs_.find(task.job);
    if (it == jobs_.end() || !it->second.arrived) {
      throw SimulationError("scheduler returned a task of an unknown or unarrived job: " + to_string(task));
    }
    if (task.kind != kind) throw SimulationError("scheduler returned " + to_string(task) + " for a wrong slot kind");
    return it->second;
  }

  void start_task(const TaskId& task, VpsId vps, SlotKind kind) {
    JobState& js = checked_job(task, kind);
    if (kind == SlotKind::map) {
      start_map(js, task, vps);
    } else {
      start_reduce(js, task, vps);
    }
    sim_.scheduler_->task_started(task, vps);
  }

  void start_map(JobState& js, const TaskId& task, VpsId vps) {
    if (task.index >= js.map_assigned.size() || js.map_assigned[task.index]) {
      throw SimulationError("map task assigned twice or out of range: " + to_string(task));
    }
    js.map_assigned[task.index] = true;
    js.map_vps[task.index] = vps;
    const JobInfo& info = *js.info;
    const Bytes block = info.block_sizes[task.index];
    const Locality level = catalog_.locality(vps, task);
    const VpsId source = fetch_source(topology_, catalog_.placement(), vps, task.job, task.index);
    MapCost cost = map_task_cost(block, level, source, vps, cost_, *info.profile);
    const Bytes output = map_output_bytes(block, info.fps[task.index]);
    js.map_output[task.index] = output;

    JobRecord& rec = report_.jobs[js.record];
    switch (level) {
      case Locality::vps_local: ++rec.vps_local; break;
      case Locality::cen_local: ++rec.cen_local; break;
      case Locality::off_cen: ++rec.off_cen; break;
    }
    if (cost.fetch) {
      cost.fetch->consumer = task;
      if (cost.fetch->crosses_datacenter) {
        rec.int_bytes += cost.fetch->bytes;
        report_.int_map_bytes += cost.fetch->bytes;
      }
      sim_.transfers_.push_back(*cost.fetch);
    }
    ++report_.vps_map_counts[index_of(vps)];
    report_.maps.push_back(MapRecord{task, vps, level, now_, now_ + cost.duration, block, output});
    if (log_) {
      *log_ << format_double(now_) << " ASSIGN " << to_string(task) << ' ' << topology_.vps_name(vps) << ' '
            << to_string(level) << '\n';
    }
    push(now_ + cost.duration, EventKind::map_done, task.job, task.index);
  }

  void start_reduce(JobState& js, const TaskId& task, VpsId vps) {
    if (task.index >= js.reducers.size() || js.reducers[task.index].assigned) {
      throw SimulationError("reduce task assigned twice or out of range: " + to_string(task));
    }
    ReducerState& rs = js.reducers[task.index];
    rs.assigned = true;
    rs.vps = vps;
    rs.start = now_;
    rs.record = report_.reduces.size();
    report_.reduces.push_back(ReduceRecord{task, vps, now_, 0.0, 0.0, 0, 0});
    if (log_) *log_ << format_double(now_) << " ASSIGN " << to_string(task) << ' ' << topology_.vps_name(vps) << '\n';
    for (std::uint32_t m : js.maps_finished) send_piece(js, task.index, m);
  }

  void send_piece(JobState& js, std::uint32_t reducer, std::uint32_t map) {
    ReducerState& rs = js.reducers[reducer];
    const JobInfo& info = *js.info;
    const Bytes bytes = partition_bytes(js.map_output[map], reducer, info.reduce_count());
    const VpsId source = js.map_vps[map];
    const double rate = cost_.link_rate(topology_, source, rs.vps);
    const Seconds landed = rs.link.send(now_, static_cast<double>(bytes) / rate);
    const bool crosses = topology_.datacenter_of(source) != topology_.datacenter_of(rs.vps);
    rs.total_bytes += bytes;
    if (!crosses) rs.local_bytes += bytes;
    const TaskId consumer{info.spec.id, SlotKind::reduce, reducer};
    sim_.transfers_.push_back(TransferRecord{source, rs.vps, bytes, crosses, TransferCause::shuffle, consumer});
    if (crosses) {
      report_.jobs[js.record].int_bytes += bytes;
      report_.int_shuffle_bytes += bytes;
    }
    push(landed, EventKind::shuffle_piece_done, info.spec.id, reducer, map);
  }

  void on_map_done(const Event& ev) {
    JobState& js = jobs_.at(ev.job);
    const TaskId task{ev.job, SlotKind::map, ev.index};
    const VpsId vps = js.map_vps[ev.index];
    release(free_map_, vps, topology_.node(vps).map_slots);
    log(ev, to_string(task));
    sim_.scheduler_->task_finished(task, vps);
    js.maps_finished.push_back(ev.index);
    for (std::uint32_t j = 0; j < js.reducers.size(); ++j) {
      if (js.reducers[j].assigned) send_piece(js, j, ev.index);
    }
    if (js.reducers.empty() && js.maps_finished.size() == js.map_assigned.size()) complete(js);
    request_dispatch();
  }

  void on_piece_done(const Event& ev) {
    JobState& js = jobs_.at(ev.job);
    ReducerState& rs = js.reducers[ev.index];
    log(ev, fmt::format("J{}.M{}->R{}", index_of(ev.job), ev.piece, ev.index));
    if (++rs.landed == js.map_assigned.size()) push(now_, EventKind::reduce_ready, ev.job, ev.index);
  }

  void on_reduce_ready(const Event& ev) {
    JobState& js = jobs_.at(ev.job);
    ReducerState& rs = js.reducers[ev.index];
    rs.ready = now_;
    log(ev, fmt::format("J{}.R{}", index_of(ev.job), ev.index));
    const double rate = js.info->profile->reduce_compute_rate;
    push(now_ + static_cast<double>(rs.total_bytes) / rate, EventKind::reduce_done, ev.job, ev.index);
  }

  void on_reduce_done(const Event& ev) {
    JobState& js = jobs_.at(ev.job);
    ReducerState& rs = js.reducers[ev.index];
    const TaskId task{ev.job, SlotKind::reduce, ev.index};
    release(free_reduce_, rs.vps, topology_.node(rs.vps).reduce_slots);
    log(ev, to_string(task));
    sim_.scheduler_->task_finished(task, rs.vps);
    ReduceRecord& rec = report_.reduces[rs.record];
    rec.ready = rs.ready;
    rec.finish = now_;
    rec.local_bytes = rs.local_bytes;
    rec.total_bytes = rs.total_bytes;
    JobRecord& job = report_.jobs[js.record];
    job.reduce_local_bytes += rs.local_bytes;
    job.reduce_total_bytes += rs.total_bytes;
    if (++js.reduces_done == js.reducers.size()) complete(js);
    request_dispatch();
  }

  void release(std::vector<std::uint32_t>& free, VpsId vps, std::uint32_t capacity) {
    if (free[index_of(vps)] >= capacity) {
      throw SimulationError("slot released twice on " + topology_.vps_name(vps));
    }
    ++free[index_of(vps)];
  }

  void complete(JobState& js) {
    js.complete = true;
    ++completed_;
    report_.jobs[js.record].completion = now_;
    if (log_) *log_ << format_double(now_) << " JOB_DONE J" << index_of(js.info->spec.id) << '\n';
    report_.completion.push_back(
        CompletionPoint{now_, static_cast<double>(completed_) / static_cast<double>(jobs_.size())});
    sim_.scheduler_->job_completed(js.info->spec.id);
  }

  void finish_report() {
    const auto* joss = sim_.joss();
    for (JobRecord& rec : report_.jobs) rec.route = joss ? joss->route_of(rec.job) : Route::none;
    report_.int_bytes = account_traffic(sim_.transfers_);
    if (report_.int_bytes != report_.int_map_bytes + report_.int_shuffle_bytes) {
      throw SimulationError("traffic accounting mismatch");
    }
  }

  Simulation& sim_;
  const JobCatalog& catalog_;
  const ClusterTopology& topology_;
  const CostModel& cost_;
  std::ostream* log_;
  std::mt19937_64 rng_;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  Seconds now_ = 0.0;
  bool dispatch_pending_ = false;

  std::vector<std::uint32_t> free_map_;
  std::vector<std::uint32_t> free_reduce_;
  std::vector<VpsId> offer_order_;
  std::map<JobId, JobState> jobs_;
  std::size_t completed_ = 0;
  MetricsReport report_;
};

Simulation::Simulation(const JobCatalog& catalog, const WorkloadTrace& trace, SchedulerKind kind, RunOptions options)
    : catalog_(&catalog), trace_(&trace), kind_(kind), options_(std::move(options)) {
  options_.cost.validate();
  if (trace.jobs.size() != catalog.jobs().size()) {
    throw ConfigError("trace and catalog disagree on the number of jobs");
  }
  scheduler_ = make_scheduler(kind, catalog, options_);
}

Simulation::~Simulation() = default;

const JossScheduler* Simulation::joss() const noexcept {
  if (kind_ != SchedulerKind::joss_t && kind_ != SchedulerKind::joss_j) return nullptr;
  return static_cast<const JossScheduler*>(scheduler_.get());
}

MetricsReport Simulation::run() {
  if (ran_) throw std::logic_error("Simulation::run called twice");
  ran_ = true;
  Loop loop(*this);
  return loop.run();
}

MetricsReport simulate(const JobCatalog& catalog, const WorkloadTrace& trace, SchedulerKind kind,
                       RunOptions options) {
  Simulation sim(catalog, trace, kind, std::move(options));
  return sim.run();
}

}  // namespace joss
