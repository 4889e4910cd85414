// Acceptance checks. One PASS/FAIL line per criterion; `joss-acceptance N`
// runs criterion N alone.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include "support.hpp"

using namespace joss;
using namespace joss::testing;
using boost::multiprecision::cpp_rational;

namespace {

constexpr int kSeeds = 5;
constexpr double kBaselineOffCenFloor = 0.1;
constexpr double kIntRatioCeiling = 0.7;
constexpr double kLoadMean = 80.0;
constexpr std::size_t kSmallMaps = 2400;
constexpr double kFastSeconds = 1.0;
constexpr double kSmallRunSeconds = 60.0;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct PresetRun {
  std::unique_ptr<Experiment> experiment;
  std::map<SchedulerKind, MetricsReport> reports;
  std::map<SchedulerKind, std::unique_ptr<Simulation>> sims;
};

// Runs every scheduler on one shared trace and placement, keeping the
// simulations alive for their scheduler probes.
PresetRun run_preset(const std::string& name, std::uint64_t seed) {
  const ScenarioConfig config = preset(name, seed);
  PresetRun out;
  out.experiment = Experiment::from_scenario(config);
  for (SchedulerKind kind : all_scheduler_kinds()) {
    auto sim = std::make_unique<Simulation>(out.experiment->catalog(), out.experiment->trace(), kind,
                                            run_options(config));
    out.reports[kind] = sim->run();
    out.sims[kind] = std::move(sim);
  }
  return out;
}

const PresetRun& small_seed1() {
  static const PresetRun run = run_preset("small", 1);
  return run;
}

Outcome threshold_optimality() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Bytes> blocks(8, 128 * kMiB);
  const cpp_rational input = std::accumulate(blocks.begin(), blocks.end(), cpp_rational(0),
                                             [](cpp_rational acc, Bytes b) { return acc + cpp_rational(b); });
  int checked = 0;
  for (std::uint32_t k = 2; k <= 6; ++k) {
    const Threshold td = threshold(k);
    std::vector<double> grid;
    for (int i = 0; i <= 100; ++i) grid.push_back(i / 20.0);
    grid.push_back(static_cast<double>(k) / static_cast<double>(k - 1));
    for (double fp : grid) {
      const cpp_rational exact_fp(fp);
      const cpp_rational tr1 = input;
      const cpp_rational tr2 = cpp_rational(k - 1, k) * input * exact_fp;
      const bool rh_oracle = tr2 > tr1;
      const bool rh = classify_heaviness(fp, td) == Heaviness::reduce_heavy;
      const bool preferred = worst_case_traffic(blocks, fp, k).reduce_heavy_preferred;
      o.require(rh == rh_oracle, fmt::format("k={} fp={} classified {}", k, fp, rh ? "RH" : "MH"));
      o.require(preferred == rh_oracle, fmt::format("k={} fp={} traffic comparison disagrees", k, fp));
      if (exact_fp == cpp_rational(k, k - 1)) o.require(!rh, fmt::format("k={} boundary not MH", k));
      ++checked;
    }
  }
  const double elapsed = seconds_since(t0);
  o.require(elapsed < kFastSeconds, fmt::format("took {:.3f} s", elapsed));
  if (o.pass) o.detail = fmt::format("{} (k, FP) points agree with exact rational traffic", checked);
  return o;
}

Outcome fig3_replay() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const ClusterTopology topo = topology_of({6, 6, 6});
  auto vps = [&](std::uint32_t c, std::uint32_t l) { return topo.vps_at(DcId{c - 1}, l - 1); };
  BlockPlacement placement(2);
  placement.set(JobId{0}, {{vps(2, 1), vps(1, 1)},
                           {vps(2, 2), vps(3, 1)},
                           {vps(2, 1), vps(2, 3)},
                           {vps(1, 2), vps(3, 2)},
                           {vps(2, 3), vps(1, 3)},
                           {vps(3, 1), vps(3, 3)}});
  const ProfileTable profiles = ProfileTable::defaults();
  const WorkloadTrace trace = trace_of({job_of(0, "WC", 6 * 128 * kMiB, 0.0, 1)});
  const FpSamples fps = mean_fps(trace, profiles);
  const JobCatalog catalog(topo, placement, trace, profiles, fps);
  FpRegistry registry;
  registry.record_mean(job_hash("WC", "web"), profiles.at("WC").fp_mean);
  JossScheduler sched(catalog, Assigner::task_driven, registry);
  const auto& decision = sched.schedule_job(JobId{0});

  auto maps = [](std::initializer_list<std::uint32_t> blocks) {
    std::vector<TaskId> out;
    for (auto b : blocks) out.push_back({JobId{0}, SlotKind::map, b - 1});
    return out;
  };
  auto mq = [](std::uint32_t c) { return QueueRef{QueueKind::permanent, SlotKind::map, DcId{c - 1}, 0}; };
  auto rq = [](std::uint32_t c) { return QueueRef{QueueKind::permanent, SlotKind::reduce, DcId{c - 1}, 0}; };
  o.require(decision.route == Route::policy_b, "route is not policy B");
  o.require(sched.queue_contents(mq(2)) == maps({1, 2, 3, 5}), "MQ_{2,0} != blocks 1,2,3,5");
  o.require(sched.queue_contents(mq(3)) == maps({4, 6}), "MQ_{3,0} != blocks 4,6");
  o.require(sched.queue_contents(mq(1)).empty(), "MQ_{1,0} not empty");
  o.require(sched.queue_contents(rq(2)) == std::vector<TaskId>{{JobId{0}, SlotKind::reduce, 0}},
            "reduce not in RQ_{2,0}");
  o.require(sched.queue_contents(rq(1)).empty() && sched.queue_contents(rq(3)).empty(), "stray reduce");
  const double elapsed = seconds_since(t0);
  o.require(elapsed < kFastSeconds, fmt::format("took {:.3f} s", elapsed));
  if (o.pass) o.detail = "4 maps in MQ_{2,0}, 2 in MQ_{3,0}, reduce in RQ_{2,0}";
  return o;
}

Outcome policy_a_reduce_locality() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const PresetRun& run = small_seed1();
  const double elapsed = seconds_since(t0);
  std::size_t jobs = 0;
  for (SchedulerKind kind : {SchedulerKind::joss_t, SchedulerKind::joss_j}) {
    for (const auto& j : run.reports.at(kind).jobs) {
      if (j.job_class != JobClass::small_rh) continue;
      ++jobs;
      const ReduceLocality rl = reduce_locality_rate(j);
      o.require(j.route == Route::policy_a, fmt::format("{} J{} not routed by policy A", to_string(kind),
                                                        index_of(j.job)));
      o.require(!rl.zero_input && rl.rate == 1.0,
                fmt::format("{} J{} reduce locality {}", to_string(kind), index_of(j.job), rl.rate));
    }
  }
  o.require(jobs == 2 * 61, fmt::format("expected 122 SMALL_RH job runs, saw {}", jobs));
  o.require(elapsed < kSmallRunSeconds, fmt::format("took {:.1f} s", elapsed));
  if (o.pass) o.detail = fmt::format("{} Permu job runs at reduce locality 1.0 ({:.2f} s for 5 schedulers)", jobs,
                                     elapsed);
  return o;
}

Outcome policy_b_map_locality() {
  Outcome o;
  const PresetRun& run = small_seed1();
  std::string rates;
  for (SchedulerKind kind : {SchedulerKind::joss_t, SchedulerKind::joss_j}) {
    const LocalityCounts c = locality_counts(run.reports.at(kind), class_is(JobClass::small_mh));
    o.require(c.total > 0, "no SMALL_MH maps");
    o.require(c.vps_local + c.cen_local == c.total,
              fmt::format("{} has {} off-Cen SMALL_MH maps", to_string(kind), c.total - c.vps_local - c.cen_local));
    o.require(locality_rates(c)->off_cen == 0.0, fmt::format("{} off-Cen rate not 0", to_string(kind)));
  }
  for (SchedulerKind kind : {SchedulerKind::fifo, SchedulerKind::fair, SchedulerKind::capacity}) {
    const double off = locality_rates(locality_counts(run.reports.at(kind)))->off_cen;
    rates += fmt::format(" {}={:.4f}", to_string(kind), off);
    o.require(off > kBaselineOffCenFloor, fmt::format("{} off-Cen {:.4f} <= {}", to_string(kind), off,
                                                      kBaselineOffCenFloor));
  }
  if (o.pass) o.detail = "JoSS SMALL_MH off-Cen = 0; baselines" + rates;
  return o;
}

Outcome int_ordering() {
  Outcome o;
  std::string ratios;
  for (const std::string name : {"small", "mixed"}) {
    double worst = 0.0;
    ratios += fmt::format(" {}:", name);
    for (int seed = 1; seed <= kSeeds; ++seed) {
      const PresetRun run = run_preset(name, static_cast<std::uint64_t>(seed));
      const Bytes fifo = run.reports.at(SchedulerKind::fifo).int_bytes;
      for (SchedulerKind joss : {SchedulerKind::joss_t, SchedulerKind::joss_j}) {
        const Bytes mine = run.reports.at(joss).int_bytes;
        for (SchedulerKind base : {SchedulerKind::fifo, SchedulerKind::fair, SchedulerKind::capacity}) {
          const Bytes theirs = run.reports.at(base).int_bytes;
          o.require(mine < theirs, fmt::format("{} seed {}: INT({})={} >= INT({})={}", name, seed, to_string(joss),
                                               mine, to_string(base), theirs));
        }
        const double ratio = static_cast<double>(mine) / static_cast<double>(fifo);
        worst = std::max(worst, ratio);
        ratios += fmt::format(" {:.3f}", ratio);
        o.require(ratio < kIntRatioCeiling,
                  fmt::format("{} seed {}: INT({})/INT(fifo) = {:.3f}", name, seed, to_string(joss), ratio));
      }
    }
    ratios += fmt::format(" (max {:.3f})", worst);
  }
  o.detail = (o.pass ? std::string() : o.detail + " |") + " JoSS/FIFO INT ratios" + ratios;
  return o;
}

Outcome task_conservation() {
  Outcome o;
  const PresetRun& run = small_seed1();
  for (const auto& [kind, report] : run.reports) {
    const auto& counts = report.vps_map_counts;
    const auto total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
    o.require(report.maps.size() == kSmallMaps && total == kSmallMaps,
              fmt::format("{} ran {} maps", to_string(kind), report.maps.size()));
    o.require(counts.size() == 30, "expected 30 VPSs");
    o.require(vps_load_stats(report).mean == kLoadMean,
              fmt::format("{} load mean {}", to_string(kind), vps_load_stats(report).mean));
  }
  if (o.pass) o.detail = "2400 maps, mean 80 per VPS for all five schedulers";
  return o;
}

Outcome large_job_queues() {
  Outcome o;
  // Adversarial trace on 2 x 4 VPSs: two large jobs (24 blocks) and three
  // small ones (2 blocks) arriving while the first large job saturates.
  const ProfileTable profiles = ProfileTable::defaults();
  const ClusterTopology topo = topology_of({4, 4});
  const WorkloadTrace trace = trace_of({job_of(0, "WC", 24 * 128 * kMiB, 0.0, 1),
                                        job_of(1, "Grep", 2 * 128 * kMiB, 1.0, 2),
                                        job_of(2, "II", 24 * 128 * kMiB, 2.0, 3),
                                        job_of(3, "SC", 2 * 128 * kMiB, 3.0, 4),
                                        job_of(4, "WC", 2 * 128 * kMiB, 4.0, 5)});
  const BlockPlacement placement = place_workload(topo, trace, 1, 7);
  const FpSamples fps = sample_workload_fps(trace, profiles, 7);
  const JobCatalog catalog(topo, placement, trace, profiles, fps);
  ScenarioConfig warm;
  const FpRegistry registry = initial_registry(warm);
  const std::set<JobId> large{JobId{0}, JobId{2}};
  std::size_t samples = 0;
  std::uint64_t worst_wait = 0;

  for (SchedulerKind kind : {SchedulerKind::joss_t, SchedulerKind::joss_j}) {
    RunOptions options;
    options.registry = registry;
    Simulation sim(catalog, trace, kind, options);
    sim.run();
    const JossScheduler& js = *sim.joss();
    const std::string tag = to_string(kind);

    // (a) large-job tasks only ever enter dynamic queues
    for (const auto& d : js.decisions()) {
      const bool is_large = large.contains(d.job);
      o.require(is_large == (d.job_class == JobClass::large), fmt::format("{} J{} misclassified", tag,
                                                                          index_of(d.job)));
      for (const auto& e : d.enqueues) {
        if (is_large) {
          o.require(e.queue.kind == QueueKind::dynamic,
                    fmt::format("{} large J{} task in {}", tag, index_of(d.job), to_string(e.queue)));
        }
      }
    }

    // (b) every created dynamic queue is retired, empty, and none survive
    std::map<QueueRef, int> balance;
    for (const auto& ev : js.queue_lifecycle()) {
      balance[ev.queue] += ev.created ? 1 : -1;
      if (!ev.created) o.require(ev.size == 0, fmt::format("{} {} retired non-empty", tag, to_string(ev.queue)));
    }
    o.require(!balance.empty(), tag + " created no dynamic queues");
    for (const auto& [ref, b] : balance) {
      o.require(b == 0, fmt::format("{} {} not retired", tag, to_string(ref)));
    }
    for (const auto& ref : js.live_queues()) {
      o.require(ref.kind != QueueKind::dynamic, fmt::format("{} {} still live", tag, to_string(ref)));
    }

    // (c) small jobs reach a slot within two round-robin cycles of their head
    for (const auto& w : js.head_waits()) {
      if (large.contains(w.job)) continue;
      ++samples;
      worst_wait = std::max(worst_wait, w.waited_assignments);
      o.require(w.waited_assignments <= 2 * w.live_queues,
                fmt::format("{} J{} waited {} assignments with {} queues", tag, index_of(w.job),
                            w.waited_assignments, w.live_queues));
    }
  }

  // Drain check at the scheduler level: a dynamic queue disappears the moment
  // its last task is taken, and the small job behind it is not starved.
  {
    JossScheduler js(catalog, Assigner::task_driven, registry);
    js.schedule_job(JobId{0});
    js.schedule_job(JobId{1});
    const VpsId worker = topo.vps_at(DcId{0}, 0);
    std::size_t calls = 0;
    std::optional<std::size_t> small_first;
    while (auto task = js.next_task(worker, SlotKind::map)) {
      ++calls;
      if (task->job == JobId{1} && !small_first) small_first = calls;
      for (const auto& ref : js.live_queues()) {
        if (ref.kind == QueueKind::dynamic) {
          o.require(!js.queue_contents(ref).empty(), fmt::format("drained {} still live", to_string(ref)));
        }
      }
    }
    o.require(js.map_queue_count(DcId{0}) == 1, "dynamic map queue survived draining");
    const bool small_here = !js.queue_contents({QueueKind::permanent, SlotKind::map, DcId{0}, 0}).empty() ||
                            small_first.has_value();
    if (small_here) o.require(small_first && *small_first <= 4, "small job starved behind the large job");
  }

  o.require(samples >= 3, fmt::format("only {} small-job head samples", samples));
  if (o.pass) {
    o.detail = fmt::format("large tasks only in dynamic queues; all retired when drained; {} small-job heads, "
                           "worst wait {} assignments", samples, worst_wait);
  }
  return o;
}

Outcome tta_jta_differential() {
  Outcome o;
  std::string margins;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const ScenarioConfig config = preset("small", static_cast<std::uint64_t>(seed));
    const auto ex = Experiment::from_scenario(config);
    const double t = locality_rates(locality_counts(ex->run(SchedulerKind::joss_t, run_options(config))))->vps;
    const double j = locality_rates(locality_counts(ex->run(SchedulerKind::joss_j, run_options(config))))->vps;
    margins += fmt::format(" {:+.4f}", j - t);
    o.require(j >= t, fmt::format("seed {}: JoSS-J {:.4f} < JoSS-T {:.4f}", seed, j, t));
  }
  o.detail = (o.pass ? std::string() : o.detail + " |") + " JoSS-J minus JoSS-T VPS-locality:" + margins;
  return o;
}

Outcome determinism_and_oracle() {
  Outcome o;
  std::size_t reports = 0;
  for (const std::string name : {"small", "mixed"}) {
    const ScenarioConfig config = preset(name, 3);
    const auto first = Experiment::from_scenario(config);
    const auto second = Experiment::from_scenario(config);
    for (SchedulerKind kind : all_scheduler_kinds()) {
      const MetricsReport a = first->run(kind, run_options(config));
      const MetricsReport b = second->run(kind, run_options(config));
      std::ostringstream ja, jb, ca, cb;
      write_json(ja, a);
      write_json(jb, b);
      write_csv(ca, a);
      write_csv(cb, b);
      o.require(ja.str() == jb.str() && ca.str() == cb.str(),
                fmt::format("{} {} reports differ between runs", name, to_string(kind)));

      const Bytes rebuilt = oracle_int(a, *first);
      o.require(rebuilt == a.int_bytes,
                fmt::format("{} {} INT {} != oracle {}", name, to_string(kind), a.int_bytes, rebuilt));

      for (const auto& row : summarize(a)) {
        if (!row.locality) continue;
        const auto& r = *row.locality;
        o.require(r.vps + r.cen + r.off_cen == 1.0,
                  fmt::format("{} {} {} rates sum to {}", name, to_string(kind), row.profile,
                              r.vps + r.cen + r.off_cen));
      }
      ++reports;
    }
  }
  if (o.pass) o.detail = fmt::format("{} reports byte-identical on rerun, INT equals oracle, rates sum to 1", reports);
  return o;
}

Outcome fp_bootstrap() {
  Outcome o;
  ProfileTable profiles = ProfileTable::defaults();
  profiles.add(BenchmarkProfile{"Fresh", "logs", 0.7, 0.05, 16.0 * kMiB, 16.0 * kMiB});
  const ClusterTopology topo = topology_of({15, 15});
  const WorkloadTrace trace =
      trace_of({job_of(0, "Fresh", 4 * 128 * kMiB, 0.0, 1), job_of(1, "Fresh", 4 * 128 * kMiB, 10000.0, 2)});
  const BlockPlacement placement = place_workload(topo, trace, 1, 11);
  const FpSamples fps = sample_workload_fps(trace, profiles, 11);
  const JobCatalog catalog(topo, placement, trace, profiles, fps);
  ScenarioConfig warm;  // default profiles only; Fresh is unknown
  RunOptions options;
  options.registry = initial_registry(warm);
  const JobHash hash = job_hash("Fresh", "logs");
  o.require(!options.registry.contains(hash), "fresh profile already registered");

  Simulation sim(catalog, trace, SchedulerKind::joss_t, options);
  const MetricsReport report = sim.run();
  const JossScheduler& js = *sim.joss();
  o.require(report.jobs.at(0).completion < trace.jobs.at(1).arrival, "first job not done before the second");

  const auto& first = js.decisions().at(0);
  const auto& second = js.decisions().at(1);
  o.require(first.route == Route::fifo_bootstrap, "first job not bootstrapped through FIFO");
  std::size_t fifo_maps = 0, fifo_reduces = 0;
  for (const auto& e : first.enqueues) {
    o.require(e.queue.kind == QueueKind::fifo, "first job task outside the FIFO queues");
    (e.queue.slot == SlotKind::map ? fifo_maps : fifo_reduces) += e.tasks.size();
  }
  o.require(fifo_maps == 4 && fifo_reduces == 1, "first job tasks missing from MQ_FIFO/RQ_FIFO");
  o.require(second.route == Route::policy_b, fmt::format("second job routed {}", to_string(second.route)));
  for (const auto& e : second.enqueues) o.require(e.queue.kind != QueueKind::fifo, "second job in a FIFO queue");

  const auto& observed = fps.at(JobId{0});
  double sum = 0.0;
  for (double fp : observed) sum += fp;
  const double mean = sum / static_cast<double>(observed.size());
  const auto stored = js.registry().lookup(hash);
  o.require(stored && *stored == mean, "registry does not hold the first job's mean FP");
  if (o.pass) o.detail = fmt::format("FIFO bootstrap then policy B; registry FP {}", format_double(mean));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"threshold optimality", threshold_optimality},
      {"placement replay", fig3_replay},
      {"policy A reduce locality", policy_a_reduce_locality},
      {"policy B map locality", policy_b_map_locality},
      {"INT ordering", int_ordering},
      {"task conservation and load mean", task_conservation},
      {"large-job queue mechanics", large_job_queues},
      {"TTA/JTA differential", tta_jta_differential},
      {"determinism and INT oracle", determinism_and_oracle},
      {"FP bootstrap loop", fp_bootstrap},
  };
  std::optional<std::size_t> only;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > static_cast<int>(criteria.size())) {
      std::cerr << "criterion must be 1.." << criteria.size() << '\n';
      return 2;
    }
    only = static_cast<std::size_t>(n);
  }
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && *only != i + 1) continue;
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    failures += outcome.pass ? 0 : 1;
    std::cout << fmt::format("AC{:<2} {} {}: {}", i + 1, outcome.pass ? "PASS" : "FAIL", criteria[i].first,
                             outcome.detail)
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
