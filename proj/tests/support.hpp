#pragma once

// Builders shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "joss/experiment.hpp"

namespace joss::testing {

inline ClusterTopology topology_of(std::initializer_list<std::uint32_t> vps_per_dc, std::uint32_t map_slots = 1,
                                   std::uint32_t reduce_slots = 1) {
  TopologySpec spec;
  for (auto n : vps_per_dc) spec.datacenters.push_back({n, map_slots, reduce_slots});
  return ClusterTopology::build(spec);
}

inline JobSpec job_of(std::uint32_t id, std::string profile, Bytes input, Seconds arrival, std::uint32_t order,
                      std::uint32_t reduces = 1) {
  return JobSpec{JobId{id}, std::move(profile), input, reduces, arrival, order};
}

inline WorkloadTrace trace_of(std::vector<JobSpec> jobs, Bytes block_size = 128 * kMiB) {
  WorkloadTrace t;
  t.block_size = block_size;
  t.jobs = std::move(jobs);
  return t;
}

// Every task of every job gets the profile's mean FP.
inline FpSamples mean_fps(const WorkloadTrace& trace, const ProfileTable& profiles) {
  FpSamples out;
  for (const auto& j : trace.jobs) {
    out[j.id].assign(block_count(j.input_bytes, trace.block_size), profiles.at(j.profile).fp_mean);
  }
  return out;
}

// Hand-placed world: replicas[j] lists the single replica of each block of
// trace job j. FPs are the profile means.
inline std::unique_ptr<Experiment> world_of(ClusterTopology topo, WorkloadTrace trace,
                                            const std::vector<std::vector<std::uint32_t>>& replicas,
                                            ProfileTable profiles = ProfileTable::defaults()) {
  BlockPlacement placement(1);
  for (std::size_t j = 0; j < trace.jobs.size(); ++j) {
    JobBlockReplicas r;
    for (auto v : replicas.at(j)) r.push_back({VpsId{v}});
    placement.set(trace.jobs[j].id, std::move(r));
  }
  auto fps = mean_fps(trace, profiles);
  return std::make_unique<Experiment>(std::move(topo), std::move(placement), std::move(trace),
                                      std::move(profiles), std::move(fps));
}

// Every profile's hash mapped to its mean FP.
inline FpRegistry warm_registry(const ProfileTable& profiles = ProfileTable::defaults()) {
  FpRegistry r;
  for (const auto& [name, p] : profiles.all()) r.record_mean(job_hash(name, p.input_type), p.fp_mean);
  return r;
}

inline std::vector<std::string> names_of(const std::vector<TaskId>& tasks) {
  std::vector<std::string> out;
  for (const auto& t : tasks) out.push_back(to_string(t));
  return out;
}

inline std::filesystem::path scenario_dir() { return JOSS_SCENARIO_DIR; }

inline ScenarioConfig preset(const std::string& name, std::uint64_t seed) {
  ScenarioConfig c = load_scenario(scenario_dir() / (name + ".scenario"));
  c.seeds = ScenarioSeeds{seed, seed, seed, seed};
  return c;
}

inline JobFilter class_is(JobClass c) {
  return [c](const JobRecord& j) { return j.job_class == c; };
}

// Inter-datacenter bytes rebuilt from the assignments in `report`, the block
// placement and the FP samples alone: each remote-datacenter block read adds
// the block, each cross-datacenter (mapper, reducer) pair adds that
// reducer's share of the mapper's output.
inline Bytes oracle_int(const MetricsReport& report, const Experiment& ex) {
  const auto& topo = ex.topology();
  const Bytes block = ex.trace().block_size;
  std::map<JobId, Bytes> input;
  std::map<JobId, std::uint32_t> reducers;
  for (const auto& j : ex.trace().jobs) {
    input[j.id] = j.input_bytes;
    reducers[j.id] = j.reduce_tasks;
  }
  auto block_bytes = [&](JobId job, std::uint32_t i) {
    const Bytes start = Bytes{i} * block;
    return std::min(block, input.at(job) - start);
  };
  std::map<JobId, std::vector<std::pair<DcId, Bytes>>> outputs;
  Bytes total = 0;
  for (const auto& m : report.maps) {
    const JobId job = m.task.job;
    const DcId here = topo.datacenter_of(m.vps);
    bool in_dc = false;
    for (VpsId r : ex.placement().replicas(job, m.task.index)) in_dc = in_dc || topo.datacenter_of(r) == here;
    const Bytes b = block_bytes(job, m.task.index);
    if (!in_dc) total += b;
    const double fp = ex.fps().at(job).at(m.task.index);
    outputs[job].emplace_back(here, static_cast<Bytes>(std::llround(static_cast<double>(b) * fp)));
  }
  for (const auto& r : report.reduces) {
    const JobId job = r.task.job;
    const std::uint32_t n = reducers.at(job);
    const DcId there = topo.datacenter_of(r.vps);
    for (const auto& [dc, out] : outputs[job]) {
      if (dc == there) continue;
      total += out / n + (r.task.index < out % n ? 1 : 0);
    }
  }
  return total;
}

}  // namespace joss::testing
