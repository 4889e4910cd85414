#include "joss/catalog.hpp"

#include <fmt/format.h>

namespace joss {

JobCatalog::JobCatalog(const ClusterTopology& topology, const BlockPlacement& placement,
                       const WorkloadTrace& trace, const ProfileTable& profiles, const FpSamples& fps)
    : topology_(&topology), placement_(&placement), threshold_(topology.datacenter_count()) {
  const auto avg = topology.average_vps();
  for (const auto& spec : trace.jobs) {
    JobInfo info;
    info.spec = spec;
    info.profile = &profiles.at(spec.profile);
    for (const auto& task : expand_tasks(spec, trace.block_size).maps) info.block_sizes.push_back(task.input_bytes);
    if (placement.block_count(spec.id) != info.map_count()) {
      throw ConfigError(fmt::format("job {}: placement has {} blocks, expected {}", index_of(spec.id),
                                    placement.block_count(spec.id), info.map_count()));
    }
    auto fp_it = fps.find(spec.id);
    if (fp_it == fps.end() || fp_it->second.size() != info.map_count()) {
      throw ConfigError(fmt::format("job {}: missing FP samples", index_of(spec.id)));
    }
    info.fps = fp_it->second;
    info.hash = job_hash(info.profile->name, info.profile->input_type);
    info.nominal_class = classify_job(info.profile->fp_mean, threshold_, info.map_count(), avg);
    if (!jobs_.emplace(spec.id, std::move(info)).second) {
      throw ConfigError(fmt::format("duplicate job id {}", index_of(spec.id)));
    }
  }
}

const JobInfo& JobCatalog::job(JobId id) const {
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw std::out_of_range(fmt::format("unknown job {}", index_of(id)));
  return it->second;
}

}  // namespace joss
