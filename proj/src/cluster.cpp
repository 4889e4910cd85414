#include "joss/cluster.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace joss {

const char* to_string(SlotKind kind) noexcept {
  return kind == SlotKind::map ? "map" : "reduce";
}

const char* to_string(Locality level) noexcept {
  switch (level) {
    case Locality::vps_local: return "vps_local";
    case Locality::cen_local: return "cen_local";
    case Locality::off_cen: return "off_cen";
  }
  return "?";
}

std::string to_string(const TaskId& task) {
  return fmt::format("J{}.{}{}", index_of(task.job), task.kind == SlotKind::map ? 'M' : 'R', task.index);
}

ClusterTopology ClusterTopology::build(const TopologySpec& spec) {
  if (spec.datacenters.size() < 2) {
    throw ConfigError("k must be >= 2 (got " + std::to_string(spec.datacenters.size()) + " datacenters)");
  }
  ClusterTopology topo;
  for (std::size_t c = 0; c < spec.datacenters.size(); ++c) {
    const auto& dc = spec.datacenters[c];
    if (dc.vps_count < 1) {
      throw ConfigError(fmt::format("datacenter {} must have at least one VPS", c + 1));
    }
    topo.first_vps_.push_back(static_cast<std::uint32_t>(topo.nodes_.size()));
    for (std::uint32_t l = 0; l < dc.vps_count; ++l) {
      topo.nodes_.push_back(VpsNode{DcId{static_cast<std::uint32_t>(c)}, l, dc.map_slots, dc.reduce_slots});
    }
  }
  return topo;
}

std::uint32_t ClusterTopology::vps_count(DcId dc) const {
  const auto c = index_of(dc);
  if (c >= first_vps_.size()) throw std::out_of_range("unknown datacenter");
  const std::uint32_t end = c + 1 < first_vps_.size() ? first_vps_[c + 1] : vps_count();
  return end - first_vps_[c];
}

const VpsNode& ClusterTopology::node(VpsId vps) const {
  return nodes_.at(index_of(vps));
}

VpsId ClusterTopology::vps_at(DcId dc, std::uint32_t local_index) const {
  if (local_index >= vps_count(dc)) throw std::out_of_range("VPS index outside datacenter");
  return VpsId{first_vps_[index_of(dc)] + local_index};
}

std::vector<VpsId> ClusterTopology::vps_in(DcId dc) const {
  std::vector<VpsId> out(vps_count(dc));
  for (std::uint32_t l = 0; l < out.size(); ++l) out[l] = VpsId{first_vps_[index_of(dc)] + l};
  return out;
}

std::string ClusterTopology::vps_name(VpsId vps) const {
  const auto& n = node(vps);
  return fmt::format("VPS({},{})", index_of(n.datacenter) + 1, n.local_index + 1);
}

BlockPlacement::BlockPlacement(std::uint32_t replication) : replication_(replication) {
  if (replication < 1) throw ConfigError("replication factor must be >= 1");
}

void BlockPlacement::set(JobId job, JobBlockReplicas replicas) {
  for (auto& block : replicas) std::sort(block.begin(), block.end());
  jobs_[job] = std::move(replicas);
}

std::uint32_t BlockPlacement::block_count(JobId job) const {
  return static_cast<std::uint32_t>(job_replicas(job).size());
}

const JobBlockReplicas& BlockPlacement::job_replicas(JobId job) const {
  auto it = jobs_.find(job);
  if (it == jobs_.end()) throw std::out_of_range(fmt::format("job {} has no block placement", index_of(job)));
  return it->second;
}

std::span<const VpsId> BlockPlacement::replicas(JobId job, std::uint32_t block) const {
  const auto& blocks = job_replicas(job);
  if (block >= blocks.size()) {
    throw std::out_of_range(fmt::format("job {} has no block {}", index_of(job), block));
  }
  return blocks[block];
}

JobBlockReplicas place_blocks(const ClusterTopology& topology, std::uint32_t block_count,
                              std::uint32_t replication, std::mt19937_64& rng) {
  if (replication < 1) throw std::invalid_argument("replication factor must be >= 1");
  const std::uint32_t n = topology.vps_count();
  const std::uint32_t copies = std::min(replication, n);

  std::vector<VpsId> pool(n);
  for (std::uint32_t i = 0; i < n; ++i) pool[i] = VpsId{i};

  JobBlockReplicas out(block_count);
  for (auto& block : out) {
    // Partial Fisher-Yates: the first `copies` slots become a uniform sample.
    for (std::uint32_t i = 0; i < copies; ++i) {
      std::uniform_int_distribution<std::uint32_t> pick(i, n - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    block.assign(pool.begin(), pool.begin() + copies);
    std::sort(block.begin(), block.end());
  }
  return out;
}

std::vector<std::vector<std::uint32_t>> unique_blocks_per_datacenter(const ClusterTopology& topology,
                                                                     const BlockPlacement& placement,
                                                                     JobId job) {
  std::vector<std::vector<std::uint32_t>> sets(topology.datacenter_count());
  const auto& blocks = placement.job_replicas(job);
  for (std::uint32_t i = 0; i < blocks.size(); ++i) {
    for (VpsId vps : blocks[i]) {
      auto& set = sets[index_of(topology.datacenter_of(vps))];
      if (set.empty() || set.back() != i) set.push_back(i);
    }
  }
  return sets;
}

Locality locality_level(const ClusterTopology& topology, const BlockPlacement& placement, VpsId vps,
                        JobId job, std::uint32_t block) {
  const DcId dc = topology.datacenter_of(vps);
  bool same_dc = false;
  for (VpsId holder : placement.replicas(job, block)) {
    if (holder == vps) return Locality::vps_local;
    same_dc = same_dc || topology.datacenter_of(holder) == dc;
  }
  return same_dc ? Locality::cen_local : Locality::off_cen;
}

}  // namespace joss
