#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "joss/types.hpp"

namespace joss {

struct DatacenterSpec {
  std::uint32_t vps_count = 0;
  std::uint32_t map_slots = 1;
  std::uint32_t reduce_slots = 1;
};

struct TopologySpec {
  std::vector<DatacenterSpec> datacenters;
};

struct VpsNode {
  DcId datacenter{};
  std::uint32_t local_index = 0;
  std::uint32_t map_slots = 1;
  std::uint32_t reduce_slots = 1;
};

using VpsAverage = boost::rational<std::uint64_t>;

// k datacenters with N_VPS,c nodes each. VPS ids are enumerated datacenter by
// datacenter, so the nodes of one datacenter form a contiguous id range.
class ClusterTopology {
 public:
  // Throws ConfigError if fewer than two datacenters or an empty datacenter.
  static ClusterTopology build(const TopologySpec& spec);

  std::uint32_t datacenter_count() const noexcept { return static_cast<std::uint32_t>(first_vps_.size()); }
  std::uint32_t vps_count() const noexcept { return static_cast<std::uint32_t>(nodes_.size()); }
  std::uint32_t vps_count(DcId dc) const;

  // N_avg_VPS, exact.
  VpsAverage average_vps() const noexcept { return {vps_count(), datacenter_count()}; }

  const VpsNode& node(VpsId vps) const;
  DcId datacenter_of(VpsId vps) const { return node(vps).datacenter; }
  VpsId vps_at(DcId dc, std::uint32_t local_index) const;
  std::vector<VpsId> vps_in(DcId dc) const;

  // "VPS(c,l)" with 1-based c and l.
  std::string vps_name(VpsId vps) const;

 private:
  std::vector<VpsNode> nodes_;
  std::vector<std::uint32_t> first_vps_;
};

// Replica locations of one job's blocks: replicas[i] is the ascending list of
// VPSs holding block i.
using JobBlockReplicas = std::vector<std::vector<VpsId>>;

class BlockPlacement {
 public:
  explicit BlockPlacement(std::uint32_t replication = 1);

  std::uint32_t replication() const noexcept { return replication_; }

  void set(JobId job, JobBlockReplicas replicas);
  bool contains(JobId job) const { return jobs_.contains(job); }
  std::uint32_t block_count(JobId job) const;

  // Throws std::out_of_range for an unknown job or block.
  std::span<const VpsId> replicas(JobId job, std::uint32_t block) const;
  const JobBlockReplicas& job_replicas(JobId job) const;

  bool operator==(const BlockPlacement&) const = default;

 private:
  std::uint32_t replication_;
  std::map<JobId, JobBlockReplicas> jobs_;
};

// Each block's min(replication, |VPS|) replicas are drawn uniformly without
// replacement over all VPSs. Storage capacity is not modeled.
JobBlockReplicas place_blocks(const ClusterTopology& topology, std::uint32_t block_count,
                              std::uint32_t replication, std::mt19937_64& rng);

// L_1..L_k: ascending block indices with at least one replica in each
// datacenter. Sets may overlap when replicas span datacenters.
std::vector<std::vector<std::uint32_t>> unique_blocks_per_datacenter(const ClusterTopology& topology,
                                                                     const BlockPlacement& placement,
                                                                     JobId job);

Locality locality_level(const ClusterTopology& topology, const BlockPlacement& placement, VpsId vps,
                        JobId job, std::uint32_t block);

}  // namespace joss
