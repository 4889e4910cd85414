#pragma once

#include <memory>
#include <vector>

#include "joss/catalog.hpp"
#include "joss/engine.hpp"
#include "joss/metrics.hpp"
#include "joss/scenario.hpp"

namespace joss {

// The shared inputs of one comparison: topology, trace, placement and FP
// samples are fixed once and handed to every scheduler unchanged.
class Experiment {
 public:
  Experiment(ClusterTopology topology, BlockPlacement placement, WorkloadTrace trace, ProfileTable profiles,
             FpSamples fps);

  // Generates (or loads) the trace and draws placement and FP samples from the
  // configured seeds.
  static std::unique_ptr<Experiment> from_scenario(const ScenarioConfig& config);

  Experiment(const Experiment&) = delete;
  Experiment& operator=(const Experiment&) = delete;

  const ClusterTopology& topology() const noexcept { return topology_; }
  const BlockPlacement& placement() const noexcept { return placement_; }
  const WorkloadTrace& trace() const noexcept { return trace_; }
  const ProfileTable& profiles() const noexcept { return profiles_; }
  const FpSamples& fps() const noexcept { return fps_; }
  const JobCatalog& catalog() const noexcept { return *catalog_; }

  MetricsReport run(SchedulerKind kind, RunOptions options) const;

  // One report per scheduler, in the order given. With `parallel` each
  // simulation gets its own thread.
  std::vector<MetricsReport> run_all(const std::vector<SchedulerKind>& kinds, const RunOptions& options,
                                     bool parallel = false) const;

 private:
  ClusterTopology topology_;
  BlockPlacement placement_;
  WorkloadTrace trace_;
  ProfileTable profiles_;
  FpSamples fps_;
  std::unique_ptr<JobCatalog> catalog_;
};

// Trace as configured: loaded from the trace path or generated.
WorkloadTrace scenario_trace(const ScenarioConfig& config);

}  // namespace joss
