#include "joss/experiment.hpp"

#include <exception>
#include <thread>

namespace joss {

Experiment::Experiment(ClusterTopology topology, BlockPlacement placement, WorkloadTrace trace,
                       ProfileTable profiles, FpSamples fps)
    : topology_(std::move(topology)),
      placement_(std::move(placement)),
      trace_(std::move(trace)),
      profiles_(std::move(profiles)),
      fps_(std::move(fps)) {
  catalog_ = std::make_unique<JobCatalog>(topology_, placement_, trace_, profiles_, fps_);
}

WorkloadTrace scenario_trace(const ScenarioConfig& config) {
  if (config.trace_path) {
    const auto path = config.trace_path->is_absolute() ? *config.trace_path : config.base_dir / *config.trace_path;
    return load_trace(path);
  }
  return generate_trace(config.workload, config.profiles, config.seeds.workload);
}

std::unique_ptr<Experiment> Experiment::from_scenario(const ScenarioConfig& config) {
  auto topology = ClusterTopology::build(config.topology);
  WorkloadTrace trace = scenario_trace(config);
  auto placement = place_workload(topology, trace, config.replication, config.seeds.placement);
  auto fps = sample_workload_fps(trace, config.profiles, config.seeds.fp);
  return std::make_unique<Experiment>(std::move(topology), std::move(placement), std::move(trace), config.profiles,
                                      std::move(fps));
}

MetricsReport Experiment::run(SchedulerKind kind, RunOptions options) const {
  return simulate(*catalog_, trace_, kind, std::move(options));
}

std::vector<MetricsReport> Experiment::run_all(const std::vector<SchedulerKind>& kinds, const RunOptions& options,
                                               bool parallel) const {
  std::vector<MetricsReport> reports(kinds.size());
  if (!parallel || kinds.size() < 2) {
    for (std::size_t i = 0; i < kinds.size(); ++i) reports[i] = run(kinds[i], options);
    return reports;
  }
  std::vector<std::exception_ptr> errors(kinds.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          RunOptions own = options;
          own.event_log = nullptr;
          reports[i] = run(kinds[i], std::move(own));
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

}  // namespace joss
