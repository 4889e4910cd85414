#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "support.hpp"

using namespace joss;
using namespace joss::testing;

namespace {

const std::string kMinimal = R"(
topology: {datacenters: [2, 3]}
workload:
  jobs: [{profile: WC, count: 4, input: 1GiB}]
  arrivals: {distribution: exponential, mean: 10}
seeds: {placement: 3, workload: 4}
)";

std::string error_of(const std::string& yaml) {
  try {
    parse_scenario(yaml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "no error";
}

}  // namespace

TEST_CASE("size strings") {
  CHECK(parse_size("128MiB") == 128 * kMiB);
  CHECK(parse_size("1GiB") == kGiB);
  CHECK(parse_size("0.5GiB") == 512 * kMiB);
  CHECK(parse_size("512KiB") == 512 * 1024);
  CHECK(parse_size("4096") == 4096);
  CHECK(parse_size("7B") == 7);
  CHECK(parse_size("16MiB/s") == 16 * kMiB);
  CHECK(parse_size(" 2 GiB") == 2 * kGiB);
  CHECK_THROWS_AS(parse_size("1.5B"), ConfigError);
  CHECK_THROWS_AS(parse_size("1GB"), ConfigError);
  CHECK_THROWS_AS(parse_size("-1MiB"), ConfigError);
  CHECK_THROWS_AS(parse_size(""), ConfigError);
  CHECK_THROWS_AS(parse_size("lots"), ConfigError);
}

TEST_CASE("minimal scenario takes the defaults") {
  const auto c = parse_scenario(kMinimal);
  CHECK(c.name == "scenario");
  CHECK(c.topology.datacenters.size() == 2);
  CHECK(c.topology.datacenters[1].vps_count == 3);
  CHECK(c.replication == 1);
  CHECK(c.workload.block_size == 128 * kMiB);
  CHECK(c.registry == RegistryMode::warm);
  CHECK(c.schedulers == all_scheduler_kinds());
  CHECK(c.seeds.fp == 4);
  CHECK(c.seeds.engine == 3);
  CHECK(c.profiles.at("Permu").fp_mean == 3.0);
}

TEST_CASE("presets load with their job mixes") {
  const auto small = load_scenario(scenario_dir() / "small.scenario");
  const auto mixed = load_scenario(scenario_dir() / "mixed.scenario");
  auto total = [](const ScenarioConfig& c) {
    std::uint32_t n = 0;
    for (const auto& m : c.workload.mix) n += m.count;
    return n;
  };
  CHECK(total(small) == 300);
  CHECK(total(mixed) == 100);
  CHECK(small.workload.arrivals.kind == ArrivalModel::Kind::lognormal);
  CHECK(mixed.workload.arrivals.kind == ArrivalModel::Kind::exponential);
  CHECK(small.topology.datacenters.size() == 2);
  CHECK(small.topology.datacenters[0].vps_count == 15);
  CHECK(mixed.cost.inter_dc_bandwidth == 16.0 * kMiB);
}

TEST_CASE("errors name the offending field") {
  const std::string topo = "topology: {datacenters: [2, 3]}\nseeds: {placement: 1, workload: 1}\n";
  const std::string arrivals = "  arrivals: {distribution: exponential, mean: 10}\n";
  CHECK(error_of(topo + "workload:\n  jobs:\n    - {profile: WC, count: 1, input: 1GiB}\n"
                        "    - {profile: WC, count: 1, input: 1GiB}\n    - {profile: WC, count: -2, input: 1GiB}\n" +
                 arrivals)
            .starts_with("workload.jobs[2].count:"));
  CHECK(error_of(topo + "workload:\n  jobs: [{profile: Sort, count: 1, input: 1GiB}]\n" + arrivals)
            .starts_with("workload.jobs[0].profile:"));
  CHECK(error_of(topo + "workload:\n  jobs: [{profile: WC, count: 1, input: 1GB}]\n" + arrivals)
            .starts_with("workload.jobs[0].input:"));
  CHECK(error_of(topo + "workload:\n  jobs: [{profile: WC, count: 1, input: 1GiB}]\n"
                        "  arrivals: {distribution: lognormal, mean: 10}\n")
            .starts_with("workload.arrivals.stddev:"));
  CHECK(error_of(kMinimal + "colour: blue\n").starts_with("colour: unknown field"));
  CHECK(error_of(kMinimal + "schedulers: [fifo, lottery]\n").starts_with("schedulers[1]:"));
  CHECK(error_of(kMinimal + "cost: {inter_dc_bandwidth: 0MiB}\n").starts_with("cost.inter_dc_bandwidth:"));
  CHECK(error_of(kMinimal + "capacity: {queues: [{name: a, fraction: 0.3}]}\n").starts_with("capacity"));
  CHECK(error_of("topology: {datacenters: [4]}\n").starts_with("topology.datacenters:"));
  CHECK(error_of("topology: {datacenters: [2, 2]}\nworkload: {trace: x.trace}\n").starts_with("seeds:"));
  CHECK(error_of("topology: [").find("scenario") != std::string::npos);
}

TEST_CASE("datacenters may carry their own slot counts") {
  const auto c = parse_scenario(R"(
topology:
  datacenters: [{vps: 2, map_slots: 3}, 4]
  reduce_slots: 2
workload: {trace: jobs.trace}
seeds: {placement: 1, workload: 1, engine: 9}
)",
                                "/data");
  CHECK(c.topology.datacenters[0].map_slots == 3);
  CHECK(c.topology.datacenters[0].reduce_slots == 2);
  CHECK(c.topology.datacenters[1].map_slots == 1);
  CHECK(c.trace_path == std::filesystem::path("jobs.trace"));
  CHECK(c.base_dir == "/data");
  CHECK(c.seeds.engine == 9);
}

TEST_CASE("profiles can be overridden and added") {
  const auto c = parse_scenario(kMinimal + R"(
profiles:
  - {name: WC, fp_mean: 0.9}
  - {name: Fresh, input_type: logs, fp_mean: 0.7, fp_std: 0.05, map_rate: 32MiB/s}
)");
  CHECK(c.profiles.at("WC").fp_mean == 0.9);
  CHECK(c.profiles.at("WC").input_type == ProfileTable::defaults().at("WC").input_type);
  CHECK(c.profiles.at("Fresh").map_compute_rate == 32.0 * kMiB);
  CHECK(error_of(kMinimal + "profiles: [{name: New}]\n").starts_with("profiles[0]"));
}

TEST_CASE("scheduler lists") {
  CHECK(parse_scheduler_list("all") == all_scheduler_kinds());
  CHECK(parse_scheduler_list("joss-t,fifo") == std::vector{SchedulerKind::joss_t, SchedulerKind::fifo});
  CHECK_THROWS_AS(parse_scheduler_list("fifo,,fair"), ConfigError);
  CHECK_THROWS_AS(parse_scheduler_list("fifo,lottery"), ConfigError);
}

TEST_CASE("registry modes") {
  auto c = parse_scenario(kMinimal);
  const auto warm = initial_registry(c);
  CHECK(warm.size() == 5);
  CHECK(warm.lookup(job_hash("Grep", c.profiles.at("Grep").input_type)) == 0.10);

  c = parse_scenario(kMinimal + "registry: cold\n");
  CHECK(initial_registry(c).size() == 0);

  const auto dir = std::filesystem::temp_directory_path() / "joss-scenario-test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "learned.reg");
    FpRegistry r;
    r.record_mean(42, 1.25);
    r.save(out);
  }
  c = parse_scenario(kMinimal + "registry: {file: learned.reg}\n", dir);
  CHECK(initial_registry(c).lookup(42) == 1.25);
  CHECK(run_options(c).registry.size() == 1);
  c.registry_path = "missing.reg";
  CHECK_THROWS_AS(initial_registry(c), ConfigError);
  std::filesystem::remove_all(dir);
  CHECK(error_of(kMinimal + "registry: lukewarm\n").starts_with("registry:"));
}

TEST_CASE("load_scenario prefixes the file path") {
  try {
    load_scenario("/nonexistent/x.scenario");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/x.scenario") != std::string::npos);
  }
}

TEST_CASE("scenario traces are generated from the workload seed") {
  auto c = parse_scenario(kMinimal);
  const auto a = scenario_trace(c);
  CHECK(a.jobs.size() == 4);
  c.seeds.placement = 99;
  CHECK(scenario_trace(c) == a);
  c.seeds.workload = 5;
  CHECK_FALSE(scenario_trace(c) == a);
}
