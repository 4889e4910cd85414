#include "joss/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace joss {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string item(const std::string& path, std::size_t i) {
  return fmt::format("{}[{}]", path, i);
}

void expect_map(const YAML::Node& node, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) fail(path.empty() ? "<root>" : path, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) fail(child(path, key), "unknown field");
  }
}

std::string scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "expected a scalar");
  return node.Scalar();
}

double number(const YAML::Node& node, const std::string& path) {
  const std::string text = scalar(node, path);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(value)) {
    fail(path, "expected a number, got '" + text + "'");
  }
  return value;
}

std::uint64_t unsigned_int(const YAML::Node& node, const std::string& path) {
  const std::string text = scalar(node, path);
  std::uint64_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    fail(path, "expected a non-negative integer, got '" + text + "'");
  }
  return value;
}

std::uint32_t positive_u32(const YAML::Node& node, const std::string& path) {
  const auto v = unsigned_int(node, path);
  if (v == 0 || v > 0xffffffffULL) fail(path, "expected a positive integer");
  return static_cast<std::uint32_t>(v);
}

Bytes size(const YAML::Node& node, const std::string& path) {
  try {
    return parse_size(scalar(node, path));
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
}

double rate(const YAML::Node& node, const std::string& path) {
  const Bytes b = size(node, path);
  if (b == 0) fail(path, "rate must be > 0");
  return static_cast<double>(b);
}

TopologySpec parse_topology(const YAML::Node& node, const std::string& path) {
  expect_map(node, path, {"datacenters", "map_slots", "reduce_slots"});
  std::uint32_t map_slots = 1, reduce_slots = 1;
  if (node["map_slots"]) map_slots = positive_u32(node["map_slots"], child(path, "map_slots"));
  if (node["reduce_slots"]) reduce_slots = positive_u32(node["reduce_slots"], child(path, "reduce_slots"));
  const auto dcs = node["datacenters"];
  const std::string dc_path = child(path, "datacenters");
  if (!dcs || !dcs.IsSequence()) fail(dc_path, "expected a list of datacenters");
  TopologySpec spec;
  for (std::size_t i = 0; i < dcs.size(); ++i) {
    const std::string p = item(dc_path, i);
    DatacenterSpec dc;
    dc.map_slots = map_slots;
    dc.reduce_slots = reduce_slots;
    if (dcs[i].IsScalar()) {
      dc.vps_count = positive_u32(dcs[i], p);
    } else {
      expect_map(dcs[i], p, {"vps", "map_slots", "reduce_slots"});
      if (!dcs[i]["vps"]) fail(child(p, "vps"), "required");
      dc.vps_count = positive_u32(dcs[i]["vps"], child(p, "vps"));
      if (dcs[i]["map_slots"]) dc.map_slots = positive_u32(dcs[i]["map_slots"], child(p, "map_slots"));
      if (dcs[i]["reduce_slots"]) dc.reduce_slots = positive_u32(dcs[i]["reduce_slots"], child(p, "reduce_slots"));
    }
    spec.datacenters.push_back(dc);
  }
  if (spec.datacenters.size() < 2) fail(dc_path, "need at least 2 datacenters");
  return spec;
}

CostModel parse_cost(const YAML::Node& node, const std::string& path) {
  expect_map(node, path, {"intra_vps_read_rate", "intra_dc_bandwidth", "inter_dc_bandwidth"});
  CostModel c;
  if (node["intra_vps_read_rate"]) c.intra_vps_read_rate = rate(node["intra_vps_read_rate"], child(path, "intra_vps_read_rate"));
  if (node["intra_dc_bandwidth"]) c.intra_dc_bandwidth = rate(node["intra_dc_bandwidth"], child(path, "intra_dc_bandwidth"));
  if (node["inter_dc_bandwidth"]) c.inter_dc_bandwidth = rate(node["inter_dc_bandwidth"], child(path, "inter_dc_bandwidth"));
  return c;
}

void parse_profiles(const YAML::Node& node, const std::string& path, ProfileTable& table) {
  if (!node.IsSequence()) fail(path, "expected a list of profiles");
  for (std::size_t i = 0; i < node.size(); ++i) {
    const std::string p = item(path, i);
    const auto& n = node[i];
    expect_map(n, p, {"name", "input_type", "fp_mean", "fp_std", "map_rate", "reduce_rate"});
    if (!n["name"]) fail(child(p, "name"), "required");
    BenchmarkProfile prof;
    prof.name = scalar(n["name"], child(p, "name"));
    if (table.contains(prof.name)) prof = table.at(prof.name);
    if (n["input_type"]) prof.input_type = scalar(n["input_type"], child(p, "input_type"));
    if (n["fp_mean"]) prof.fp_mean = number(n["fp_mean"], child(p, "fp_mean"));
    if (n["fp_std"]) prof.fp_std = number(n["fp_std"], child(p, "fp_std"));
    if (n["map_rate"]) prof.map_compute_rate = rate(n["map_rate"], child(p, "map_rate"));
    if (n["reduce_rate"]) prof.reduce_compute_rate = rate(n["reduce_rate"], child(p, "reduce_rate"));
    try {
      table.add(prof);
    } catch (const ConfigError& e) {
      fail(p, e.what());
    }
  }
}

ArrivalModel parse_arrivals(const YAML::Node& node, const std::string& path) {
  expect_map(node, path, {"distribution", "mean", "stddev", "intervals"});
  ArrivalModel a;
  if (!node["distribution"]) fail(child(path, "distribution"), "required");
  const std::string dist = scalar(node["distribution"], child(path, "distribution"));
  if (dist == "exponential") {
    a.kind = ArrivalModel::Kind::exponential;
  } else if (dist == "lognormal") {
    a.kind = ArrivalModel::Kind::lognormal;
  } else if (dist == "explicit") {
    a.kind = ArrivalModel::Kind::explicit_list;
  } else {
    fail(child(path, "distribution"), "expected exponential, lognormal or explicit, got '" + dist + "'");
  }
  if (a.kind == ArrivalModel::Kind::explicit_list) {
    const auto list = node["intervals"];
    if (!list || !list.IsSequence()) fail(child(path, "intervals"), "expected a list of seconds");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const double v = number(list[i], item(child(path, "intervals"), i));
      if (v < 0.0) fail(item(child(path, "intervals"), i), "interval must be >= 0");
      a.intervals.push_back(v);
    }
    return a;
  }
  if (!node["mean"]) fail(child(path, "mean"), "required");
  a.mean = number(node["mean"], child(path, "mean"));
  if (!(a.mean > 0.0)) fail(child(path, "mean"), "must be > 0");
  if (a.kind == ArrivalModel::Kind::lognormal) {
    if (!node["stddev"]) fail(child(path, "stddev"), "required for lognormal arrivals");
    a.stddev = number(node["stddev"], child(path, "stddev"));
    if (!(a.stddev > 0.0)) fail(child(path, "stddev"), "must be > 0");
  }
  return a;
}

void parse_workload(const YAML::Node& node, const std::string& path, ScenarioConfig& config) {
  expect_map(node, path, {"trace", "jobs", "arrivals", "reduce_tasks", "input_jitter"});
  if (node["trace"]) {
    config.trace_path = scalar(node["trace"], child(path, "trace"));
    return;
  }
  const auto jobs = node["jobs"];
  const std::string jobs_path = child(path, "jobs");
  if (!jobs || !jobs.IsSequence() || jobs.size() == 0) fail(jobs_path, "expected a non-empty list (or a trace path)");
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string p = item(jobs_path, i);
    expect_map(jobs[i], p, {"profile", "count", "input"});
    for (const char* key : {"profile", "count", "input"}) {
      if (!jobs[i][key]) fail(child(p, key), "required");
    }
    JobMix mix;
    mix.profile = scalar(jobs[i]["profile"], child(p, "profile"));
    if (!config.profiles.contains(mix.profile)) fail(child(p, "profile"), "unknown profile '" + mix.profile + "'");
    mix.count = positive_u32(jobs[i]["count"], child(p, "count"));
    mix.input_bytes = size(jobs[i]["input"], child(p, "input"));
    if (mix.input_bytes == 0) fail(child(p, "input"), "must be > 0");
    config.workload.mix.push_back(mix);
  }
  if (!node["arrivals"]) fail(child(path, "arrivals"), "required");
  config.workload.arrivals = parse_arrivals(node["arrivals"], child(path, "arrivals"));
  if (node["reduce_tasks"]) config.workload.reduce_tasks = positive_u32(node["reduce_tasks"], child(path, "reduce_tasks"));
  if (node["input_jitter"]) {
    const double j = number(node["input_jitter"], child(path, "input_jitter"));
    if (j < 0.0 || j >= 1.0) fail(child(path, "input_jitter"), "must be in [0, 1)");
    config.workload.input_jitter = j;
  }
}

CapacityConfig parse_capacity(const YAML::Node& node, const std::string& path) {
  expect_map(node, path, {"rule", "queues"});
  CapacityConfig c;
  c.queues.clear();
  if (node["rule"]) {
    const std::string rule = scalar(node["rule"], child(path, "rule"));
    if (rule == "round_robin") {
      c.rule = CapacityConfig::Rule::round_robin;
    } else if (rule == "by_profile") {
      c.rule = CapacityConfig::Rule::by_profile;
    } else {
      fail(child(path, "rule"), "expected round_robin or by_profile, got '" + rule + "'");
    }
  }
  const auto queues = node["queues"];
  const std::string qp = child(path, "queues");
  if (!queues || !queues.IsSequence()) fail(qp, "expected a list of queues");
  for (std::size_t i = 0; i < queues.size(); ++i) {
    const std::string p = item(qp, i);
    expect_map(queues[i], p, {"name", "fraction", "profiles"});
    CapacityQueueSpec q;
    q.name = queues[i]["name"] ? scalar(queues[i]["name"], child(p, "name")) : fmt::format("q{}", i);
    if (!queues[i]["fraction"]) fail(child(p, "fraction"), "required");
    q.fraction = number(queues[i]["fraction"], child(p, "fraction"));
    if (const auto profiles = queues[i]["profiles"]) {
      if (!profiles.IsSequence()) fail(child(p, "profiles"), "expected a list");
      for (std::size_t j = 0; j < profiles.size(); ++j) {
        q.profiles.push_back(scalar(profiles[j], item(child(p, "profiles"), j)));
      }
    }
    c.queues.push_back(std::move(q));
  }
  c.validate();
  return c;
}

}  // namespace

Bytes parse_size(std::string_view text) {
  const auto first = text.find_first_not_of(" \t");
  if (first == std::string_view::npos) throw ConfigError("empty size");
  text.remove_prefix(first);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || !std::isfinite(value) || value < 0.0) {
    throw ConfigError("invalid size '" + std::string(text) + "'");
  }
  std::string_view unit(end, static_cast<std::size_t>(text.data() + text.size() - end));
  while (!unit.empty() && (unit.front() == ' ' || unit.front() == '\t')) unit.remove_prefix(1);
  while (!unit.empty() && (unit.back() == ' ' || unit.back() == '\t')) unit.remove_suffix(1);
  if (unit.ends_with("/s")) unit.remove_suffix(2);
  double scale = 1.0;
  if (unit.empty() || unit == "B") {
    scale = 1.0;
  } else if (unit == "KiB") {
    scale = 1024.0;
  } else if (unit == "MiB") {
    scale = static_cast<double>(kMiB);
  } else if (unit == "GiB") {
    scale = static_cast<double>(kGiB);
  } else {
    throw ConfigError("unknown size unit '" + std::string(unit) + "' (use B, KiB, MiB or GiB)");
  }
  const double bytes = value * scale;
  if (bytes != std::floor(bytes) || bytes > 1.8e19) {
    throw ConfigError("size '" + std::string(text) + "' is not a whole number of bytes");
  }
  return static_cast<Bytes>(bytes);
}

ScenarioConfig parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  expect_map(root, "", {"name", "topology", "block_size", "replication", "cost", "profiles", "workload", "registry",
                        "schedulers", "capacity", "seeds"});
  ScenarioConfig c;
  c.base_dir = base_dir;
  try {
    c.name = root["name"] ? scalar(root["name"], "name") : "scenario";
    if (!root["topology"]) fail("topology", "required");
    c.topology = parse_topology(root["topology"], "topology");
    if (root["block_size"]) {
      c.workload.block_size = size(root["block_size"], "block_size");
      if (c.workload.block_size == 0) fail("block_size", "must be > 0");
    }
    if (root["replication"]) c.replication = positive_u32(root["replication"], "replication");
    if (root["cost"]) c.cost = parse_cost(root["cost"], "cost");
    if (root["profiles"]) parse_profiles(root["profiles"], "profiles", c.profiles);
    if (!root["workload"]) fail("workload", "required");
    parse_workload(root["workload"], "workload", c);

    if (const auto reg = root["registry"]) {
      if (reg.IsScalar()) {
        const std::string mode = reg.Scalar();
        if (mode == "warm") {
          c.registry = RegistryMode::warm;
        } else if (mode == "cold") {
          c.registry = RegistryMode::cold;
        } else {
          fail("registry", "expected warm, cold or {file: path}, got '" + mode + "'");
        }
      } else {
        expect_map(reg, "registry", {"file"});
        if (!reg["file"]) fail("registry.file", "required");
        c.registry = RegistryMode::file;
        c.registry_path = scalar(reg["file"], "registry.file");
      }
    }

    if (const auto s = root["schedulers"]) {
      if (!s.IsSequence() || s.size() == 0) fail("schedulers", "expected a non-empty list");
      c.schedulers.clear();
      for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string p = item("schedulers", i);
        try {
          c.schedulers.push_back(scheduler_kind_from_string(scalar(s[i], p)));
        } catch (const ConfigError& e) {
          if (std::string_view(e.what()).starts_with(p)) throw;
          fail(p, e.what());
        }
      }
    }
    if (root["capacity"]) {
      try {
        c.capacity = parse_capacity(root["capacity"], "capacity");
      } catch (const ConfigError& e) {
        if (std::string_view(e.what()).starts_with("capacity")) throw;
        fail("capacity", e.what());
      }
    }

    if (!root["seeds"]) fail("seeds", "required (placement and workload)");
    const auto seeds = root["seeds"];
    expect_map(seeds, "seeds", {"placement", "workload", "fp", "engine"});
    for (const char* key : {"placement", "workload"}) {
      if (!seeds[key]) fail(child("seeds", key), "required");
    }
    c.seeds.placement = unsigned_int(seeds["placement"], "seeds.placement");
    c.seeds.workload = unsigned_int(seeds["workload"], "seeds.workload");
    c.seeds.fp = seeds["fp"] ? unsigned_int(seeds["fp"], "seeds.fp") : c.seeds.workload;
    c.seeds.engine = seeds["engine"] ? unsigned_int(seeds["engine"], "seeds.engine") : c.seeds.placement;
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  c.cost.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_scenario(text.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<SchedulerKind> parse_scheduler_list(std::string_view text) {
  std::vector<SchedulerKind> out;
  if (text == "all") return all_scheduler_kinds();
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto token = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    if (token.empty()) throw ConfigError("empty scheduler name in '" + std::string(text) + "'");
    out.push_back(scheduler_kind_from_string(token));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

FpRegistry initial_registry(const ScenarioConfig& config) {
  switch (config.registry) {
    case RegistryMode::cold: return {};
    case RegistryMode::warm: {
      FpRegistry reg;
      for (const auto& [name, prof] : config.profiles.all()) {
        reg.record_mean(job_hash(prof.name, prof.input_type), prof.fp_mean);
      }
      return reg;
    }
    case RegistryMode::file: {
      const auto path = config.registry_path.is_absolute() ? config.registry_path : config.base_dir / config.registry_path;
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot open registry " + path.string());
      return FpRegistry::load(in, path.string());
    }
  }
  return {};
}

RunOptions run_options(const ScenarioConfig& config) {
  RunOptions o;
  o.cost = config.cost;
  o.capacity = config.capacity;
  o.registry = initial_registry(config);
  o.seed = config.seeds.engine;
  o.workload_name = config.name;
  return o;
}

}  // namespace joss
