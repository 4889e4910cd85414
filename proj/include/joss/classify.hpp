#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string_view>

#include "joss/cluster.hpp"
#include "joss/types.hpp"

namespace joss {

using JobHash = std::uint64_t;

// Digest of (job code, input-data type). Both must be non-empty.
JobHash job_hash(std::string_view code_id, std::string_view input_type);

// td = k / (k - 1), kept as the exact ratio.
class Threshold {
 public:
  explicit Threshold(std::uint32_t datacenters);

  std::uint32_t datacenters() const noexcept { return k_; }
  double value() const noexcept { return static_cast<double>(k_) / static_cast<double>(k_ - 1); }

  // fp > k/(k-1), evaluated without rounding.
  bool exceeded_by(double fp) const noexcept;

 private:
  std::uint32_t k_;
};

// Throws std::invalid_argument for k < 2.
Threshold threshold(std::uint32_t datacenters);

enum class Heaviness : std::uint8_t { map_heavy, reduce_heavy };
enum class Scale : std::uint8_t { small, large };
enum class JobClass : std::uint8_t { small_mh, small_rh, large, unknown };

const char* to_string(JobClass c) noexcept;
std::optional<JobClass> job_class_from_string(std::string_view text) noexcept;

// RH iff fp > td strictly.
Heaviness classify_heaviness(double fp, const Threshold& td);

// SMALL iff m <= N_avg_VPS.
Scale classify_scale(std::uint32_t map_tasks, const VpsAverage& avg_vps);

JobClass classify_job(double fp, const Threshold& td, std::uint32_t map_tasks, const VpsAverage& avg_vps);

// Worst-case inter-datacenter bytes when a job is treated as RH (TR_1: every
// map input fetched remotely, reducers local) or as MH (TR_2: maps local,
// reducers pull (k-1)/k of the intermediate data).
struct WorstCaseTraffic {
  double rh_bytes = 0.0;  // TR_1
  double mh_bytes = 0.0;  // TR_2
  // TR_2 > TR_1, decided exactly.
  bool reduce_heavy_preferred = false;
};

WorstCaseTraffic worst_case_traffic(std::span<const Bytes> block_sizes, double fp, std::uint32_t datacenters);

// Learned average FP per job hash. First writer wins.
class FpRegistry {
 public:
  // Returns false (and keeps the old value) if the hash is already known.
  // Throws std::invalid_argument for an empty observation set.
  bool record(JobHash hash, std::span<const double> observed_fps);
  bool record_mean(JobHash hash, double fp_mean);
  std::optional<double> lookup(JobHash hash) const;
  bool contains(JobHash hash) const { return entries_.contains(hash); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<JobHash, double>& entries() const noexcept { return entries_; }

  // Text table, one "<hash-hex> <fp_mean>" per line.
  void save(std::ostream& out) const;
  static FpRegistry load(std::istream& in, const std::string& source = "<registry>");

  bool operator==(const FpRegistry&) const = default;

 private:
  std::map<JobHash, double> entries_;
};

}  // namespace joss
