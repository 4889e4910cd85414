#include "joss/classify.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "joss/hash.hpp"
#include "joss/workload.hpp"

namespace joss {

JobHash job_hash(std::string_view code_id, std::string_view input_type) {
  if (code_id.empty() || input_type.empty()) {
    throw std::invalid_argument("job_hash: code id and input type must be non-empty");
  }
  return Fnv1a64{}.update(code_id).update("\x1f").update(input_type).digest();
}

Threshold::Threshold(std::uint32_t datacenters) : k_(datacenters) {
  if (datacenters < 2) throw std::invalid_argument("threshold: k must be >= 2");
}

bool Threshold::exceeded_by(double fp) const noexcept {
  // fp*(k-1) = p + e exactly; k is representable, so rounding to p never
  // crosses k and the residual only matters on a tie.
  const double km1 = static_cast<double>(k_ - 1);
  const double k = static_cast<double>(k_);
  const double p = fp * km1;
  if (p != k) return p > k;
  return std::fma(fp, km1, -p) > 0.0;
}

Threshold threshold(std::uint32_t datacenters) {
  return Threshold(datacenters);
}

const char* to_string(JobClass c) noexcept {
  switch (c) {
    case JobClass::small_mh: return "SMALL_MH";
    case JobClass::small_rh: return "SMALL_RH";
    case JobClass::large: return "LARGE";
    case JobClass::unknown: return "UNKNOWN";
  }
  return "?";
}

std::optional<JobClass> job_class_from_string(std::string_view text) noexcept {
  for (auto c : {JobClass::small_mh, JobClass::small_rh, JobClass::large, JobClass::unknown}) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

Heaviness classify_heaviness(double fp, const Threshold& td) {
  return td.exceeded_by(fp) ? Heaviness::reduce_heavy : Heaviness::map_heavy;
}

Scale classify_scale(std::uint32_t map_tasks, const VpsAverage& avg_vps) {
  return VpsAverage(map_tasks) <= avg_vps ? Scale::small : Scale::large;
}

JobClass classify_job(double fp, const Threshold& td, std::uint32_t map_tasks, const VpsAverage& avg_vps) {
  if (classify_scale(map_tasks, avg_vps) == Scale::large) return JobClass::large;
  return classify_heaviness(fp, td) == Heaviness::reduce_heavy ? JobClass::small_rh : JobClass::small_mh;
}

WorstCaseTraffic worst_case_traffic(std::span<const Bytes> block_sizes, double fp, std::uint32_t datacenters) {
  const Threshold td(datacenters);
  const Bytes total = std::accumulate(block_sizes.begin(), block_sizes.end(), Bytes{0});
  const double k = static_cast<double>(datacenters);
  WorstCaseTraffic out;
  out.rh_bytes = static_cast<double>(total);
  out.mh_bytes = (k - 1.0) / k * static_cast<double>(total) * fp;
  // (k-1)/k * S * fp > S  <=>  fp > k/(k-1) for S > 0; both sides vanish at S = 0.
  out.reduce_heavy_preferred = total > 0 && td.exceeded_by(fp);
  return out;
}

bool FpRegistry::record(JobHash hash, std::span<const double> observed_fps) {
  if (observed_fps.empty()) throw std::invalid_argument("FpRegistry::record: no observed map tasks");
  const double mean =
      std::accumulate(observed_fps.begin(), observed_fps.end(), 0.0) / static_cast<double>(observed_fps.size());
  return record_mean(hash, mean);
}

bool FpRegistry::record_mean(JobHash hash, double fp_mean) {
  return entries_.emplace(hash, fp_mean).second;
}

std::optional<double> FpRegistry::lookup(JobHash hash) const {
  auto it = entries_.find(hash);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void FpRegistry::save(std::ostream& out) const {
  for (const auto& [hash, fp] : entries_) out << fmt::format("{:016x} ", hash) << format_double(fp) << '\n';
}

FpRegistry FpRegistry::load(std::istream& in, const std::string& source) {
  FpRegistry reg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string hash_text, fp_text, extra;
    if (!(ss >> hash_text)) continue;
    if (hash_text.starts_with('#')) continue;
    if (!(ss >> fp_text) || (ss >> extra)) {
      throw ConfigError(fmt::format("{}:{}: expected '<hash> <fp_mean>'", source, lineno));
    }
    JobHash hash = 0;
    double fp = 0.0;
    auto r1 = std::from_chars(hash_text.data(), hash_text.data() + hash_text.size(), hash, 16);
    auto r2 = std::from_chars(fp_text.data(), fp_text.data() + fp_text.size(), fp);
    if (r1.ec != std::errc{} || r1.ptr != hash_text.data() + hash_text.size() || r2.ec != std::errc{} ||
        r2.ptr != fp_text.data() + fp_text.size() || !(fp >= 0.0)) {
      throw ConfigError(fmt::format("{}:{}: malformed registry entry", source, lineno));
    }
    reg.record_mean(hash, fp);
  }
  return reg;
}

}  // namespace joss
