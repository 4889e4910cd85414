#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace joss {

using Bytes = std::uint64_t;
using Seconds = double;

inline constexpr Bytes kMiB = Bytes{1} << 20;
inline constexpr Bytes kGiB = Bytes{1} << 30;

// Strong integral ids. DcId and VpsId are 0-based internally; dumps print
// datacenters 1-based to match the usual cen_c numbering.
enum class JobId : std::uint32_t {};
enum class DcId : std::uint32_t {};
enum class VpsId : std::uint32_t {};

template <typename Id>
constexpr auto index_of(Id id) noexcept {
  return static_cast<std::underlying_type_t<Id>>(id);
}

enum class SlotKind : std::uint8_t { map, reduce };

enum class Locality : std::uint8_t { vps_local, cen_local, off_cen };

const char* to_string(SlotKind kind) noexcept;
const char* to_string(Locality level) noexcept;

struct TaskId {
  JobId job{};
  SlotKind kind = SlotKind::map;
  // Block index for maps, reduce index for reduces; both 0-based.
  std::uint32_t index = 0;

  friend auto operator<=>(const TaskId&, const TaskId&) = default;
};

std::string to_string(const TaskId& task);

// Invalid scenario, trace, or registry input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A simulation could not make progress or violated an internal invariant.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace joss
