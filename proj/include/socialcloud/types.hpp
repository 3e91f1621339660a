#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace socialcloud {

using node_id = std::uint32_t;
using task_id = std::uint32_t;

/// Work and virtual time share one scale: one work unit takes one time unit
/// on a dedicated unit-speed machine. Both are stored as integer micro-units
/// (1 unit = 10^6 micro) so equal splits and conservation checks are exact.
using work_micro = std::int64_t;
using time_micro = std::int64_t;

inline constexpr std::int64_t micro_per_unit = 1'000'000;

inline constexpr work_micro units_to_micro(double units) {
  return static_cast<work_micro>(units * static_cast<double>(micro_per_unit) +
                                 (units >= 0 ? 0.5 : -0.5));
}

inline constexpr double micro_to_units(std::int64_t micro) {
  return static_cast<double>(micro) / static_cast<double>(micro_per_unit);
}

enum class policy_kind { rr, sf, lf };

enum class overhead_mode { centralized, decentralized };

inline std::string to_string(policy_kind p) {
  switch (p) {
  case policy_kind::rr: return "rr";
  case policy_kind::sf: return "sf";
  case policy_kind::lf: return "lf";
  }
  throw std::logic_error("invalid policy_kind");
}

inline std::string to_string(overhead_mode m) {
  return m == overhead_mode::centralized ? "centralized" : "decentralized";
}

inline policy_kind policy_from_string(const std::string& s) {
  if (s == "rr") return policy_kind::rr;
  if (s == "sf") return policy_kind::sf;
  if (s == "lf") return policy_kind::lf;
  throw std::invalid_argument("unknown policy: " + s);
}

} // namespace socialcloud
