#pragma once

// Output helpers shared by every module: deterministic number formatting,
// stable fingerprints and the module version stamp embedded in reports.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace dynheat {

inline constexpr std::string_view kModuleVersion = "dynheat 1.0.0";

/// Shortest round-trip representation ("nan", "inf", "-inf" for specials).
std::string format_double(double x);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 1469598103934665603ULL);
std::uint64_t fnv1a(std::span<const double> values, std::uint64_t seed = 1469598103934665603ULL);

std::string hex64(std::uint64_t v);

}  // namespace dynheat
