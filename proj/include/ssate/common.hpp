#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace ssate {

inline constexpr const char* kVersion = "0.1.0";

// Linear predictors are clamped to this magnitude before any inverse link.
inline constexpr double kLinearPredictorClamp = 30.0;

// Bad or inconsistent inputs (dimension mismatches, out-of-range knobs,
// malformed files).  Maps to CLI exit code 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// A well-formed request that cannot be estimated (empty treatment arm,
// unlabeled-only data, too many degenerate resampling draws).  Exit code 2.
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Ordered key -> value diagnostics attached to fits and reports
// (effective sample sizes, truncation counts, degeneracy flags).
using Diagnostics = std::map<std::string, double>;

}  // namespace ssate
