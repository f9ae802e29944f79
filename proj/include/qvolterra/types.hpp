#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace qvolterra {

using Complex = std::complex<double>;

inline constexpr Complex I{0.0, 1.0};

/// Coefficients below this magnitude are treated as zero throughout the
/// symbolic layer.
inline constexpr double kCoeffPrune = 1e-14;

// ---- error taxonomy ------------------------------------------------------
// Every failure mode that callers are expected to distinguish gets its own
// type; all derive from std::runtime_error so generic handlers still work.

struct TruncationOverflow : std::runtime_error {
  explicit TruncationOverflow(const std::string& what) : std::runtime_error(what) {}
};

struct ExpmOverflow : std::runtime_error {
  explicit ExpmOverflow(const std::string& what) : std::runtime_error(what) {}
};

struct DefectiveDrift : std::runtime_error {
  explicit DefectiveDrift(const std::string& what) : std::runtime_error(what) {}
};

struct NonDecayingKernel : std::runtime_error {
  explicit NonDecayingKernel(const std::string& what) : std::runtime_error(what) {}
};

struct SingularResolvent : std::runtime_error {
  explicit SingularResolvent(const std::string& what) : std::runtime_error(what) {}
};

struct PortMismatch : std::runtime_error {
  explicit PortMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownComponent : std::runtime_error {
  explicit UnknownComponent(const std::string& what) : std::runtime_error(what) {}
};

struct NotLinear : std::runtime_error {
  explicit NotLinear(const std::string& what) : std::runtime_error(what) {}
};

struct GridTooLarge : std::runtime_error {
  explicit GridTooLarge(const std::string& what) : std::runtime_error(what) {}
};

struct SegmentTooShort : std::runtime_error {
  explicit SegmentTooShort(const std::string& what) : std::runtime_error(what) {}
};

struct TruncationLeak : std::runtime_error {
  explicit TruncationLeak(const std::string& what) : std::runtime_error(what) {}
};

struct UnphysicalCovariance : std::runtime_error {
  explicit UnphysicalCovariance(const std::string& what) : std::runtime_error(what) {}
};

struct SpecParseError : std::runtime_error {
  int line;
  SpecParseError(int line_, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_) + ": " + what), line(line_) {}
};

struct UnknownComponentType : SpecParseError {
  UnknownComponentType(int line_, const std::string& what) : SpecParseError(line_, what) {}
};

struct MissingParameter : SpecParseError {
  MissingParameter(int line_, const std::string& what) : SpecParseError(line_, what) {}
};

struct DuplicateName : SpecParseError {
  DuplicateName(int line_, const std::string& what) : SpecParseError(line_, what) {}
};

}  // namespace qvolterra
