#pragma once

#include <stdexcept>
#include <string>

namespace upplane {

// Failure conditions surfaced by the library. Every throwing operation
// documents which of these it can raise.
enum class Errc {
  TooFewSamples,
  NonFinite,
  DimensionMismatch,
  DomainError,
  Overflow,
  DegenerateSamples,
  BandwidthError,
  OrderError,
  EmptyInput,
  ZeroWeight,
  OrderViolation,
  SingularInnovation,
  NonConvergence,
  NotSymmetric,
  NotPositiveSemiDefinite,
  UnsupportedFormat,
  CorruptHeader,
  TruncatedData,
  ImageTooSmall,
  ChannelMismatch,
  ShapeMismatch,
  ManifestError,
  IoError,
  DeskScale,
  UsageError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NonFinite: return "NonFinite";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DomainError: return "DomainError";
    case Errc::Overflow: return "Overflow";
    case Errc::DegenerateSamples: return "DegenerateSamples";
    case Errc::BandwidthError: return "BandwidthError";
    case Errc::OrderError: return "OrderError";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::ZeroWeight: return "ZeroWeight";
    case Errc::OrderViolation: return "OrderViolation";
    case Errc::SingularInnovation: return "SingularInnovation";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NotPositiveSemiDefinite: return "NotPositiveSemiDefinite";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::CorruptHeader: return "CorruptHeader";
    case Errc::TruncatedData: return "TruncatedData";
    case Errc::ImageTooSmall: return "ImageTooSmall";
    case Errc::ChannelMismatch: return "ChannelMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::ManifestError: return "ManifestError";
    case Errc::IoError: return "IoError";
    case Errc::DeskScale: return "DeskScale";
    case Errc::UsageError: return "UsageError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace upplane
