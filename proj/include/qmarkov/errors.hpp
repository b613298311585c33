#pragma once

#include <stdexcept>
#include <string>

namespace qmarkov {

enum class Errc {
  NonHermitian,
  NotPsd,
  TraceNotOne,
  LayoutMismatch,
  ShapeMismatch,
  NotTracePreserving,
  SupportMismatch,
  IndexOutOfRange,
  InvalidArgument,
  NotMarkov,
  StructureRecoveryFailed,
  NotTwoSidedMarkov,
  NotLocalEnvMarkov,
  ParseError,
  IoError,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::NonHermitian: return "NonHermitian";
    case Errc::NotPsd: return "NotPSD";
    case Errc::TraceNotOne: return "TraceNotOne";
    case Errc::LayoutMismatch: return "LayoutMismatch";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::NotTracePreserving: return "NotTracePreserving";
    case Errc::SupportMismatch: return "SupportMismatch";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NotMarkov: return "NotMarkov";
    case Errc::StructureRecoveryFailed: return "StructureRecoveryFailed";
    case Errc::NotTwoSidedMarkov: return "NotTwoSidedMarkov";
    case Errc::NotLocalEnvMarkov: return "NotLocalEnvMarkov";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace qmarkov
