#pragma once

#include <stdexcept>
#include <string>

namespace vgr {

enum class ErrorCode {
  InvalidInput,
  DegenerateBaseline,
  DegenerateMatrix,
  DegenerateConfiguration,
  InsufficientData,
  AmbiguousDecomposition,
  NoModel,
  LoadError,
  GenerationError,
  IllConditionedSpectrum,
  GaugeFixError,
  NumericOverflow,
  InvalidOutput,
  TrainingDiverged,
  IoError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vgr
