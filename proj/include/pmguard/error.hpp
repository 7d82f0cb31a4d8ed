#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pmguard {

enum class ErrorCode {
  InvalidArgument,
  ZeroInverse,
  LengthMismatch,
  SingularMatrix,
  InvalidParams,
  WrongSymbolCount,
  SamePair,
  NotEnoughHelpers,
  NotEnoughNodes,
  IncompleteSymbolSet,
  StoreSealed,
  UnknownSymbolId,
  MissingHash,
  TooManyDetected,
  InconclusiveDetection,
  NotEnoughCleanHelpers,
  NotEnoughCleanNodes,
  RepairVerificationFailed,
  BudgetExceeded,
  NotControlled,
  MalformedInput,
  Io,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pmguard
