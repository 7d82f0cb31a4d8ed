#include "pmguard/error.hpp"

namespace pmguard {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroInverse: return "ZeroInverse";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::WrongSymbolCount: return "WrongSymbolCount";
    case ErrorCode::SamePair: return "SamePair";
    case ErrorCode::NotEnoughHelpers: return "NotEnoughHelpers";
    case ErrorCode::NotEnoughNodes: return "NotEnoughNodes";
    case ErrorCode::IncompleteSymbolSet: return "IncompleteSymbolSet";
    case ErrorCode::StoreSealed: return "StoreSealed";
    case ErrorCode::UnknownSymbolId: return "UnknownSymbolId";
    case ErrorCode::MissingHash: return "MissingHash";
    case ErrorCode::TooManyDetected: return "TooManyDetected";
    case ErrorCode::InconclusiveDetection: return "InconclusiveDetection";
    case ErrorCode::NotEnoughCleanHelpers: return "NotEnoughCleanHelpers";
    case ErrorCode::NotEnoughCleanNodes: return "NotEnoughCleanNodes";
    case ErrorCode::RepairVerificationFailed: return "RepairVerificationFailed";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NotControlled: return "NotControlled";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace pmguard
