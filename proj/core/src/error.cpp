#include "matchforge/error.hpp"

namespace matchforge {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::DanglingReference: return "DanglingReference";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::ParseError: return "ParseError";
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::DanglingUri: return "DanglingUri";
    case Errc::DuplicateUri: return "DuplicateUri";
    case Errc::UnknownUri: return "UnknownUri";
    case Errc::UnknownLanguage: return "UnknownLanguage";
    case Errc::InvalidReference: return "InvalidReference";
    case Errc::EmptyChunk: return "EmptyChunk";
    case Errc::NoChunks: return "NoChunks";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::BadCheckpoint: return "BadCheckpoint";
    case Errc::MissingModel: return "MissingModel";
    case Errc::InvalidPattern: return "InvalidPattern";
    case Errc::SingleClass: return "SingleClass";
    case Errc::ZeroRelevant: return "ZeroRelevant";
    case Errc::ZeroVector: return "ZeroVector";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UnknownPairing: return "UnknownPairing";
    case Errc::HiredNotRecommended: return "HiredNotRecommended";
    case Errc::StorageFailure: return "StorageFailure";
    case Errc::UnknownRef: return "UnknownRef";
    case Errc::UnknownId: return "UnknownId";
    case Errc::MissingInput: return "MissingInput";
    case Errc::InvalidConfig: return "InvalidConfig";
  }
  return "UnknownError";
}

ErrorClass error_class(Errc c) {
  switch (c) {
    case Errc::InvalidPattern:
    case Errc::InvalidConfig:
      return ErrorClass::Config;
    case Errc::NonFiniteLoss:
    case Errc::BadCheckpoint:
    case Errc::MissingModel:
    case Errc::DimensionMismatch:
      return ErrorClass::Model;
    case Errc::StorageFailure:
    case Errc::UnknownRef:
    case Errc::UnknownId:
    case Errc::MissingInput:
      return ErrorClass::Trace;
    default:
      return ErrorClass::Data;
  }
}

}  // namespace matchforge
