#pragma once

#include <stdexcept>
#include <string>

namespace matchforge {

enum class Errc {
  // corpus
  DanglingReference,
  InsufficientData,
  ParseError,
  // ontology
  CycleDetected,
  DanglingUri,
  DuplicateUri,
  UnknownUri,
  UnknownLanguage,
  InvalidReference,
  // embed / matchnet
  EmptyChunk,
  NoChunks,
  DimensionMismatch,
  NonFiniteLoss,
  BadCheckpoint,
  MissingModel,
  // filtering
  InvalidPattern,
  // metrics
  SingleClass,
  ZeroRelevant,
  ZeroVector,
  EmptyInput,
  // explain
  UnknownPairing,
  HiredNotRecommended,
  // trace
  StorageFailure,
  UnknownRef,
  UnknownId,
  MissingInput,
  // configuration
  InvalidConfig,
};

// Process exit classes used by the CLI.
enum class ErrorClass : int {
  Config = 2,
  Data = 3,
  Model = 4,
  Trace = 5,
};

const char* errc_name(Errc c);
ErrorClass error_class(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const { return code_; }
  ErrorClass cls() const { return error_class(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace matchforge
