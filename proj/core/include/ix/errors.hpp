#pragma once

#include <stdexcept>
#include <string>

namespace ix {

enum class ErrCode {
  Ok = 0,
  // ledger
  BadNonce,
  InsufficientBalance,
  UnknownHeight,
  NotFound,
  // merkle
  IndexOutOfRange,
  // vm / contracts
  ValidationFailed,
  InsufficientGas,
  Revert,
  AbiMismatch,
  Unauthorized,
  AlreadyLocked,
  InsufficientAvailable,
  UnknownInvocation,
  // bridge
  AlreadyRegistered,
  NotFinalized,
  BadProof,
  Duplicate,
  // calltree / deploy
  UnknownService,
  CyclicCalls,
  NotDecouplable,
  RestartCapExceeded,
  MissingLogic,
  // exec protocol
  UnverifiedLogic,
  InsufficientFee,
  StaleInvocation,
  ExecFailure,
  LockConflict,
  Timeout,
  // tooling
  ConfigError,
  SchemaMismatch,
  EncodingError,
};

inline const char* err_name(ErrCode code) {
  switch (code) {
    case ErrCode::Ok: return "Ok";
    case ErrCode::BadNonce: return "BadNonce";
    case ErrCode::InsufficientBalance: return "InsufficientBalance";
    case ErrCode::UnknownHeight: return "UnknownHeight";
    case ErrCode::NotFound: return "NotFound";
    case ErrCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrCode::ValidationFailed: return "ValidationFailed";
    case ErrCode::InsufficientGas: return "InsufficientGas";
    case ErrCode::Revert: return "Revert";
    case ErrCode::AbiMismatch: return "AbiMismatch";
    case ErrCode::Unauthorized: return "Unauthorized";
    case ErrCode::AlreadyLocked: return "AlreadyLocked";
    case ErrCode::InsufficientAvailable: return "InsufficientAvailable";
    case ErrCode::UnknownInvocation: return "UnknownInvocation";
    case ErrCode::AlreadyRegistered: return "AlreadyRegistered";
    case ErrCode::NotFinalized: return "NotFinalized";
    case ErrCode::BadProof: return "BadProof";
    case ErrCode::Duplicate: return "Duplicate";
    case ErrCode::UnknownService: return "UnknownService";
    case ErrCode::CyclicCalls: return "CyclicCalls";
    case ErrCode::NotDecouplable: return "NotDecouplable";
    case ErrCode::RestartCapExceeded: return "RestartCapExceeded";
    case ErrCode::MissingLogic: return "MissingLogic";
    case ErrCode::UnverifiedLogic: return "UnverifiedLogic";
    case ErrCode::InsufficientFee: return "InsufficientFee";
    case ErrCode::StaleInvocation: return "StaleInvocation";
    case ErrCode::ExecFailure: return "ExecFailure";
    case ErrCode::LockConflict: return "LockConflict";
    case ErrCode::Timeout: return "Timeout";
    case ErrCode::ConfigError: return "ConfigError";
    case ErrCode::SchemaMismatch: return "SchemaMismatch";
    case ErrCode::EncodingError: return "EncodingError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrCode code, std::string message)
      : std::runtime_error(std::string(err_name(code)) + ": " + message), code_(code) {}

  ErrCode code() const { return code_; }

 private:
  ErrCode code_;
};

[[noreturn]] inline void fail(ErrCode code, std::string message) {
  throw Error(code, std::move(message));
}

}  // namespace ix
