#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace soz {

enum class Errc {
  // ingestion / schema
  MissingColumn,
  NonFiniteValue,
  BadEnum,
  LengthMismatch,
  ParseError,
  IoFailure,
  // stage and configuration contracts
  WrongStage,
  WrongFold,
  InvalidConfig,
  EmptyInput,
  // generator
  UnknownElectrode,
  // encoding / resampling / splitting
  SingleClassTraining,
  SingleClass,
  MinorityTooSmall,
  TooManySplitsRequested,
  TooFewPatients,
  UnassignedPatient,
  PatientLeakage,
  SyntheticInTest,
  // classifiers
  BandTooNarrow,
  KTooLarge,
  ColumnMismatch,
  DimMismatch,
  NonFiniteGradient,
  ShapeMismatch,
  DivergedLoss,
  // evaluation
  UnevenSplits,
};

std::string_view to_string(Errc code) noexcept;

/// Errors raised by library operations. `code()` identifies the contract that
/// was violated; `what()` carries row/column or stage context.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// True for errors caused by bad input or configuration rather than by a
/// failure while computing (the CLI maps these to exit code 1).
bool is_validation_error(Errc code) noexcept;

}  // namespace soz
