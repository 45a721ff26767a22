#include "soz/error.hpp"

namespace soz {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::BadEnum: return "BadEnum";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ParseError: return "ParseError";
    case Errc::IoFailure: return "IoFailure";
    case Errc::WrongStage: return "WrongStage";
    case Errc::WrongFold: return "WrongFold";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UnknownElectrode: return "UnknownElectrode";
    case Errc::SingleClassTraining: return "SingleClassTraining";
    case Errc::SingleClass: return "SingleClass";
    case Errc::MinorityTooSmall: return "MinorityTooSmall";
    case Errc::TooManySplitsRequested: return "TooManySplitsRequested";
    case Errc::TooFewPatients: return "TooFewPatients";
    case Errc::UnassignedPatient: return "UnassignedPatient";
    case Errc::PatientLeakage: return "PatientLeakage";
    case Errc::SyntheticInTest: return "SyntheticInTest";
    case Errc::BandTooNarrow: return "BandTooNarrow";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::ColumnMismatch: return "ColumnMismatch";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::DivergedLoss: return "DivergedLoss";
    case Errc::UnevenSplits: return "UnevenSplits";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

bool is_validation_error(Errc code) noexcept {
  switch (code) {
    case Errc::MissingColumn:
    case Errc::NonFiniteValue:
    case Errc::BadEnum:
    case Errc::LengthMismatch:
    case Errc::ParseError:
    case Errc::WrongStage:
    case Errc::InvalidConfig:
    case Errc::TooManySplitsRequested:
    case Errc::TooFewPatients:
    case Errc::UnknownElectrode:
      return true;
    default:
      return false;
  }
}

}  // namespace soz
