#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aadt {

enum class Errc {
    UnmappedClass,
    MissingHeader,
    BadDate,
    NonNumericVolume,
    MissingGrowthFactor,
    WrongRowCount,
    NonNumericCell,
    NonPositiveParam,
    DuplicateStation,
    BadClassCode,
    MissingStationFile,
    NetworkError,
    InvalidTemplate,
    IoError,
    DimensionMismatch,
    EmptyTrainingSet,
    NonFiniteInput,
    NoConvergence,
    TooFewSamples,
    NoCompleteDays,
    UnknownStation,
    UntrainedGroup,
    ZeroFactor,
    InconsistentClass,
    NonPositiveActual,
    EmptyInput,
    BadConfig,
};

constexpr std::string_view errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::UnmappedClass: return "UnmappedClass";
    case Errc::MissingHeader: return "MissingHeader";
    case Errc::BadDate: return "BadDate";
    case Errc::NonNumericVolume: return "NonNumericVolume";
    case Errc::MissingGrowthFactor: return "MissingGrowthFactor";
    case Errc::WrongRowCount: return "WrongRowCount";
    case Errc::NonNumericCell: return "NonNumericCell";
    case Errc::NonPositiveParam: return "NonPositiveParam";
    case Errc::DuplicateStation: return "DuplicateStation";
    case Errc::BadClassCode: return "BadClassCode";
    case Errc::MissingStationFile: return "MissingStationFile";
    case Errc::NetworkError: return "NetworkError";
    case Errc::InvalidTemplate: return "InvalidTemplate";
    case Errc::IoError: return "IoError";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NoCompleteDays: return "NoCompleteDays";
    case Errc::UnknownStation: return "UnknownStation";
    case Errc::UntrainedGroup: return "UntrainedGroup";
    case Errc::ZeroFactor: return "ZeroFactor";
    case Errc::InconsistentClass: return "InconsistentClass";
    case Errc::NonPositiveActual: return "NonPositiveActual";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::BadConfig: return "BadConfig";
    }
    return "Unknown";
}

/// Every failure raised by the library. `what()` is "<Kind>: <detail>".
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code)
    {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace aadt
