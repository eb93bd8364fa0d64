#pragma once

#include <stdexcept>
#include <string>

namespace homlag {

// Error codes double as CLI exit-code classes: config -> 1, numeric -> 2, io -> 3.
enum class ErrorCode {
    IndexOutOfRange,
    DimMismatch,
    RankUnderflow,
    SignDomain,
    ZeroLagrangian,
    SingularSystem,
    SingularMetric,
    GaugeInvalid,
    NonFinite,
    NoConvergence,
    NonMonotone,
    DegeneratePath,
    UnknownPreset,
    MissingParam,
    ZeroVelocity,
    ZeroProfile,
    DegenerateJacobian,
    NullWorldvolume,
    NonOrientation,
    ConfigError,
    IoError,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

    const char* code_name() const {
        switch (code_) {
            case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
            case ErrorCode::DimMismatch: return "DimMismatch";
            case ErrorCode::RankUnderflow: return "RankUnderflow";
            case ErrorCode::SignDomain: return "SignDomain";
            case ErrorCode::ZeroLagrangian: return "ZeroLagrangian";
            case ErrorCode::SingularSystem: return "SingularSystem";
            case ErrorCode::SingularMetric: return "SingularMetric";
            case ErrorCode::GaugeInvalid: return "GaugeInvalid";
            case ErrorCode::NonFinite: return "NonFinite";
            case ErrorCode::NoConvergence: return "NoConvergence";
            case ErrorCode::NonMonotone: return "NonMonotone";
            case ErrorCode::DegeneratePath: return "DegeneratePath";
            case ErrorCode::UnknownPreset: return "UnknownPreset";
            case ErrorCode::MissingParam: return "MissingParam";
            case ErrorCode::ZeroVelocity: return "ZeroVelocity";
            case ErrorCode::ZeroProfile: return "ZeroProfile";
            case ErrorCode::DegenerateJacobian: return "DegenerateJacobian";
            case ErrorCode::NullWorldvolume: return "NullWorldvolume";
            case ErrorCode::NonOrientation: return "NonOrientation";
            case ErrorCode::ConfigError: return "ConfigError";
            case ErrorCode::IoError: return "IoError";
        }
        return "Unknown";
    }

private:
    ErrorCode code_;
};

}  // namespace homlag
