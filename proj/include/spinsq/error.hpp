// Copyright 2026 The spinsq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spinsq {

enum class ErrorCode {
    InvalidDirection,
    InvalidArgument,
    ReprMismatch,
    NonSymmetricState,
    CapacityExceeded,
    SingularConfusion,
    MissingDirection,
    InsufficientShots,
    SingularCovariance,
    LengthMismatch,
    ZeroTheta,
    DegenerateFit,
    ConfigError,
    IoError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidDirection: return "InvalidDirection";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ReprMismatch: return "ReprMismatch";
        case ErrorCode::NonSymmetricState: return "NonSymmetricState";
        case ErrorCode::CapacityExceeded: return "CapacityExceeded";
        case ErrorCode::SingularConfusion: return "SingularConfusion";
        case ErrorCode::MissingDirection: return "MissingDirection";
        case ErrorCode::InsufficientShots: return "InsufficientShots";
        case ErrorCode::SingularCovariance: return "SingularCovariance";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::ZeroTheta: return "ZeroTheta";
        case ErrorCode::DegenerateFit: return "DegenerateFit";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace spinsq
