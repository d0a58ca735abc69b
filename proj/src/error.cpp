// Copyright 2026 The epilock Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "epilock/error.hpp"

#include <atomic>
#include <iostream>
#include <utility>

namespace epilock {

namespace {
std::atomic<bool> g_warnings{true};
}

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "Validation";
    case ErrorCode::kDegenerateLocation: return "DegenerateLocation";
    case ErrorCode::kNotStronglyConnected: return "NotStronglyConnected";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kCalibrationRange: return "CalibrationRange";
    case ErrorCode::kInfeasibleAlpha: return "InfeasibleAlpha";
    case ErrorCode::kDegenerateRates: return "DegenerateRates";
    case ErrorCode::kTauDiagonalZero: return "TauDiagonalZero";
    case ErrorCode::kStepRejectionCascade: return "StepRejectionCascade";
    case ErrorCode::kWidthInfeasible: return "WidthInfeasible";
    case ErrorCode::kInfeasibleTarget: return "InfeasibleTarget";
    case ErrorCode::kEmptyGrid: return "EmptyGrid";
    case ErrorCode::kRowCollapse: return "RowCollapse";
    case ErrorCode::kDataInconsistency: return "DataInconsistency";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

Error::Error(ErrorCode code, const std::string& message, double residual,
             Eigen::VectorXd best)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      residual_(residual),
      best_(std::move(best)) {}

bool Error::numerical() const noexcept {
  return code_ == ErrorCode::kNonConvergence ||
         code_ == ErrorCode::kCalibrationRange ||
         code_ == ErrorCode::kStepRejectionCascade;
}

void warn(const std::string& message) {
  if (g_warnings.load()) std::cerr << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { g_warnings.store(enabled); }

}  // namespace epilock
