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

#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace epilock {

enum class ErrorCode {
  kValidation,
  kDegenerateLocation,
  kNotStronglyConnected,
  kNonConvergence,
  kCalibrationRange,
  kInfeasibleAlpha,
  kDegenerateRates,
  kTauDiagonalZero,
  kStepRejectionCascade,
  kWidthInfeasible,
  kInfeasibleTarget,
  kEmptyGrid,
  kRowCollapse,
  kDataInconsistency,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  // Non-convergence carries the last residual and the best iterate found.
  Error(ErrorCode code, const std::string& message, double residual,
        Eigen::VectorXd best);

  ErrorCode code() const noexcept { return code_; }
  double residual() const noexcept { return residual_; }
  const Eigen::VectorXd& best() const noexcept { return best_; }

  // Numerical failures map to CLI exit code 3, everything else to 2.
  bool numerical() const noexcept;

 private:
  ErrorCode code_;
  double residual_ = 0.0;
  Eigen::VectorXd best_;
};

// Warnings go to stderr unless silenced (tests silence them).
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace epilock
