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

#include <string>
#include <vector>

#include "epilock/model.hpp"

namespace epilock {

/// diag(d) X diag(d)^-1 has equal off-diagonal row and column sums.
struct BalancingResult {
  Vec d;  // d[0] == 1
  double imbalance = 0.0;  // max_i |row_i - col_i| / (row_i + col_i)
  int iterations = 0;      // sweeps
};

/// Osborne cyclic balancing. `start` (optional, positive) warm-starts d.
BalancingResult balance(const Mat& X, double tol = 1e-10, const Vec& start = Vec(),
                        int max_sweeps = 200000);

/// Off-diagonal row-minus-column sums of diag(d) X diag(d)^-1, which equal
/// minus the gradient of f(g) = sum_ij X_ij e^(g_j - g_i) at g = -log d.
Vec balance_gradient(const Mat& X, const Vec& d);

double balance_imbalance(const Mat& X, const Vec& d);

struct HighSpread {
  std::vector<bool> per_location;
  bool all = false;
};

HighSpread check_high_spread(const FlowFactors& factors, const DiseaseParams& params,
                             const Vec& s0);

/// Find z minimizing sum c_i / z_i such that diag(z) P - diag(D) is stable.
struct StabilityScalingInstance {
  Mat P;
  Vec D;
  Vec c;
};

StabilityScalingInstance to_stability_scaling(const FlowFactors& factors, const Vec& c,
                                              const DiseaseParams& params, const Vec& s0);

enum class SolveMethod { kBalancing, kConstrained };

const char* to_string(SolveMethod method);

struct SolveReport {
  Vec z_star;
  double cost = 0.0;
  CostSpec cost_kind;
  // lambda_max(diag(z) P - diag(D)); zero when the constraint binds.
  double lambda_reduced = 0.0;
  // lambda_max of the model linearization at z; equals -alpha at the optimum.
  double lambda_achieved = 0.0;
  SolveMethod method = SolveMethod::kBalancing;
  char dispatch_case = 'a';
  bool high_spread_holds = false;
  bool unconstrained_exceeds_one = false;
  bool clamped = false;
  bool nonconvex_objective = false;
  bool converged = true;
  int iterations = 0;
  double imbalance = 0.0;
  double zero_gradient = 0.0;  // relative to the largest row sum
  double d_ratio = 0.0;        // max d / min d of the balancing
  double kkt_residual = 0.0;
  double duality_gap = 0.0;
};

SolveReport solve_unconstrained(const StabilityScalingInstance& inst);

struct SolveOptions {
  int max_iter = 50000;
};

/// Three-way dispatch: high spread -> balancing; otherwise balancing when its
/// optimum stays in (0, 1]; otherwise the constrained solver. Non-inverse
/// costs go straight to the constrained solver.
SolveReport solve(const FlowFactors& factors, const Vec& c, const DiseaseParams& params,
                  const Vec& s0, const CostSpec& cost = {}, const SolveOptions& options = {});

/// lambda_max(diag(w) A(z)) <= q is the stability condition; returns q.
double stability_threshold(const DiseaseParams& params);

}  // namespace epilock
