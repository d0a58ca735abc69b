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

#include <vector>

#include "epilock/model.hpp"

namespace epilock {

struct PerronPair {
  double value = 0.0;
  Vec vector;  // positive, unit 1-norm
  int iterations = 0;
  double residual = 0.0;  // ||P v - value v||_inf / ||v||_inf
};

/// Component index per node for the digraph with an edge i -> j whenever
/// X(j, i) != 0 (i != j). Iterative Tarjan.
std::vector<int> strongly_connected_components(const Mat& X);

bool strongly_connected(const Mat& X);

/// Perron eigenpair of a Metzler, strongly connected matrix. Shifted power
/// iteration, finished by shift-invert iteration when the spectral gap is
/// small. Stops on the Collatz-Wielandt gap, so the residual is certified.
PerronPair perron(const Mat& P, double tol = 1e-10);

/// Same, warm-started from a positive guess.
PerronPair perron(const Mat& P, const Vec& start, double tol);

/// Left Perron pair (runs on P^T).
PerronPair perron_left(const Mat& P, double tol = 1e-10);

/// Largest real eigenvalue of a Metzler matrix that may be reducible: the
/// maximum over the diagonal blocks of its strongly connected components.
double spectral_abscissa(const Mat& M, double tol = 1e-10);

struct StabilityCheck {
  bool stabilizing = false;
  double margin = 0.0;  // -alpha - lambda_max
  double lambda = 0.0;
};

StabilityCheck is_stabilizing(const Mat& M, double alpha);

/// lambda_max of the linearization with no lockdown (z = 1).
double initial_growth(const FlowFactors& factors, const DiseaseParams& params,
                      const Vec& s0);

/// Sets beta_s (COVID, beta_a = alpha_hat * beta_s) or zeta (SIS/SIR) so the
/// no-lockdown growth rate equals target_growth.
DiseaseParams calibrate_beta(const FlowFactors& factors, DiseaseParams params,
                             const Vec& s0, double target_growth);

/// rho(diag(w) A(z)) * b1(0).
double reproduction_number(const FlowFactors& factors, const Vec& z,
                           const DiseaseParams& params, const Vec& s0);

/// r = b1(0) / b1(alpha) for alpha = params.alpha.
double alpha_to_r(const DiseaseParams& params);
double r_to_alpha(const DiseaseParams& params, double r);

}  // namespace epilock
